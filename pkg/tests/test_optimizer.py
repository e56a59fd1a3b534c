import itertools
from collections import Counter

import pytest
from hypothesis import given, settings

from qsuperopt.circuit import Circuit, canonical_form, parse_circuit
from qsuperopt.eccset import Ecc, EccSet
from qsuperopt.gatedef import builtin_gate_set
from qsuperopt.optimizer import (
    DagIndex,
    OptimizerError,
    SearchConfig,
    Transformation,
    apply,
    extract_transformations,
    find_matches,
    optimize,
)
from qsuperopt.statevector import equivalent_up_to_phase

from conftest import pruned
from helpers import concrete_circuits


def _t(nam, a, b, q, m=0):
    return Transformation(parse_circuit(a, q, m, nam), parse_circuit(b, q, m, nam))


def test_extract_two_per_member(nam):
    es = EccSet(nam, [Ecc([parse_circuit(t, 1, 0, nam) for t in ("", "h 0; h 0", "x 0; x 0")])])
    ts = extract_transformations(es)
    assert len(ts) == 4
    assert len(extract_transformations(pruned("nam", 3, 3))) == pruned("nam", 3, 3).counts()["transformations"]


def test_hh_cancels(nam):
    out = apply(parse_circuit("h 0; h 0", 1, 0, nam), _t(nam, "h 0; h 0", "", 1))
    assert [c.text() for c in out] == [""]


def test_no_match(nam):
    assert apply(parse_circuit("x 0; cx 0 1", 2, 0, nam), _t(nam, "h 0; h 0", "", 1)) == []


def test_match_on_any_qubits_and_ports(nam):
    t = _t(nam, "cx 0 1; cx 0 1", "", 2)
    c = parse_circuit("cx 2 0; h 1; cx 2 0; cx 0 2; cx 2 0", 3, 0, nam)
    outs = {x.text() for x in apply(c, t)}
    assert outs == {"h 1; cx 0 2; cx 2 0"}


def test_non_convex_match_rejected(nam):
    # cx 0 1 ... cx 0 1 with a gate on qubit 1 in between reachable from the first
    t = _t(nam, "cx 0 1; x 0; cx 0 1", "x 0; x 1", 2)
    c = parse_circuit("cx 0 1; h 1; x 0; cx 0 1", 2, 0, nam)
    assert apply(c, t) == []


def test_parameter_binding(nam):
    t = _t(nam, "rz p0 0; rz p1 0", "rz p0+p1 0", 1, 2)
    c = parse_circuit("rz pi/4 0; rz pi/2 0", 1, 0, nam)
    assert [x.text() for x in apply(c, t)] == ["rz 3*pi/4 0"]
    t2 = _t(nam, "rz 2*p0 0", "rz p0 0; rz p0 0", 1, 1)
    assert [x.text() for x in apply(parse_circuit("rz pi/2 0", 1, 0, nam), t2)] == ["rz pi/4 0; rz pi/4 0"]
    t3 = _t(nam, "rz p0+p1 0", "rz p0 0; rz p1 0", 1, 2)
    (out,) = apply(parse_circuit("rz pi/2 0", 1, 0, nam), t3)
    assert equivalent_up_to_phase(out, parse_circuit("rz pi/2 0", 1, 0, nam), [])


def test_repeated_parameter_must_agree(nam):
    t = _t(nam, "rz p0 0; cx 0 1; rz p0 1", "rz p0 0; cx 0 1; rz p0 1", 2, 1)
    assert find_matches(DagIndex(parse_circuit("rz pi/4 0; cx 0 1; rz pi/2 1", 2, 0, nam)), t) == []
    assert len(find_matches(DagIndex(parse_circuit("rz pi/4 0; cx 0 1; rz pi/4 1", 2, 0, nam)), t)) == 1


def test_flip_cnot_example(nam):
    c = parse_circuit("h 0; h 1; cx 0 1; h 0; h 1", 2, 0, nam)
    res = optimize(c, extract_transformations(pruned("nam", 3, 3)), SearchConfig(timeout_s=30))
    assert res.best.text() == "cx 1 0"


def test_non_improving_steps_reachable(nam):
    # H cx H on the target: needs a cost-preserving move before cancelling
    ts = extract_transformations(pruned("nam", 3, 3))
    c = parse_circuit("h 1; cx 0 1; h 1; h 0; cx 1 0; h 0", 2, 0, nam)
    res = optimize(c, ts, SearchConfig(timeout_s=30))
    assert res.best_cost < len(c)
    assert equivalent_up_to_phase(c, res.best, [])


def test_optimal_input_returned(nam):
    c = parse_circuit("cx 0 1", 2, 0, nam)
    res = optimize(c, extract_transformations(pruned("nam", 2, 3)), SearchConfig(timeout_s=10))
    assert res.best == c


def test_gate_set_checked_before_search(nam):
    c = parse_circuit("cz 0 1", 2, 0, builtin_gate_set("rigetti"))
    with pytest.raises(OptimizerError):
        optimize(c, [], SearchConfig(), gate_set=nam)


def test_empty_transformations_return_input(nam):
    c = parse_circuit("h 0; h 0", 1, 0, nam)
    assert optimize(c, [], SearchConfig()).best == c


def test_gamma_validation():
    with pytest.raises(ValueError):
        SearchConfig(gamma=0.9)


def test_greedy_with_gamma_one(nam):
    ts = extract_transformations(pruned("nam", 2, 3))
    c = parse_circuit("h 0; h 0; x 1; cx 0 1; x 1; x 1; rz pi/4 0; rz pi/4 0", 2, 0, nam)
    res = optimize(c, ts, SearchConfig(gamma=1.0, timeout_s=20))
    assert res.max_enqueued_ratio < 1.0
    costs = [cost for _, cost in res.history]
    assert costs == sorted(costs, reverse=True)


def _brute_force_matches(c: Circuit, t: Transformation):
    """All subsets of gates whose induced sub-sequence, relabelled, equals the target up to DAG equality."""
    out = set()
    k = len(t.target)
    tq = sorted(t.target.qubits_used())
    for gates in itertools.combinations(range(len(c)), k):
        for qmap in itertools.permutations(range(c.q), len(tq)):
            mp = dict(zip(tq, qmap))
            want = canonical_form(Circuit(c.q, 0, tuple(i.remap(mp) for i in t.target.instrs)))
            sub = canonical_form(Circuit(c.q, 0, tuple(c.instrs[g] for g in gates)))
            if want == sub:
                out.add(gates)
    return out


@settings(max_examples=60, deadline=None)
@given(concrete_circuits(q=2, names=("h", "x", "cx"), max_size=5))
def test_matching_agrees_with_brute_force(c):
    from qsuperopt.optimizer import _convex

    nam = builtin_gate_set("nam")
    idx = DagIndex(c)
    for t in (_t(nam, "h 0; h 0", "", 1), _t(nam, "cx 0 1; cx 0 1", "", 2), _t(nam, "h 0; cx 0 1", "h 0; cx 0 1", 2)):
        got = {tuple(sorted(g)) for g, _, _ in find_matches(idx, t)}
        want = {g for g in _brute_force_matches(c, t) if _convex(idx, g)}
        assert got == want


@settings(max_examples=40, deadline=None)
@given(concrete_circuits(q=3, max_size=7))
def test_every_rewrite_preserves_semantics_and_outside_gates(c):
    ts = extract_transformations(pruned("nam", 2, 3))
    idx = DagIndex(c)
    for t in ts[:30]:
        for gates, qmap, bind in find_matches(idx, t):
            from qsuperopt.optimizer import _instantiate, _restitch

            new = _instantiate(t, qmap, bind)
            r = _restitch(idx, gates, new)
            assert equivalent_up_to_phase(c, r, [])
            outside = Counter(c.instrs[v] for v in range(len(c)) if v not in set(gates))
            assert Counter(r.instrs) - Counter(new) == outside
