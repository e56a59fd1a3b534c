import numpy as np
import pytest

from qsuperopt.circuit import CircuitOrder, drop_first, precedes
from qsuperopt.eccset import dumps
from qsuperopt.fingerprint import FingerprintContext
from qsuperopt.gatedef import ParamSpec, builtin_gate_set, custom_gate_set
from qsuperopt.generator import RepGen, completeness_oracle, eccify
from qsuperopt.pruning import prune
from qsuperopt.statevector import equivalent_up_to_phase
from qsuperopt.verifier import Verifier

from conftest import generated


def test_nam_representative_counts():
    # published |R_n| for Nam, q=3 (n = 0..3)
    assert generated("nam", 3, 3).info["representatives"] == [1, 28, 397, 4179]


@pytest.mark.parametrize("n,want", [(2, 361), (3, 3143)])
def test_rigetti_representative_counts(n, want):
    assert generated("rigetti", n, 3).info["representatives"][-1] == want


def test_characteristic_recorded():
    assert generated("nam", 2, 3).info["ch"] == 27


def test_every_ecc_is_semantically_equivalent():
    es = generated("nam", 2, 3)
    rng = np.random.default_rng(0)
    for e in es.eccs:
        for c in e.circuits[1:]:
            p = tuple(rng.uniform(0, 6.3, 2))
            assert equivalent_up_to_phase(e.representative, c, p, trials=2)


def test_representative_is_order_minimum_and_suffix_closed():
    gs, sigma = builtin_gate_set("nam"), ParamSpec(2)
    order = CircuitOrder(gs, sigma, 3)
    es = generated("nam", 3, 3)
    reps = {e.representative.text() for e in es.eccs}
    for e in es.eccs:
        for c in e.circuits[1:]:
            assert precedes(e.representative, c, order)
        # every member's suffix was a representative when it was built
        for c in e.circuits:
            if len(c):
                s = drop_first(c)
                assert len(s) == 0 or s.text() in reps or not any(s.text() in [x.text() for x in f.circuits[1:]] for f in es.eccs)


def test_no_shortcut_or_cache_gives_same_result():
    gs = builtin_gate_set("nam")
    a = RepGen(gs, ParamSpec(2), 2).run(2)
    b = RepGen(gs, ParamSpec(2), 2, structural_shortcut=False, use_cache=False).run(2)
    assert [e.key() for e in a.eccs] == [e.key() for e in b.eccs]


def test_deterministic_output():
    gs = builtin_gate_set("nam")
    assert dumps(RepGen(gs, ParamSpec(2), 2).run(2)) == dumps(RepGen(gs, ParamSpec(2), 2).run(2))


def test_eccify_partitions(nam):
    from qsuperopt.circuit import parse_circuit

    cs = [parse_circuit(t, 1, 0, nam) for t in ("", "h 0; h 0", "x 0", "x 0; x 0", "h 0")]
    out = eccify(cs, Verifier(FingerprintContext(1, 0), backend="algebraic"))
    assert sorted(len(e) for e in out) == [1, 1, 3]


@pytest.mark.parametrize("names,q,n", [(["h", "cx"], 2, 2), (["h"], 1, 3)])
def test_completeness_oracle_accepts_generated_sets(names, q, n):
    gs = custom_gate_set("t", names)
    es = prune(RepGen(gs, ParamSpec(0), q).run(n))
    assert completeness_oracle(gs, ParamSpec(0), n, q, es).complete


def test_completeness_oracle_detects_missing_transformations():
    gs = custom_gate_set("t", ["h", "cx"])
    es = prune(RepGen(gs, ParamSpec(0), 2).run(2))
    crippled = es.with_eccs([type(es.eccs[0])(es.eccs[0].circuits[:2])])
    rep = completeness_oracle(gs, ParamSpec(0), 2, 2, crippled)
    assert rep.complete is False and rep.disconnected


def test_parametric_completeness_nam_q2():
    gs, sigma = builtin_gate_set("nam"), ParamSpec(2)
    es = prune(RepGen(gs, sigma, 2).run(2))
    assert completeness_oracle(gs, sigma, 2, 2, es).complete
