import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings

from qsuperopt.circuit import (
    Circuit,
    CircuitError,
    CircuitOrder,
    canonical_form,
    canonical_hash,
    circuit_matrix,
    dag_isomorphic,
    drop_first,
    drop_last,
    from_dag,
    instr,
    parse_angle,
    parse_circuit,
    precedes,
    to_dag,
)
from qsuperopt.gatedef import ParamSpec, builtin_gate_set
from qsuperopt.statevector import unitary
from qsuperopt.symexpr import LinComb

from helpers import concrete_circuits


def test_parse_angle_forms():
    assert parse_angle("pi/4") == LinComb.const_pi(Fraction(1, 4))
    assert parse_angle("-3*pi/4") == LinComb.const_pi(Fraction(-3, 4))
    assert parse_angle("p0+p1") == LinComb.param(0) + LinComb.param(1)
    assert parse_angle("2*p1") == LinComb.param(1, 2)
    assert abs(parse_angle("0.25").eval() - 0.25) < 1e-15
    with pytest.raises(CircuitError):
        parse_angle("sin(p0)")


def test_instruction_checks(nam):
    with pytest.raises(CircuitError):
        instr("cx", 0, 0)
    with pytest.raises(CircuitError):
        parse_circuit("cx 0 1", 1, 0, nam)
    with pytest.raises(CircuitError):
        parse_circuit("rz 0", 1, 0, nam)


def test_text_round_trip(nam):
    c = parse_circuit("h 0; rz p0+p1 1; cx 1 0; rz 2*p0 0", 2, 2, nam)
    assert parse_circuit(c.text(), 2, 2, nam) == c
    assert parse_circuit("()", 2, 0, nam) == Circuit(2, 0, ())


def test_single_use(nam):
    assert parse_circuit("rz p0 0; rz p1 0", 1, 2, nam).satisfies_single_use()
    assert not parse_circuit("rz p0 0; rz p0+p1 0", 1, 2, nam).satisfies_single_use()


def test_drop_first_last(nam):
    c = parse_circuit("h 0; x 1; cx 0 1", 2, 0, nam)
    assert drop_first(c).text() == "x 1; cx 0 1"
    assert drop_last(c).text() == "h 0; x 1"
    assert drop_first(drop_last(c)) == drop_last(drop_first(c))
    assert len(drop_first(Circuit(2, 0, c.instrs[:1]))) == 0
    with pytest.raises(CircuitError):
        drop_first(Circuit(2, 0, ()))


def _all_circuits(gs, sigma, q, n):
    order = CircuitOrder(gs, sigma, q)
    singles = order.instructions
    out = []
    for length in range(n + 1):
        for combo in itertools.product(singles, repeat=length):
            out.append(Circuit(q, sigma.num_params, combo))
    return order, out


def test_precedes_is_strict_total_order(nam):
    order, circs = _all_circuits(nam, ParamSpec(1), 2, 2)
    assert precedes(Circuit(2, 1, ()), circs[1], order)
    keys = [order.key(c) for c in circs]
    assert len(set(keys)) == len(keys)
    srt = sorted(circs, key=order.key)
    for a, b in zip(srt, srt[1:]):
        assert precedes(a, b, order) and not precedes(b, a, order)
    for a in circs[:40]:
        assert not precedes(a, a, order)


def test_precedes_total_on_nam_single_gates():
    order = CircuitOrder(builtin_gate_set("nam"), ParamSpec(2), 3)
    circs = [Circuit(3, 2, (ins,)) for ins in order.instructions]
    assert len(circs) == 27
    for a, b in itertools.permutations(circs, 2):
        assert precedes(a, b, order) != precedes(b, a, order)
    for a, b, c in itertools.permutations(circs[:10], 3):
        if precedes(a, b, order) and precedes(b, c, order):
            assert precedes(a, c, order)


def test_dag_of_empty_and_figure_circuit(nam):
    d = to_dag(Circuit(3, 0, ()))
    assert len(d) == 0 and len(d.edges()) == 3
    c = parse_circuit("h 0; cx 0 1; rz pi/4 2; cx 1 2; x 0; h 2", 3, 0, nam)
    d = to_dag(c)
    assert len(d) == 6 and d.num_vertices() == 6 + 2 * 3
    # in-degree = out-degree = arity
    indeg, outdeg = {}, {}
    for src, dst, _ in d.edges():
        indeg[dst[:2]] = indeg.get(dst[:2], 0) + 1
        outdeg[src[:2]] = outdeg.get(src[:2], 0) + 1
    for v, ins in enumerate(c.instrs):
        assert indeg[("gate", v)] == outdeg[("gate", v)] == len(ins.qubits)


def test_canonical_hash_independent_orders(nam):
    a = parse_circuit("h 0; x 1; cx 0 1", 2, 0, nam)
    b = parse_circuit("x 1; h 0; cx 0 1", 2, 0, nam)
    assert canonical_hash(a) == canonical_hash(b)
    assert canonical_hash(parse_circuit("h 0", 2, 0, nam)) != canonical_hash(parse_circuit("h 1", 2, 0, nam))


@settings(max_examples=60, deadline=None)
@given(concrete_circuits(q=3))
def test_dag_round_trip_preserves_semantics(c):
    back = from_dag(to_dag(c))
    assert np.allclose(unitary(back), unitary(c), atol=1e-10)
    assert dag_isomorphic(to_dag(back), to_dag(c))
    assert canonical_form(back) == canonical_form(c)


@settings(max_examples=200, deadline=None)
@given(concrete_circuits(q=2, max_size=4), concrete_circuits(q=2, max_size=4))
def test_hash_equality_iff_canonical_form_equality(a, b):
    assert (canonical_hash(a) == canonical_hash(b)) == (canonical_form(a) == canonical_form(b))


def test_circuit_matrix_matches_unitary(nam, rng):
    c = parse_circuit("h 0; rz p0 1; cx 0 1; rz p0+p1 0; x 1", 2, 2, nam)
    p = tuple(rng.uniform(0, 6, 2))
    assert np.allclose(circuit_matrix(c).eval(p), unitary(c, p), atol=1e-10)
