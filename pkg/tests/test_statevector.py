import numpy as np
from hypothesis import given, settings

from qsuperopt.circuit import circuit_matrix, parse_circuit
from qsuperopt.statevector import apply_circuit, equivalent_up_to_phase, random_state, unitary

from helpers import concrete_circuits


@settings(max_examples=40, deadline=None)
@given(concrete_circuits(q=3, max_size=6))
def test_simulator_matches_symbolic_matrix(c):
    assert np.allclose(unitary(c), circuit_matrix(c).eval(), atol=1e-12)


def test_qubit_zero_is_most_significant(nam):
    st = np.zeros(4, complex)
    st[0] = 1
    out = apply_circuit(st, parse_circuit("x 0", 2, 0, nam))
    assert out[2] == 1


def test_batched_states(nam, rng):
    c = parse_circuit("h 0; cx 0 1", 2, 0, nam)
    states = random_state(2, rng, count=3)
    assert np.allclose(apply_circuit(states, c), unitary(c) @ states)


def test_equivalent_up_to_phase(nam):
    t = parse_circuit("rz pi/4 0", 1, 0, nam)
    t2 = parse_circuit("rz pi/8 0; rz pi/8 0", 1, 0, nam)
    assert equivalent_up_to_phase(t, t2, [])
    assert not equivalent_up_to_phase(t, parse_circuit("h 0", 1, 0, nam), [])
