"""Random circuit strategies shared by the tests."""

import math
from fractions import Fraction

from hypothesis import strategies as st

from qsuperopt.circuit import Circuit, Instruction
from qsuperopt.gatedef import GATES
from qsuperopt.symexpr import LinComb

ANGLES = [LinComb.const_pi(Fraction(k, 4)) for k in range(-3, 5)]


@st.composite
def concrete_circuits(draw, q=3, names=("h", "x", "rz", "cx"), max_size=8, min_size=0):
    n = draw(st.integers(min_size, max_size))
    out = []
    for _ in range(n):
        name = draw(st.sampled_from([g for g in names if GATES[g].qubit_arity <= q]))
        g = GATES[name]
        qubits = tuple(draw(st.permutations(range(q)))[: g.qubit_arity])
        if g.param_arity:
            if draw(st.booleans()):
                args = tuple(draw(st.sampled_from(ANGLES)) for _ in range(g.param_arity))
            else:
                args = tuple(LinComb.const_float(draw(st.floats(-math.pi, math.pi))) for _ in range(g.param_arity))
        else:
            args = ()
        out.append(Instruction(g, args, qubits))
    return Circuit(q, 0, tuple(out))
