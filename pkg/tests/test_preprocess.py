import numpy as np
import pytest
from hypothesis import given, settings

from qsuperopt.benchmarks import load_benchmark
from qsuperopt.circuit import Circuit, Instruction, parse_circuit
from qsuperopt.gatedef import GATES, builtin_gate_set
from qsuperopt.preprocess import (
    PreprocessError,
    cancel_adjacent,
    decompose_toffoli,
    merge_and_cancel,
    merge_rotations,
    preprocess,
    rigetti_pipeline,
    toffoli_gates,
    transpile,
)
from qsuperopt.statevector import equivalent_up_to_phase, unitary

from helpers import concrete_circuits

CT = builtin_gate_set("clifford_t")


def _c(text, q, gates=None):
    return parse_circuit(text, q, 0, gates or GATES)


def test_t_to_rz():
    assert transpile(_c("t 0; sdg 0", 1), "nam").text() == "rz pi/4 0; rz -pi/2 0"


def test_transpile_to_ibm_and_rigetti():
    c = _c("h 0; x 1; t 1; cx 0 1", 2)
    for gs in ("ibm", "rigetti"):
        out = transpile(c, gs)
        assert set(out.gate_names()) <= set(builtin_gate_set(gs).names())
        assert equivalent_up_to_phase(c, out, [])


def test_missing_rule():
    with pytest.raises(PreprocessError):
        transpile(_c("rx90 0", 1), "nam")


@pytest.mark.parametrize("polarity", [0, 1])
def test_toffoli_decomposition_matrix(polarity):
    body = Circuit(3, 0, tuple(toffoli_gates(0, 1, 2, polarity)))
    assert len(body) == 15
    assert equivalent_up_to_phase(body, _c("ccx 0 1 2", 3), [])
    assert np.allclose(abs(np.vdot(unitary(body)[:, 6], unitary(_c("ccx 0 1 2", 3))[:, 6])), 1)


def test_ccz_and_no_toffoli():
    out = decompose_toffoli(_c("ccz 2 0 1", 3))
    assert "ccz" not in out.gate_names()
    assert equivalent_up_to_phase(out, _c("ccz 2 0 1", 3), [])
    c = _c("h 0; cx 0 1", 2)
    assert decompose_toffoli(c) == c


def test_single_toffoli_either_polarity_is_15():
    assert len(decompose_toffoli(_c("ccx 0 1 2", 3))) == 15


def test_merge_examples():
    assert merge_rotations(_c("rz pi/4 0; rz pi/4 0", 1)).text() == "rz pi/2 0"
    c = _c("rz pi/3 0; cx 1 0; cx 1 0; rz pi/6 0", 2)
    m = merge_rotations(c)
    assert m.gate_names().count("rz") == 1 and equivalent_up_to_phase(c, m, [])
    c = _c("rz pi/4 0; cx 0 1; rz pi/4 1", 2)
    assert merge_rotations(c) == c
    assert len(merge_rotations(_c("rz pi 0; h 1; rz pi 0", 2))) == 1


@settings(max_examples=80, deadline=None)
@given(concrete_circuits(q=3, max_size=12))
def test_merge_sound_and_never_grows(c):
    m = merge_rotations(c)
    assert len(m) <= len(c)
    assert equivalent_up_to_phase(c, m, [])
    mc = merge_and_cancel(c)
    assert len(mc) <= len(m) and equivalent_up_to_phase(c, mc, [])


def test_rigetti_pipeline_examples():
    one = rigetti_pipeline(_c("cx 0 1", 2))
    assert len(one) == 9 and equivalent_up_to_phase(one, _c("cx 0 1", 2), [])
    assert len(rigetti_pipeline(_c("cx 0 1; cx 0 1", 2))) == 0
    assert set(one.gate_names()) <= set(builtin_gate_set("rigetti").names())


def test_cancel_adjacent_cascades():
    assert len(cancel_adjacent(_c("h 0; cx 0 1; cx 0 1; h 0", 2))) == 0
    assert len(cancel_adjacent(_c("cz 0 1; cz 1 0", 2))) == 0
    assert len(cancel_adjacent(_c("cx 0 1; cx 1 0", 2))) == 2


def test_tof3_counts():
    c = load_benchmark("tof_3")
    assert len(transpile(c, "nam")) == 45
    assert len(preprocess(load_benchmark("tof_3_ccx"))) <= 39


@pytest.mark.parametrize("name", ["tof_3", "barenco_tof_3", "tof_3_ccx", "barenco_tof_3_ccx"])
@pytest.mark.parametrize("gs", ["nam", "ibm", "rigetti"])
def test_every_pass_sound_on_benchmarks(name, gs):
    c = load_benchmark(name)
    ref = decompose_toffoli(c, greedy=False) if "ccx" in c.gate_names() else c
    out = preprocess(c, gs)
    assert set(out.gate_names()) <= set(builtin_gate_set(gs).names())
    assert equivalent_up_to_phase(ref, out, [], trials=5, tol=1e-8)
