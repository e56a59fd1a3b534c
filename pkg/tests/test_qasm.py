import pytest

from qsuperopt.benchmarks import load_benchmark, names
from qsuperopt.qasm import QasmError, emit_qasm, parse_qasm


def test_basic_parse():
    c = parse_qasm("OPENQASM 2.0;\nqreg q[1];\nh q[0]; h q[0];")
    assert len(c) == 2 and c.q == 1


def test_round_trip_is_stable():
    text = 'OPENQASM 2.0;\ninclude "qelib1.inc";\nqreg q[3];\n// comment\nrz(-3*pi/4) q[1];\ncx q[0],q[2];\nccx q[0], q[1], q[2];\nrx(pi/2) q[0];\n'
    once = emit_qasm(parse_qasm(text))
    assert emit_qasm(parse_qasm(once)) == once
    assert "rx90 q[0];" in once


@pytest.mark.parametrize("text,line,col", [
    ("qreg q[2];\nfoo q[0];", 2, 1),
    ("qreg q[2];\n  h q[5];", 2, 3),
    ("qreg q[2];\nh r[0];", 2, 1),
    ("h q[0];", 1, 1),
    ("qreg q[2];\nh q[0]", 2, 1),
    ("qreg q[2];\nrz(sin(1)) q[0];", 2, 1),
])
def test_positioned_errors(text, line, col):
    with pytest.raises(QasmError) as exc:
        parse_qasm(text)
    assert (exc.value.line, exc.value.col) == (line, col)


def test_benchmark_gate_counts():
    assert {"tof_3", "barenco_tof_3"} <= set(names())
    assert len(load_benchmark("tof_3")) == 45
    assert len(load_benchmark("barenco_tof_3")) == 58
