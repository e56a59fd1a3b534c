import math
import shutil

import numpy as np
import pytest

from qsuperopt.circuit import parse_circuit
from qsuperopt.fingerprint import FingerprintContext
from qsuperopt.smtlib import SolverConfig, SolverConfigError, build_script, parse_model
from qsuperopt.statevector import unitary
from qsuperopt.verifier import (
    INCONCLUSIVE,
    REFUTED,
    VERIFIED,
    PhaseFactor,
    Verifier,
    VerifierDisagreement,
    phase_candidates_order,
    verify_equivalence,
    verify_pair,
)

needs_solver = pytest.mark.skipif(shutil.which("z3") is None, reason="z3 not installed")

EQUIVALENT = [
    ("h 0; h 0", "", 1, 0),
    ("rz pi/2 0; rz pi/2 0", "rz pi 0", 1, 0),
    ("h 0; h 1; cx 0 1; h 0; h 1", "cx 1 0", 2, 0),
    ("rz p0 0; rz p1 0", "rz p0+p1 0", 1, 2),
    ("x 0; rz p0 0; x 0", "rz p0 0; rz 2*p1 0; rz -2*p0 0; rz -2*p1 0", 1, 2),
    ("cx 0 1; rz p0 1; cx 0 1; rz p1 0", "rz p1 0; cx 0 1; rz p0 1; cx 0 1", 2, 2),
    ("h 0; rz p0 0; h 0", "h 0; rz p0 0; h 0", 1, 1),
]
INEQUIVALENT = [
    ("h 0", "x 0", 1, 0),
    ("x 0", "", 1, 0),
    ("rz p0 0", "rz p1 0", 1, 2),
    ("cx 0 1", "cx 1 0", 2, 0),
    ("rz 2*p0 0", "rz p0 0", 1, 1),
]


def _pair(nam, a, b, q, m):
    return parse_circuit(a, q, m, nam), parse_circuit(b, q, m, nam)


def test_candidate_order():
    order = phase_candidates_order(2)
    assert [p.b_steps for p in order[:8]] == list(range(8))
    assert all(p.is_constant() for p in order[:8])
    assert sum(map(abs, order[8].a)) == 1
    assert len(order) == 25 * 8


@pytest.mark.parametrize("backend", ["algebraic", pytest.param("smt", marks=needs_solver), pytest.param("both", marks=needs_solver)])
@pytest.mark.parametrize("a,b,q,m", EQUIVALENT)
def test_equivalent_pairs_verify(nam, backend, a, b, q, m):
    c1, c2 = _pair(nam, a, b, q, m)
    v = verify_pair(c1, c2, backend=backend)
    assert v.status == VERIFIED, v


@pytest.mark.parametrize("backend", ["algebraic", pytest.param("both", marks=needs_solver)])
@pytest.mark.parametrize("a,b,q,m", INEQUIVALENT)
def test_inequivalent_pairs_refute(nam, backend, a, b, q, m):
    c1, c2 = _pair(nam, a, b, q, m)
    assert verify_pair(c1, c2, backend=backend).status == REFUTED


def test_parameter_dependent_phase_found(nam):
    # u1(p) = e^{i p/2} rz(p): phase depends on the parameter
    c1 = parse_circuit("rz 2*p0 0", 1, 1, nam)
    ibm = {"u1": __import__("qsuperopt.gatedef", fromlist=["GATES"]).GATES["u1"], **{g.name: g for g in nam.gates}}
    c2 = parse_circuit("u1 2*p0 0", 1, 1, ibm)
    v = verify_pair(c1, c2, backend="algebraic")
    assert v.verified and not v.phase.is_constant()


@needs_solver
def test_smt_counterexample_is_a_real_witness(nam):
    c1 = parse_circuit("rz p0 0; rz p0 0", 1, 1, nam)
    c2 = parse_circuit("rz 2*p0 0", 1, 1, nam)
    assert verify_pair(c1, c2, backend="smt").verified
    c3 = parse_circuit("rz p0 0", 1, 1, nam)
    v = verify_equivalence(c3, c2, PhaseFactor((0,), 0), backend="smt")
    assert v.status == REFUTED and v.counterexample is not None
    p = v.counterexample
    assert np.max(np.abs(unitary(c3, p) - unitary(c2, p))) > 1e-6


@needs_solver
def test_dump_smt_writes_queries(nam, tmp_path):
    c1, c2 = _pair(nam, "rz p0 0; rz p1 0", "rz p0+p1 0", 1, 2)
    v = Verifier(FingerprintContext(1, 2), SolverConfig(dump_dir=str(tmp_path)), "smt")
    assert v.verify_pair(c1, c2).verified
    v.close()
    files = list(tmp_path.glob("*.smt2"))
    assert files and "QF_NRA" in files[0].read_text()


def test_missing_solver_is_config_error(nam, monkeypatch):
    monkeypatch.setenv("QSUPEROPT_SOLVER", "/does/not/exist")
    c1, c2 = _pair(nam, "h 0; h 0", "", 1, 0)
    with pytest.raises(SolverConfigError):
        verify_pair(c1, c2, backend="smt")


@needs_solver
def test_routes_disagreeing_raise(nam, monkeypatch):
    c1, c2 = _pair(nam, "h 0; h 0", "", 1, 0)
    monkeypatch.setattr(Verifier, "check_algebraic", lambda self, ring, res: False)
    with pytest.raises(VerifierDisagreement):
        verify_pair(c1, c2, backend="both")


def test_angles_outside_exact_field_are_inconclusive(nam):
    c1, c2 = _pair(nam, "rz pi/4 0; rz pi/4 0", "rz pi/2 0", 1, 0)
    assert verify_pair(c1, c2, backend="algebraic").status == INCONCLUSIVE


def test_script_and_model_parsing():
    s = build_script(["s_p0", "c_p0"], [("s_p0", "c_p0")], [], uses_sqrt2=False)
    assert "(assert false)" in s and "(declare-fun s_p0 () Real)" in s
    m = parse_model("((s_p0 (- 0.5)) (c_p0 (/ 3.0 4.0)) (r2 1.4142135623?))")
    assert m["s_p0"] == -0.5 and m["c_p0"] == 0.75 and math.isclose(m["r2"], 1.4142135623)
