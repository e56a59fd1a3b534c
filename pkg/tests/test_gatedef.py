import json
import math

import numpy as np
import pytest

from qsuperopt.gatedef import (
    GATES,
    GateDefinitionError,
    ParamSpec,
    builtin_gate_set,
    custom_gate_set,
    enumerate_single_gate_circuits,
    load_gate_set,
    resolve_gate_set,
)
from qsuperopt.symexpr import LinComb


@pytest.mark.parametrize("name", sorted(GATES))
def test_every_gate_is_unitary(name, rng):
    g = GATES[name]
    vals = tuple(rng.uniform(0, 2 * math.pi, g.param_arity))
    u = g.numeric(vals)
    assert u.shape == (2**g.qubit_arity,) * 2
    assert np.allclose(u.conj().T @ u, np.eye(len(u)), atol=1e-12)


def test_rz_convention():
    u = GATES["rz"].numeric((0.7,))
    assert np.allclose(u, np.diag([np.exp(-0.35j), np.exp(0.35j)]))


def test_cx_control_is_first_qubit():
    u = GATES["cx"].numeric(())
    assert u[3, 2] == 1 and u[2, 3] == 1 and u[0, 0] == 1


def test_builtin_sets():
    assert builtin_gate_set("nam").names() == ["h", "x", "rz", "cx"]
    assert len(builtin_gate_set("rigetti").gates) == 5
    assert [g.param_arity for g in builtin_gate_set("nam").gates] == [0, 0, 1, 0]
    with pytest.raises(KeyError):
        builtin_gate_set("nope")


def test_default_param_exprs():
    sp = ParamSpec(2)
    assert [str(e) for e in sp.exprs] == ["p0", "p1", "2*p0", "2*p1", "p0+p1"]
    assert ParamSpec.from_json(json.loads(json.dumps(sp.to_json()))) == sp


@pytest.mark.parametrize("gs,q,m,want", [("nam", 3, 2, 27), ("rigetti", 3, 2, 30), ("ibm", 3, 4, 1362)])
def test_characteristic(gs, q, m, want):
    # nam: 3 h + 3 x + 5*3 rz + 6 cx; rigetti: 9 fixed + 15 rz + 6 cz
    assert len(enumerate_single_gate_circuits(builtin_gate_set(gs), ParamSpec(m), q)) == want


def test_single_gate_order_parametric_first():
    singles = enumerate_single_gate_circuits(builtin_gate_set("nam"), ParamSpec(2), 2)
    names = [g.name for g, _, _ in singles]
    assert names[: 10] == ["rz"] * 10
    assert names.index("h") < names.index("x") < names.index("cx")
    args = [a for g, a, _ in singles if g.name == "rz"]
    assert args[0] == (LinComb.param(0),) and args[-1] == (LinComb.param(0) + LinComb.param(1),)


def test_definition_hash_distinguishes_sets():
    assert builtin_gate_set("nam").definition_hash() == builtin_gate_set("nam").definition_hash()
    assert builtin_gate_set("nam").definition_hash() != custom_gate_set("x", ["h", "cx"]).definition_hash()


def test_load_custom_gate_set(tmp_path):
    p = tmp_path / "gs.json"
    p.write_text(json.dumps({"name": "hx", "gates": [
        {"name": "h", "qubits": 1, "params": 0, "matrix": [["1/sqrt(2)", "1/sqrt(2)"], ["1/sqrt(2)", "-1/sqrt(2)"]]},
        "cx",
    ]}))
    gs = load_gate_set(p)
    assert gs.names() == ["h", "cx"]
    assert resolve_gate_set(str(p)).definition_hash() == gs.definition_hash()


def test_bad_gate_definition(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({"name": "b", "gates": [{"name": "g", "qubits": 1, "params": 0, "matrix": [["1", "1"], ["0", "1"]]}]}))
    with pytest.raises(GateDefinitionError):
        load_gate_set(p)
