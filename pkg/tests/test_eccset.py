import json

import pytest

from qsuperopt.eccset import (
    CountMismatchError,
    EccParseError,
    GateSetMismatchError,
    SchemaError,
    dumps,
    load,
    loads,
    save,
)
from qsuperopt.gatedef import builtin_gate_set

from conftest import generated, pruned


def test_round_trip_byte_identical(tmp_path):
    es = generated("nam", 2, 3)
    p = tmp_path / "a.eccs"
    save(es, p)
    again = load(p, builtin_gate_set("nam"))
    assert dumps(again) == p.read_text()
    assert again.counts() == es.counts()


def test_transformation_count_of_loaded_set():
    assert loads(dumps(pruned("nam", 3, 3))).counts()["transformations"] == pruned("nam", 3, 3).counts()["transformations"]


def _doc():
    return json.loads(dumps(pruned("nam", 2, 3)))


def test_tampered_count():
    d = _doc()
    d["counts"]["circuits"] += 1
    with pytest.raises(CountMismatchError):
        loads(json.dumps(d))


def test_schema_mismatch():
    d = _doc()
    d["schema"] = "other/9"
    with pytest.raises(SchemaError):
        loads(json.dumps(d))


def test_parse_errors():
    with pytest.raises(EccParseError):
        loads("{not json")
    d = _doc()
    d["eccs"][0]["circuits"][0] = "zz 0"
    with pytest.raises(EccParseError):
        loads(json.dumps(d))


def test_gate_set_mismatch():
    text = dumps(pruned("nam", 2, 3))
    with pytest.raises(GateSetMismatchError):
        loads(text, builtin_gate_set("rigetti"))
    d = json.loads(text)
    d["gate_set"]["gates"][0]["matrix"][0][0] = "1"
    with pytest.raises((GateSetMismatchError, EccParseError)):
        loads(json.dumps(d))
