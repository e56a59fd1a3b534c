"""ECC sets: in-memory form and the versioned ``.eccs`` JSON file format.

File layout (keys sorted, one-space indent)::

    {
     "counts": {"circuits": 50, "eccs": 19, "transformations": 62},
     "eccs": [{"circuits": ["h 0; h 0", ""], "m": 0, "q": 1}, ...],
     "emax": 1e-15,
     "gate_set": {"gates": [...definitions...], "hash": "...", "name": "nam"},
     "info": {...deterministic generation statistics...},
     "m": 2, "n": 2, "q": 3,
     "schema": "qsuperopt-eccs/1",
     "seed": 20220613,
     "sigma": {"exprs": ["p0", "p1", "2*p0", "2*p1", "p0+p1"], "m": 2, "single_use": true}
    }

The first circuit of each record is the ECC's representative.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .circuit import Circuit, CircuitError, parse_circuit
from .gatedef import Gate, GateSet, ParamSpec

SCHEMA = "qsuperopt-eccs/1"


class EccFileError(ValueError):
    pass


class SchemaError(EccFileError):
    pass


class CountMismatchError(EccFileError):
    pass


class EccParseError(EccFileError):
    pass


class GateSetMismatchError(EccFileError):
    pass


@dataclass
class Ecc:
    """Equivalent circuits; ``circuits[0]`` is the representative."""

    circuits: list[Circuit]

    def __post_init__(self):
        self.circuits = list(self.circuits)
        if not self.circuits:
            raise ValueError("an ECC needs at least one circuit")

    @property
    def representative(self) -> Circuit:
        return self.circuits[0]

    @property
    def q(self) -> int:
        return self.circuits[0].q

    @property
    def m(self) -> int:
        return self.circuits[0].m

    def __len__(self) -> int:
        return len(self.circuits)

    def key(self) -> tuple[int, int, tuple[str, ...]]:
        return (self.q, self.m, tuple(c.text() for c in self.circuits))


@dataclass
class EccSet:
    gate_set: GateSet
    eccs: list[Ecc] = field(default_factory=list)
    sigma: ParamSpec | None = None
    n: int = 0
    q: int = 0
    m: int = 0
    seed: int = 0
    emax: float = 0.0
    info: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.eccs)

    def num_circuits(self) -> int:
        return sum(len(e) for e in self.eccs)

    def with_eccs(self, eccs: Iterable[Ecc], **info) -> "EccSet":
        merged = dict(self.info)
        merged.update(info)
        return EccSet(self.gate_set, list(eccs), self.sigma, self.n, self.q, self.m, self.seed, self.emax, merged)

    def counts(self) -> dict:
        return {
            "eccs": len(self.eccs),
            "circuits": self.num_circuits(),
            "transformations": transformation_count(self),
        }


def transformation_count(es: EccSet) -> int:
    """Representative-to-member pairs in both directions: ``sum 2(x - 1)``."""
    return sum(2 * (len(e) - 1) for e in es.eccs)


def to_json(es: EccSet) -> dict:
    return {
        "schema": SCHEMA,
        "gate_set": {
            "name": es.gate_set.name,
            "hash": es.gate_set.definition_hash(),
            "gates": [g.definition() for g in es.gate_set.gates],
        },
        "sigma": es.sigma.to_json() if es.sigma is not None else None,
        "n": es.n,
        "q": es.q,
        "m": es.m,
        "seed": es.seed,
        "emax": es.emax,
        "info": es.info,
        "counts": es.counts(),
        "eccs": [{"q": e.q, "m": e.m, "circuits": [c.text() for c in e.circuits]} for e in es.eccs],
    }


def dumps(es: EccSet) -> str:
    return json.dumps(to_json(es), indent=1, sort_keys=True) + "\n"


def save(es: EccSet, path: str | Path) -> None:
    Path(path).write_text(dumps(es))


def loads(text: str, gate_set: GateSet | None = None) -> EccSet:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise EccParseError(f"not a JSON document: {exc}") from None
    if not isinstance(doc, dict) or doc.get("schema") != SCHEMA:
        raise SchemaError(f"unsupported schema {doc.get('schema') if isinstance(doc, dict) else None!r}; expected {SCHEMA}")
    try:
        gdoc = doc["gate_set"]
        gates = tuple(Gate(g["name"], int(g["qubits"]), int(g["params"]), tuple(tuple(r) for r in g["matrix"])) for g in gdoc["gates"])
        gs = GateSet(gdoc["name"], gates)
    except (KeyError, TypeError, ValueError) as exc:
        raise EccParseError(f"bad gate-set header: {exc}") from None
    if gs.definition_hash() != gdoc.get("hash"):
        raise GateSetMismatchError("gate-set hash does not match its embedded definitions")
    if gate_set is not None and gate_set.definition_hash() != gs.definition_hash():
        raise GateSetMismatchError(
            f"file was generated for gate set {gs.name} ({gs.definition_hash()}), "
            f"active set is {gate_set.name} ({gate_set.definition_hash()})"
        )
    eccs = []
    for k, rec in enumerate(doc.get("eccs", [])):
        try:
            eccs.append(Ecc([parse_circuit(t, int(rec["q"]), int(rec["m"]), gs) for t in rec["circuits"]]))
        except (KeyError, TypeError, ValueError, CircuitError) as exc:
            raise EccParseError(f"ECC record {k}: {exc}") from None
    sigma = ParamSpec.from_json(doc["sigma"]) if doc.get("sigma") else None
    es = EccSet(gs, eccs, sigma, int(doc.get("n", 0)), int(doc.get("q", 0)), int(doc.get("m", 0)),
                int(doc.get("seed", 0)), float(doc.get("emax", 0.0)), dict(doc.get("info", {})))
    if doc.get("counts") != es.counts():
        raise CountMismatchError(f"header counts {doc.get('counts')} disagree with body {es.counts()}")
    return es


def load(path: str | Path, gate_set: GateSet | None = None) -> EccSet:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise EccFileError(f"cannot read {path}: {exc}") from exc
    return loads(text, gate_set)
