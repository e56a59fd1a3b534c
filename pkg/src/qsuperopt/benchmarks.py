"""Bundled benchmark circuits."""

from __future__ import annotations

from importlib import resources

from .circuit import Circuit
from .qasm import parse_qasm


def names() -> list[str]:
    root = resources.files(__package__) / "data" / "benchmarks"
    return sorted(p.name[: -len(".qasm")] for p in root.iterdir() if p.name.endswith(".qasm"))


def load_benchmark(name: str) -> Circuit:
    path = resources.files(__package__) / "data" / "benchmarks" / f"{name}.qasm"
    if not path.is_file():
        raise KeyError(f"unknown benchmark {name!r}; available: {names()}")
    return parse_qasm(path.read_text())
