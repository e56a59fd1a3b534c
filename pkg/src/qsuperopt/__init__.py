"""Generate, verify, prune and apply symbolic quantum circuit transformations."""

__version__ = "0.1.0"

from .circuit import Circuit, Instruction, parse_circuit
from .eccset import Ecc, EccSet, load, save
from .gatedef import GateSet, ParamSpec, builtin_gate_set
from .generator import RepGen, repgen
from .optimizer import SearchConfig, Transformation, extract_transformations, optimize
from .pruning import prune
from .verifier import Verifier, verify_pair

__all__ = [
    "Circuit",
    "Ecc",
    "EccSet",
    "GateSet",
    "Instruction",
    "ParamSpec",
    "RepGen",
    "SearchConfig",
    "Transformation",
    "Verifier",
    "builtin_gate_set",
    "extract_transformations",
    "load",
    "optimize",
    "parse_circuit",
    "prune",
    "repgen",
    "save",
    "verify_pair",
]
