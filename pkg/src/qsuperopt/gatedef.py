"""Gates, gate sets and the parameter-expression specification.

Every gate's matrix is written as strings in a small grammar, the same one
accepted in gate-set definition files::

    entry  := expression over numbers, i, pi, sqrt(2), a0..a{k-1}
              using + - * / and the functions cos, sin, exp
    exp    := only exp(i*<linear form>) is accepted
    a<k>   := the k-th gate argument; may appear only inside cos/sin/exp

Example (Rz)::

    [["exp(-i*a0/2)", "0"], ["0", "exp(i*a0/2)"]]
"""

from __future__ import annotations

import ast
import hashlib
import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Sequence

import numpy as np

from .symexpr import (
    Coef,
    Expr,
    LinComb,
    SymMatrix,
    UnsupportedExpression,
    add,
    cos,
    expi,
    mul,
    num,
    sin,
)


class GateDefinitionError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Matrix-entry grammar
# ---------------------------------------------------------------------------


class _ILin:
    """``i * linear-form``; the only legal argument of ``exp``."""

    __slots__ = ("lc",)

    def __init__(self, lc: LinComb):
        self.lc = lc


def _as_scalar(v):
    if isinstance(v, Coef):
        return v
    return None


def _to_expr(v, text: str) -> Expr:
    if isinstance(v, Expr):
        return v
    if isinstance(v, Coef):
        return num(v)
    if isinstance(v, LinComb):
        if v.is_constant() and v.pi == 0 and v.offset == 0:
            return num(0)
        raise UnsupportedExpression(f"{text!r}: parameters and pi may only appear inside cos/sin/exp arguments")
    raise UnsupportedExpression(f"{text!r}: exp argument used outside exp()")


def _rational(v) -> Fraction | None:
    if isinstance(v, Coef) and v.is_real() and v.b == 0:
        return v.a
    return None


def _imag_rational(v) -> Fraction | None:
    if isinstance(v, Coef) and not (v.a or v.b or v.d) and v.c:
        return v.c
    return None


def parse_entry(text: str, args: Sequence[LinComb]) -> Expr:
    """Parse one matrix entry, substituting gate argument ``a<k>`` with ``args[k]``."""
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as exc:
        raise GateDefinitionError(f"malformed entry {text!r}: {exc.msg}") from None

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
            return Coef(Fraction(node.value).limit_denominator(10**12) if isinstance(node.value, float) else node.value)
        if isinstance(node, ast.Name):
            if node.id == "pi":
                return LinComb.const_pi(1)
            if node.id == "i":
                return Coef(0, 0, 1)
            if node.id.startswith("a") and node.id[1:].isdigit():
                k = int(node.id[1:])
                if k >= len(args):
                    raise GateDefinitionError(f"{text!r}: argument a{k} out of range")
                return args[k]
            raise GateDefinitionError(f"{text!r}: unknown name {node.id}")
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            if isinstance(node.op, ast.UAdd):
                return v
            if isinstance(v, Coef):
                return -v
            if isinstance(v, LinComb):
                return -v
            if isinstance(v, _ILin):
                return _ILin(-v.lc)
            return -v
        if isinstance(node, ast.BinOp):
            return binop(node.op, ev(node.left), ev(node.right))
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and len(node.args) == 1 and not node.keywords:
            fn = node.func.id
            v = ev(node.args[0])
            if fn == "sqrt":
                r = _rational(v)
                if r == 2:
                    return Coef(0, 1)
                if r is not None and r >= 0 and Fraction(int(r**0.5 + 0.5)) ** 2 == r:
                    return Coef(int(r**0.5 + 0.5))
                raise UnsupportedExpression(f"{text!r}: only sqrt(2) and perfect squares are exact")
            if fn in ("cos", "sin"):
                if isinstance(v, Coef) and v.is_zero():
                    v = LinComb()
                if not isinstance(v, LinComb):
                    raise UnsupportedExpression(f"{text!r}: {fn} argument must be a linear form")
                return cos(v) if fn == "cos" else sin(v)
            if fn == "exp":
                if isinstance(v, Coef) and v.is_zero():
                    return num(1)
                if not isinstance(v, _ILin):
                    raise UnsupportedExpression(f"{text!r}: only exp(i*linear) is supported")
                return expi(v.lc)
        raise GateDefinitionError(f"{text!r}: unsupported syntax {ast.dump(node)[:60]}")

    def binop(op, x, y):
        if isinstance(op, ast.Add) or isinstance(op, ast.Sub):
            if isinstance(op, ast.Sub):
                y = -y if not isinstance(y, _ILin) else _ILin(-y.lc)
            if isinstance(x, LinComb) and isinstance(y, LinComb):
                return x + y
            if isinstance(x, _ILin) and isinstance(y, _ILin):
                return _ILin(x.lc + y.lc)
            if isinstance(x, Coef) and isinstance(y, Coef):
                return x + y
            return add(_to_expr(x, text), _to_expr(y, text))
        if isinstance(op, ast.Mult):
            for a, b in ((x, y), (y, x)):
                if isinstance(a, LinComb) and _rational(b) is not None:
                    return a.scale(_rational(b))
                if isinstance(a, _ILin) and _rational(b) is not None:
                    return _ILin(a.lc.scale(_rational(b)))
                if isinstance(a, LinComb) and _imag_rational(b) is not None:
                    return _ILin(a.scale(_imag_rational(b)))
            if isinstance(x, Coef) and isinstance(y, Coef):
                return x * y
            return mul(_to_expr(x, text), _to_expr(y, text))
        if isinstance(op, ast.Div):
            r = _rational(y)
            if isinstance(x, LinComb) and r:
                return x.scale(1 / r)
            if isinstance(x, _ILin) and r:
                return _ILin(x.lc.scale(1 / r))
            if isinstance(y, Coef):
                if isinstance(x, Coef):
                    return x / y
                return mul(_to_expr(x, text), num(y.inverse()))
            raise UnsupportedExpression(f"{text!r}: division by a non-constant")
        raise GateDefinitionError(f"{text!r}: unsupported operator")

    return _to_expr(ev(tree), text)


def _substitute(e: Expr, args: Sequence[LinComb]) -> Expr:
    if e.op in ("cos", "sin", "expi"):
        lc = e.args[0].substitute(dict(enumerate(args)))
        return {"cos": cos, "sin": sin, "expi": expi}[e.op](lc)
    if e.op == "add":
        return add(*(_substitute(a, args) for a in e.args))
    if e.op == "mul":
        return mul(*(_substitute(a, args) for a in e.args))
    return e


# ---------------------------------------------------------------------------
# Gates
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Gate:
    """A (possibly parametric) gate given by its symbolic matrix."""

    name: str
    qubit_arity: int
    param_arity: int
    matrix_spec: tuple[tuple[str, ...], ...]
    template: SymMatrix = field(init=False, repr=False)

    def __post_init__(self):
        if self.qubit_arity < 1 or self.param_arity < 0:
            raise GateDefinitionError(f"{self.name}: bad arity")
        dim = 1 << self.qubit_arity
        if len(self.matrix_spec) != dim or any(len(r) != dim for r in self.matrix_spec):
            raise GateDefinitionError(f"{self.name}: matrix must be {dim}x{dim}")
        placeholders = [LinComb.param(k) for k in range(self.param_arity)]
        rows = [[parse_entry(x, placeholders) for x in r] for r in self.matrix_spec]
        object.__setattr__(self, "template", SymMatrix(rows))
        probe = self.template.eval(tuple(0.3 + 0.7 * k for k in range(self.param_arity)))
        if not np.allclose(probe.conj().T @ probe, np.eye(dim), atol=1e-9):
            raise GateDefinitionError(f"{self.name}: matrix is not unitary")

    def __eq__(self, other):
        return isinstance(other, Gate) and (self.name, self.matrix_spec) == (other.name, other.matrix_spec)

    def __hash__(self):
        return hash((self.name, self.qubit_arity, self.param_arity))

    def matrix(self, args: Sequence[LinComb]) -> SymMatrix:
        if len(args) != self.param_arity:
            raise ValueError(f"{self.name} takes {self.param_arity} parameter(s), got {len(args)}")
        if not args:
            return self.template
        return self.template.map(lambda e: _substitute(e, args))

    def numeric(self, values: Sequence[float] = ()) -> np.ndarray:
        if len(values) != self.param_arity:
            raise ValueError(f"{self.name} takes {self.param_arity} parameter(s), got {len(values)}")
        return _numeric(self, tuple(float(v) for v in values))

    def definition(self) -> dict:
        return {
            "name": self.name,
            "qubits": self.qubit_arity,
            "params": self.param_arity,
            "matrix": [list(r) for r in self.matrix_spec],
        }


@lru_cache(maxsize=65536)
def _numeric(gate: Gate, values: tuple[float, ...]) -> np.ndarray:
    m = gate.template.eval(values)
    m.setflags(write=False)
    return m


def gate_matrix(g: Gate, args: Sequence[LinComb]) -> SymMatrix:
    return g.matrix(args)


def _diag(*entries: str) -> tuple[tuple[str, ...], ...]:
    n = len(entries)
    return tuple(tuple(entries[r] if r == c else "0" for c in range(n)) for r in range(n))


def _perm(n: int, swap: tuple[int, int]) -> tuple[tuple[str, ...], ...]:
    target = list(range(n))
    target[swap[0]], target[swap[1]] = swap[1], swap[0]
    return tuple(tuple("1" if target[r] == c else "0" for c in range(n)) for r in range(n))


_R = "1/sqrt(2)"

GATES: dict[str, Gate] = {
    g.name: g
    for g in [
        Gate("h", 1, 0, ((_R, _R), (_R, "-" + _R))),
        Gate("x", 1, 0, (("0", "1"), ("1", "0"))),
        Gate("rz", 1, 1, _diag("exp(-i*a0/2)", "exp(i*a0/2)")),
        Gate("cx", 2, 0, _perm(4, (2, 3))),
        Gate("u1", 1, 1, _diag("1", "exp(i*a0)")),
        Gate(
            "u2",
            1,
            2,
            ((_R, f"-{_R}*exp(i*a1)"), (f"{_R}*exp(i*a0)", f"{_R}*exp(i*(a0+a1))")),
        ),
        Gate(
            "u3",
            1,
            3,
            (
                ("cos(a0/2)", "-exp(i*a2)*sin(a0/2)"),
                ("exp(i*a1)*sin(a0/2)", "exp(i*(a1+a2))*cos(a0/2)"),
            ),
        ),
        Gate("rx90", 1, 0, (("cos(pi/4)", "-i*sin(pi/4)"), ("-i*sin(pi/4)", "cos(pi/4)"))),
        Gate("rxm90", 1, 0, (("cos(pi/4)", "i*sin(pi/4)"), ("i*sin(pi/4)", "cos(pi/4)"))),
        Gate("cz", 2, 0, _diag("1", "1", "1", "-1")),
        Gate("t", 1, 0, _diag("1", "exp(i*pi/4)")),
        Gate("tdg", 1, 0, _diag("1", "exp(-i*pi/4)")),
        Gate("s", 1, 0, _diag("1", "i")),
        Gate("sdg", 1, 0, _diag("1", "-i")),
        Gate("ccx", 3, 0, _perm(8, (6, 7))),
        Gate("ccz", 3, 0, _diag("1", "1", "1", "1", "1", "1", "1", "-1")),
    ]
}

# Display names following the usual notation.
DISPLAY = {
    "h": "H",
    "x": "X",
    "rz": "Rz",
    "cx": "CNOT",
    "u1": "U1",
    "u2": "U2",
    "u3": "U3",
    "rx90": "Rx(pi/2)",
    "rxm90": "Rx(-pi/2)",
    "cz": "CZ",
    "t": "T",
    "tdg": "T^dag",
    "s": "S",
    "sdg": "S^dag",
    "ccx": "CCX",
    "ccz": "CCZ",
}


# ---------------------------------------------------------------------------
# Gate sets and the parameter specification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GateSet:
    name: str
    gates: tuple[Gate, ...]

    def __post_init__(self):
        names = [g.name for g in self.gates]
        if len(set(names)) != len(names):
            raise GateDefinitionError(f"duplicate gate names in {self.name}")

    def __contains__(self, name: str) -> bool:
        return any(g.name == name for g in self.gates)

    def __getitem__(self, name: str) -> Gate:
        for g in self.gates:
            if g.name == name:
                return g
        raise KeyError(f"gate {name!r} not in gate set {self.name}")

    def index(self, name: str) -> int:
        for k, g in enumerate(self.gates):
            if g.name == name:
                return k
        raise KeyError(name)

    def names(self) -> list[str]:
        return [g.name for g in self.gates]

    def definition(self) -> dict:
        return {"name": self.name, "gates": [g.definition() for g in self.gates]}

    def definition_hash(self) -> str:
        text = json.dumps([g.definition() for g in self.gates], sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()[:16]


_BUILTIN_SETS = {
    "nam": ("h", "x", "rz", "cx"),
    "ibm": ("u1", "u2", "u3", "cx"),
    "rigetti": ("rx90", "rxm90", "x", "rz", "cz"),
    "clifford_t": ("h", "t", "tdg", "s", "sdg", "cx"),
}


def builtin_gate_set(name: str) -> GateSet:
    try:
        names = _BUILTIN_SETS[name]
    except KeyError:
        raise KeyError(f"unknown gate set {name!r}; choose from {sorted(_BUILTIN_SETS)}") from None
    return GateSet(name, tuple(GATES[n] for n in names))


def custom_gate_set(name: str, gate_names: Sequence[str]) -> GateSet:
    """A gate set assembled from the built-in gate library, e.g. ``["h", "cx"]``."""
    return GateSet(name, tuple(GATES[n] for n in gate_names))


def load_gate_set(path: str | Path) -> GateSet:
    """Load a JSON gate-set file (see the module docstring for the entry grammar)."""
    data = json.loads(Path(path).read_text())
    gates = []
    for g in data["gates"]:
        if isinstance(g, str):
            if g not in GATES:
                raise GateDefinitionError(f"unknown library gate {g!r}")
            gates.append(GATES[g])
            continue
        if "matrix" not in g and g["name"] in GATES:
            gates.append(GATES[g["name"]])
            continue
        gates.append(
            Gate(
                g["name"],
                int(g["qubits"]),
                int(g.get("params", 0)),
                tuple(tuple(str(x) for x in row) for row in g["matrix"]),
            )
        )
    return GateSet(data.get("name", Path(path).stem), tuple(gates))


def resolve_gate_set(name_or_path: str) -> GateSet:
    if name_or_path in _BUILTIN_SETS:
        return builtin_gate_set(name_or_path)
    return load_gate_set(name_or_path)


def default_param_exprs(m: int) -> tuple[LinComb, ...]:
    """``p_i``, then ``2p_i``, then ``p_i + p_j`` (i < j)."""
    exprs = [LinComb.param(i) for i in range(m)]
    exprs += [LinComb.param(i, 2) for i in range(m)]
    exprs += [LinComb(((i, 1), (j, 1))) for i in range(m) for j in range(i + 1, m)]
    return tuple(exprs)


@dataclass(frozen=True)
class ParamSpec:
    """Which parameter expressions symbolic circuits may use."""

    num_params: int
    exprs: tuple[LinComb, ...] = ()
    single_use: bool = True

    def __post_init__(self):
        if not self.exprs:
            object.__setattr__(self, "exprs", default_param_exprs(self.num_params))
        for e in self.exprs:
            if any(i >= self.num_params for i in e.params()):
                raise ValueError(f"expression {e} references a parameter >= {self.num_params}")

    def to_json(self) -> dict:
        return {"m": self.num_params, "exprs": [str(e) for e in self.exprs], "single_use": self.single_use}

    @staticmethod
    def from_json(d: dict) -> "ParamSpec":
        from .circuit import parse_angle

        return ParamSpec(int(d["m"]), tuple(parse_angle(e) for e in d["exprs"]), bool(d["single_use"]))


def enumerate_single_gate_circuits(gs: GateSet, sigma: ParamSpec, q: int) -> list[tuple[Gate, tuple[LinComb, ...], tuple[int, ...]]]:
    """Every ``(gate, args, qubits)`` placement over ``q`` qubits, in the fixed order.

    Order: parametric gates before parameterless ones (each group in
    gate-set order), then argument tuples (lexicographic in the expression
    order of ``sigma``), then qubit tuples (lexicographic).
    Argument tuples reusing a parameter are skipped when ``sigma.single_use``.
    """
    if q < 1:
        raise ValueError("q must be >= 1")
    out = []
    for g in sorted(gs.gates, key=lambda g: g.param_arity == 0):
        if g.qubit_arity > q:
            continue
        arg_tuples = []
        for combo in itertools.product(sigma.exprs, repeat=g.param_arity):
            if sigma.single_use:
                used: set[int] = set()
                ok = True
                for e in combo:
                    if used & e.params():
                        ok = False
                        break
                    used |= e.params()
                if not ok:
                    continue
            arg_tuples.append(combo)
        qubit_tuples = list(itertools.permutations(range(q), g.qubit_arity))
        for args in arg_tuples:
            for qs in qubit_tuples:
                out.append((g, tuple(args), tuple(qs)))
    return out
