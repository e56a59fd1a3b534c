"""Circuit representations: instruction sequences and DAGs.

The sequence text form follows the usual notation, one instruction per
``;``-separated item: gate name, parameter expressions, then qubit indices::

    rz p0+p1 0; h 1; cx 1 2
"""

from __future__ import annotations

import ast
import hashlib
import heapq
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .gatedef import GATES, Gate, GateSet, ParamSpec, enumerate_single_gate_circuits
from .symexpr import LinComb, SymMatrix, embed, matmul


class CircuitError(ValueError):
    pass


def parse_angle(text: str) -> LinComb:
    """Parse ``p0``, ``2*p0``, ``p0+p1``, ``-pi/4``, ``0.25`` ... into a :class:`LinComb`."""
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError:
        raise CircuitError(f"malformed angle {text!r}") from None

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
            return Fraction(node.value) if isinstance(node.value, int) else float(node.value)
        if isinstance(node, ast.Name):
            if node.id == "pi":
                return LinComb.const_pi(1)
            if node.id.startswith("p") and node.id[1:].isdigit():
                return LinComb.param(int(node.id[1:]))
            raise CircuitError(f"unknown name {node.id!r} in angle {text!r}")
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return v if isinstance(node.op, ast.UAdd) else -v
        if isinstance(node, ast.BinOp):
            x, y = ev(node.left), ev(node.right)
            if isinstance(node.op, (ast.Add, ast.Sub)):
                x, y = _as_lin(x), _as_lin(y)
                return x + y if isinstance(node.op, ast.Add) else x - y
            if isinstance(node.op, ast.Mult):
                if isinstance(x, LinComb) and not isinstance(y, LinComb):
                    return _scale(x, y)
                if isinstance(y, LinComb) and not isinstance(x, LinComb):
                    return _scale(y, x)
                if not isinstance(x, LinComb) and not isinstance(y, LinComb):
                    return x * y
            if isinstance(node.op, ast.Div) and not isinstance(y, LinComb):
                if isinstance(x, LinComb):
                    return _scale(x, 1 / Fraction(y) if isinstance(y, Fraction) else 1.0 / y)
                return Fraction(x) / y if isinstance(x, Fraction) and isinstance(y, Fraction) else x / y
        raise CircuitError(f"unsupported angle syntax {text!r}")

    return _as_lin(ev(tree))


def _as_lin(v) -> LinComb:
    if isinstance(v, LinComb):
        return v
    if isinstance(v, Fraction):
        if v == 0:
            return LinComb()
        return LinComb.const_float(float(v))
    return LinComb.const_float(float(v))


def _scale(lc: LinComb, k) -> LinComb:
    if isinstance(k, Fraction):
        return lc.scale(k)
    if lc.is_constant() and lc.is_exact():
        return LinComb.const_float(lc.eval() * k)
    raise CircuitError("symbolic angles only take rational coefficients")


@dataclass(frozen=True)
class Instruction:
    gate: Gate
    args: tuple[LinComb, ...]
    qubits: tuple[int, ...]

    def __post_init__(self):
        if len(self.qubits) != self.gate.qubit_arity:
            raise CircuitError(f"{self.gate.name} acts on {self.gate.qubit_arity} qubit(s), got {self.qubits}")
        if len(self.args) != self.gate.param_arity:
            raise CircuitError(f"{self.gate.name} takes {self.gate.param_arity} parameter(s), got {len(self.args)}")
        if len(set(self.qubits)) != len(self.qubits):
            raise CircuitError(f"repeated qubit in {self.qubits}")

    @property
    def name(self) -> str:
        return self.gate.name

    def params(self) -> frozenset[int]:
        out: frozenset[int] = frozenset()
        for a in self.args:
            out |= a.params()
        return out

    def is_symbolic(self) -> bool:
        return any(not a.is_constant() for a in self.args)

    def remap(self, qubit_map: Sequence[int] | dict, param_map: dict[int, LinComb] | None = None) -> "Instruction":
        args = self.args
        if param_map is not None:
            args = tuple(a.substitute(param_map) for a in args)
        return Instruction(self.gate, args, tuple(qubit_map[k] for k in self.qubits))

    def text(self) -> str:
        return " ".join([self.gate.name, *(str(a) for a in self.args), *(str(k) for k in self.qubits)])

    def __str__(self):
        return self.text()


def instr(name: str, *rest, gates: dict[str, Gate] | None = None) -> Instruction:
    """Convenience constructor: ``instr("rz", "p0", 1)`` or ``instr("cx", 0, 1)``."""
    gate = (gates or GATES)[name]
    args = tuple(a if isinstance(a, LinComb) else parse_angle(str(a)) for a in rest[: gate.param_arity])
    return Instruction(gate, args, tuple(int(k) for k in rest[gate.param_arity :]))


@dataclass(frozen=True)
class Circuit:
    """Gate sequence over ``q`` qubits and ``m`` symbolic parameters."""

    q: int
    m: int = 0
    instrs: tuple[Instruction, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "instrs", tuple(self.instrs))
        for ins in self.instrs:
            if any(k >= self.q or k < 0 for k in ins.qubits):
                raise CircuitError(f"qubit index out of range in {ins} (q={self.q})")
            if any(i >= self.m for i in ins.params()):
                raise CircuitError(f"parameter index out of range in {ins} (m={self.m})")

    def __len__(self) -> int:
        return len(self.instrs)

    def __iter__(self):
        return iter(self.instrs)

    def gate_count(self) -> int:
        return len(self.instrs)

    def append(self, ins: Instruction) -> "Circuit":
        return Circuit(self.q, self.m, self.instrs + (ins,))

    def extend(self, instrs: Iterable[Instruction]) -> "Circuit":
        return Circuit(self.q, self.m, self.instrs + tuple(instrs))

    def with_instrs(self, instrs: Iterable[Instruction]) -> "Circuit":
        return Circuit(self.q, self.m, tuple(instrs))

    def params_used(self) -> frozenset[int]:
        out: frozenset[int] = frozenset()
        for ins in self.instrs:
            out |= ins.params()
        return out

    def qubits_used(self) -> frozenset[int]:
        return frozenset(k for ins in self.instrs for k in ins.qubits)

    def is_symbolic(self) -> bool:
        return any(ins.is_symbolic() for ins in self.instrs)

    def satisfies_single_use(self) -> bool:
        seen: set[int] = set()
        for ins in self.instrs:
            for a in ins.args:
                if seen & a.params():
                    return False
                seen |= a.params()
        return True

    def text(self) -> str:
        return "; ".join(ins.text() for ins in self.instrs)

    def __str__(self):
        return self.text() or "()"

    def gate_names(self) -> list[str]:
        return [ins.name for ins in self.instrs]


def parse_circuit(text: str, q: int, m: int = 0, gates: dict[str, Gate] | GateSet | None = None) -> Circuit:
    """Inverse of :meth:`Circuit.text`."""
    if isinstance(gates, GateSet):
        table = {g.name: g for g in gates.gates}
    else:
        table = gates or GATES
    out = []
    text = text.strip()
    if text in ("", "()"):
        return Circuit(q, m, ())
    for item in text.split(";"):
        toks = item.split()
        if not toks:
            continue
        if toks[0] not in table:
            raise CircuitError(f"unknown gate {toks[0]!r}")
        g = table[toks[0]]
        if len(toks) != 1 + g.param_arity + g.qubit_arity:
            raise CircuitError(f"wrong operand count in {item.strip()!r}")
        args = tuple(parse_angle(t) for t in toks[1 : 1 + g.param_arity])
        qs = tuple(int(t) for t in toks[1 + g.param_arity :])
        out.append(Instruction(g, args, qs))
    return Circuit(q, m, tuple(out))


def drop_first(c: Circuit) -> Circuit:
    if not c.instrs:
        raise CircuitError("cannot drop a gate from the empty circuit")
    return Circuit(c.q, c.m, c.instrs[1:])


def drop_last(c: Circuit) -> Circuit:
    if not c.instrs:
        raise CircuitError("cannot drop a gate from the empty circuit")
    return Circuit(c.q, c.m, c.instrs[:-1])


# ---------------------------------------------------------------------------
# Precedence
# ---------------------------------------------------------------------------


class CircuitOrder:
    """The fixed total order on single-gate circuits, lifted to sequences.

    ``a`` precedes ``b`` when it has fewer gates, or the same number of gates
    and is lexicographically smaller instruction-by-instruction.
    """

    def __init__(self, gs: GateSet, sigma: ParamSpec, q: int):
        self.gs, self.sigma, self.q = gs, sigma, q
        self.placements = enumerate_single_gate_circuits(gs, sigma, q)
        self.instructions = [Instruction(g, args, qs) for g, args, qs in self.placements]
        self.rank = {ins: k for k, ins in enumerate(self.instructions)}

    def key(self, c: Circuit) -> tuple[int, tuple[int, ...]]:
        try:
            return (len(c), tuple(self.rank[ins] for ins in c.instrs))
        except KeyError as exc:
            raise CircuitError(f"instruction {exc.args[0]} is not a single-gate circuit of this order") from None

    def precedes(self, a: Circuit, b: Circuit) -> bool:
        return self.key(a) < self.key(b)


def precedes(a: Circuit, b: Circuit, order: CircuitOrder) -> bool:
    return order.precedes(a, b)


# ---------------------------------------------------------------------------
# DAG form
# ---------------------------------------------------------------------------

SOURCE = -1  # placeholder node id for a wire's source / sink


class CircuitDag:
    """Gate DAG: one vertex per gate plus implicit per-qubit source and sink.

    ``pred[v][k]`` is the vertex feeding port ``k`` of gate ``v`` (``-1`` for
    the wire source); ``succ[v][k]`` the vertex consuming it (``-1`` for the
    sink).  Port ``k`` of a gate carries qubit ``instrs[v].qubits[k]``, so the
    edge label is the port index (control/target for CNOT).
    """

    __slots__ = ("q", "m", "instrs", "pred", "succ", "first", "last")

    def __init__(self, q: int, m: int, instrs: Sequence[Instruction]):
        self.q, self.m = q, m
        self.instrs = tuple(instrs)
        n = len(self.instrs)
        last = [SOURCE] * q
        pred = [None] * n
        succ = [[SOURCE] * ins.gate.qubit_arity for ins in self.instrs]
        first = [SOURCE] * q
        for v, ins in enumerate(self.instrs):
            ps = []
            for port, w in enumerate(ins.qubits):
                u = last[w]
                ps.append(u)
                if u == SOURCE:
                    first[w] = v
                else:
                    succ[u][self.instrs[u].qubits.index(w)] = v
                last[w] = v
            pred[v] = tuple(ps)
        self.pred = tuple(pred)
        self.succ = tuple(tuple(s) for s in succ)
        self.first = tuple(first)
        self.last = tuple(last)

    def __len__(self):
        return len(self.instrs)

    def num_vertices(self) -> int:
        return len(self.instrs) + 2 * self.q

    def edges(self) -> list[tuple[tuple, tuple, int]]:
        """Labelled edges ``(from, to, qubit)``; endpoints are ``("gate", v, port)``,
        ``("src", w)`` or ``("sink", w)``."""
        out = []
        for w in range(self.q):
            if self.first[w] == SOURCE:
                out.append((("src", w), ("sink", w), w))
        for v, ins in enumerate(self.instrs):
            for port, w in enumerate(ins.qubits):
                u = self.pred[v][port]
                src = ("src", w) if u == SOURCE else ("gate", u, self.instrs[u].qubits.index(w))
                out.append((src, ("gate", v, port), w))
                if self.succ[v][port] == SOURCE:
                    out.append((("gate", v, port), ("sink", w), w))
        return out

    def is_first(self, v: int) -> bool:
        """All inputs come straight from sources."""
        return all(u == SOURCE for u in self.pred[v])

    def is_last(self, v: int) -> bool:
        return all(u == SOURCE for u in self.succ[v])


def to_dag(c: Circuit) -> CircuitDag:
    return CircuitDag(c.q, c.m, c.instrs)


def canonical_order(instrs: Sequence[Instruction], q: int) -> list[int]:
    """Indices of ``instrs`` in canonical topological order.

    Repeatedly emits the ready gate touching the smallest qubit index.  Two
    ready gates never share a qubit, so the choice is always unique and the
    result depends only on the DAG, not on the input sequence.
    """
    heads: list[list[int]] = [[] for _ in range(q)]
    for v, ins in enumerate(instrs):
        for w in ins.qubits:
            heads[w].append(v)
    pos = [0] * q
    need = [len(ins.qubits) for ins in instrs]
    at_head = [0] * len(instrs)
    ready: list[tuple[int, int]] = []

    def touch(w: int):
        if pos[w] < len(heads[w]):
            v = heads[w][pos[w]]
            at_head[v] += 1
            if at_head[v] == need[v]:
                heapq.heappush(ready, (min(instrs[v].qubits), v))

    for w in range(q):
        touch(w)
    order = []
    while ready:
        _, v = heapq.heappop(ready)
        order.append(v)
        for w in instrs[v].qubits:
            pos[w] += 1
            touch(w)
    if len(order) != len(instrs):
        raise CircuitError("instruction sequence is not acyclic")
    return order


def from_dag(d: CircuitDag) -> Circuit:
    return Circuit(d.q, d.m, tuple(d.instrs[v] for v in canonical_order(d.instrs, d.q)))


def canonical_form(c: Circuit) -> Circuit:
    return Circuit(c.q, c.m, tuple(c.instrs[v] for v in canonical_order(c.instrs, c.q)))


def canonical_text(c: Circuit | CircuitDag) -> str:
    instrs = c.instrs
    return f"q={c.q};" + "; ".join(instrs[v].text() for v in canonical_order(instrs, c.q))


def canonical_hash(c: Circuit | CircuitDag) -> int:
    """64-bit key, equal for all sequences of the same DAG."""
    digest = hashlib.blake2b(canonical_text(c).encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def dag_isomorphic(a: CircuitDag, b: CircuitDag) -> bool:
    """Label-preserving isomorphism with fixed wires (sources map to same-index sources)."""
    return a.q == b.q and canonical_text(a) == canonical_text(b)


# ---------------------------------------------------------------------------
# Semantics
# ---------------------------------------------------------------------------


def circuit_matrix(c: Circuit) -> SymMatrix:
    """Symbolic ``2^q x 2^q`` matrix; gates compose right-to-left in sequence order."""
    m = SymMatrix.identity(1 << c.q)
    for ins in c.instrs:
        m = matmul(embed(ins.gate.matrix(ins.args), ins.qubits, c.q), m)
    return m


def relabel(c: Circuit, qubit_map: Sequence[int] | dict, param_map: dict[int, LinComb] | None = None, q: int | None = None, m: int | None = None) -> Circuit:
    return Circuit(
        c.q if q is None else q,
        c.m if m is None else m,
        tuple(ins.remap(qubit_map, param_map) for ins in c.instrs),
    )
