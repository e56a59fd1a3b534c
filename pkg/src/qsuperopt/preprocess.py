"""Passes run before the optimizer: transpilation, Toffoli decomposition,
rotation merging and the Rigetti lowering.

Rotation merging tracks, for every wire, the affine Boolean function of
path variables it carries (a bit mask plus a constant bit).  X flips the
constant, CNOT adds the control's function into the target, and any other
non-rotation gate gives its wires fresh variables.  Two Rz (or U1) gates
seeing the same function contribute phases that depend on the same Boolean
value of the path, so their angles can be summed at the earlier site.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Callable, Sequence

from .circuit import Circuit, Instruction
from .gatedef import GATES, GateSet, builtin_gate_set
from .symexpr import LinComb

PASSES = ("transpile", "toffoli", "merge", "cancel", "rigetti")
DEFAULT_PASSES = ("transpile", "toffoli", "merge", "cancel")


class PreprocessError(ValueError):
    pass


def _pi(k) -> LinComb:
    return LinComb((), Fraction(k))


def _g(name: str, qubits: Sequence[int], *args: LinComb) -> Instruction:
    return Instruction(GATES[name], tuple(args), tuple(qubits))


# ---------------------------------------------------------------------------
# Transpilation
# ---------------------------------------------------------------------------

_Rule = Callable[[Instruction], list[Instruction]]

_TO_NAM: dict[str, _Rule] = {
    "t": lambda i: [_g("rz", i.qubits, _pi(Fraction(1, 4)))],
    "tdg": lambda i: [_g("rz", i.qubits, _pi(Fraction(-1, 4)))],
    "s": lambda i: [_g("rz", i.qubits, _pi(Fraction(1, 2)))],
    "sdg": lambda i: [_g("rz", i.qubits, _pi(Fraction(-1, 2)))],
    "u1": lambda i: [_g("rz", i.qubits, i.args[0])],
    "cz": lambda i: [_g("h", i.qubits[1:]), _g("cx", i.qubits), _g("h", i.qubits[1:])],
}

_TO_IBM: dict[str, _Rule] = {
    "h": lambda i: [_g("u2", i.qubits, LinComb(), _pi(1))],
    "x": lambda i: [_g("u3", i.qubits, _pi(1), LinComb(), _pi(1))],
    "rz": lambda i: [_g("u1", i.qubits, i.args[0])],
}


def _h_rigetti(i: Instruction) -> list[Instruction]:
    # H = Rx(pi) Rz(pi/2) Rx(pi/2) Rz(-pi/2) up to phase; circuit order is right to left
    w = i.qubits
    return [_g("rz", w, _pi(Fraction(-1, 2))), _g("rx90", w), _g("rz", w, _pi(Fraction(1, 2))), _g("x", w)]


_TO_RIGETTI: dict[str, _Rule] = {
    "h": _h_rigetti,
    "cx": lambda i: _h_rigetti(_g("h", i.qubits[1:])) + [_g("cz", i.qubits)] + _h_rigetti(_g("h", i.qubits[1:])),
}

_RULES = {"nam": _TO_NAM, "ibm": _TO_IBM, "rigetti": _TO_RIGETTI}


def transpile(c: Circuit, to: GateSet | str) -> Circuit:
    """Rewrite every gate outside ``to`` with the built-in per-gate rules.

    Rules chain through the Nam set (e.g. ``t`` becomes ``rz`` and then
    ``u1`` for IBM).  CCX/CCZ are left for :func:`decompose_toffoli`.
    """
    gs = builtin_gate_set(to) if isinstance(to, str) else to
    names = set(gs.names()) | {"ccx", "ccz"}
    chain = [_RULES["nam"]] + ([_RULES[gs.name]] if gs.name in _RULES and gs.name != "nam" else [])
    out: list[Instruction] = []

    def emit(ins: Instruction, depth: int):
        if ins.name in names:
            out.append(ins)
            return
        for table in chain[depth:]:
            if ins.name in table:
                for sub in table[ins.name](ins):
                    emit(sub, chain.index(table))
                return
        raise PreprocessError(f"no rule to rewrite gate {ins.name!r} into gate set {gs.name}")

    for ins in c.instrs:
        emit(ins, 0)
    return Circuit(c.q, c.m, tuple(out))


# ---------------------------------------------------------------------------
# Toffoli decomposition
# ---------------------------------------------------------------------------


def toffoli_gates(a: int, b: int, t: int, polarity: int = 0, basis: str = "nam") -> list[Instruction]:
    """The 15-gate Clifford+T Toffoli; polarity 1 is its inverse (T and T-dagger swapped, order reversed)."""
    if basis == "nam":
        T = lambda w: _g("rz", (w,), _pi(Fraction(1, 4)))  # noqa: E731
        Td = lambda w: _g("rz", (w,), _pi(Fraction(-1, 4)))  # noqa: E731
    elif basis == "clifford_t":
        T = lambda w: _g("t", (w,))  # noqa: E731
        Td = lambda w: _g("tdg", (w,))  # noqa: E731
    else:
        raise PreprocessError(f"unknown Toffoli basis {basis!r}")
    H = lambda w: _g("h", (w,))  # noqa: E731
    CX = lambda c, x: _g("cx", (c, x))  # noqa: E731
    seq = [
        (H, t), (CX, b, t), (Td, t), (CX, a, t), (T, t), (CX, b, t), (Td, t), (CX, a, t),
        (T, b), (T, t), (H, t), (CX, a, b), (T, a), (Td, b), (CX, a, b),
    ]
    if polarity:
        swap = {T: Td, Td: T}
        seq = [(swap.get(f, f), *w) for f, *w in reversed(seq)]
    return [f(*w) for f, *w in seq]


def _expand(ins: Instruction, polarity: int, basis: str) -> list[Instruction]:
    a, b, t = ins.qubits
    body = toffoli_gates(a, b, t, polarity, basis)
    if ins.name == "ccz":
        body = [_g("h", (t,))] + body + [_g("h", (t,))]
    return body


def decompose_toffoli(c: Circuit, basis: str = "nam", greedy: bool = True) -> Circuit:
    """Expand every CCX/CCZ, left to right, choosing each polarity greedily.

    For each Toffoli both polarities are tried on the whole circuit (later
    Toffolis still unexpanded) and the one giving fewer gates after
    :func:`merge_and_cancel` wins; ties keep polarity 0.
    """
    instrs = list(c.instrs)
    k = 0
    while k < len(instrs):
        ins = instrs[k]
        if ins.name not in ("ccx", "ccz"):
            k += 1
            continue
        best = None
        for pol in (0, 1) if greedy else (0,):
            body = _expand(ins, pol, basis)
            trial = instrs[:k] + body + instrs[k + 1 :]
            score = len(merge_and_cancel(Circuit(c.q, c.m, tuple(trial)))) if greedy else 0
            if best is None or score < best[0]:
                best = (score, trial, len(body))
        instrs = best[1]
        k += best[2]
    return Circuit(c.q, c.m, tuple(instrs))


# ---------------------------------------------------------------------------
# Rotation merging
# ---------------------------------------------------------------------------

_ROTATIONS = ("rz", "u1")


def _is_zero_angle(a: LinComb) -> bool:
    return a.is_constant() and abs(math.remainder(a.eval(), 2 * math.pi)) < 1e-12


def _reduce(a: LinComb) -> LinComb:
    """Constant angle into (-pi, pi]."""
    if not a.is_constant():
        return a
    if a.offset:
        return LinComb.const_float(math.remainder(a.eval(), 2 * math.pi))
    p = a.pi - 2 * math.floor((a.pi + 1) / 2)
    if p == -1:
        p = Fraction(1)
    return LinComb((), p)


def merge_rotations(c: Circuit) -> Circuit:
    """Merge Rz/U1 gates acting on equal affine functions; drop zero rotations."""
    nxt = c.q
    func = [(1 << w, 0) for w in range(c.q)]  # (variable mask, constant bit)
    site: dict[tuple[int, int], int] = {}
    out: list[Instruction | None] = []
    for ins in c.instrs:
        name = ins.name
        if name == "x":
            (w,) = ins.qubits
            m, k = func[w]
            func[w] = (m, k ^ 1)
            out.append(ins)
        elif name == "cx":
            a, t = ins.qubits
            func[t] = (func[t][0] ^ func[a][0], func[t][1] ^ func[a][1])
            out.append(ins)
        elif name in _ROTATIONS and ins.args[0].is_constant():
            key = func[ins.qubits[0]]
            j = site.get(key)
            if j is not None and out[j] is not None and out[j].name == name:
                prev = out[j]
                out[j] = Instruction(prev.gate, (prev.args[0] + ins.args[0],), prev.qubits)
            else:
                site[key] = len(out)
                out.append(ins)
        else:
            for w in ins.qubits:
                func[w] = (1 << nxt, 0)
                nxt += 1
            out.append(ins)
    kept = []
    for ins in out:
        if ins is None:
            continue
        if ins.name in _ROTATIONS and ins.args[0].is_constant():
            if _is_zero_angle(ins.args[0]):
                continue
            ins = Instruction(ins.gate, (_reduce(ins.args[0]),), ins.qubits)
        kept.append(ins)
    return Circuit(c.q, c.m, tuple(kept))


# ---------------------------------------------------------------------------
# Cancellation and the Rigetti pipeline
# ---------------------------------------------------------------------------


def cancel_adjacent(c: Circuit, names: Sequence[str] = ("h", "cz", "cx", "x")) -> Circuit:
    """Remove pairs of identical self-inverse gates that are adjacent on all their wires."""
    sym = {"cz"}
    out: list[Instruction | None] = []
    stacks: list[list[int]] = [[] for _ in range(c.q)]
    for ins in c.instrs:
        ws = ins.qubits
        tops = {stacks[w][-1] if stacks[w] else -1 for w in ws}
        if ins.name in names and len(tops) == 1:
            j = tops.pop()
            prev = out[j] if j >= 0 else None
            same = prev is not None and prev.name == ins.name and (
                prev.qubits == ws or (ins.name in sym and set(prev.qubits) == set(ws))
            )
            if same:
                out[j] = None
                for w in ws:
                    stacks[w].pop()
                continue
        for w in ws:
            stacks[w].append(len(out))
        out.append(ins)
    return Circuit(c.q, c.m, tuple(i for i in out if i is not None))


def merge_and_cancel(c: Circuit) -> Circuit:
    """Alternate rotation merging and pair cancellation until neither shrinks the circuit."""
    while True:
        n = len(c)
        c = cancel_adjacent(merge_rotations(c))
        if len(c) == n:
            return c


def rigetti_pipeline(c_nam: Circuit) -> Circuit:
    """CNOT -> H CZ H, cancel H and CZ pairs, then lower X and H into the Rigetti set."""
    step = []
    for ins in c_nam.instrs:
        if ins.name == "cx":
            t = ins.qubits[1:]
            step += [_g("h", t), _g("cz", ins.qubits), _g("h", t)]
        else:
            step.append(ins)
    c = cancel_adjacent(Circuit(c_nam.q, c_nam.m, tuple(step)), names=("h", "cz"))
    out = []
    for ins in c.instrs:
        if ins.name == "h":
            out += _h_rigetti(ins)
        elif ins.name in ("x", "rz", "cz"):
            out.append(ins)
        else:
            raise PreprocessError(f"rigetti pipeline expects Nam gates, got {ins.name!r}")
    return Circuit(c.q, c.m, tuple(out))


def preprocess(c: Circuit, gate_set: str = "nam", passes: Sequence[str] = DEFAULT_PASSES) -> Circuit:
    """Run ``passes`` in the canonical order ``transpile, toffoli, merge, cancel, rigetti``.

    ``cancel`` alternates merging with removal of adjacent self-inverse pairs.
    """
    for p in passes:
        if p not in PASSES:
            raise PreprocessError(f"unknown pass {p!r}; choose from {PASSES}")
    target = "nam" if gate_set == "rigetti" else gate_set
    if "transpile" in passes:
        c = transpile(c, target)
    if "toffoli" in passes:
        c = decompose_toffoli(c)
        if target != "nam":
            c = transpile(c, target)
    if "merge" in passes:
        c = merge_rotations(c)
    if "cancel" in passes:
        c = merge_and_cancel(c) if "merge" in passes else cancel_adjacent(c)
    if "rigetti" in passes or (gate_set == "rigetti" and "transpile" in passes):
        c = rigetti_pipeline(c)
    return c


__all__ = [
    "PASSES",
    "PreprocessError",
    "transpile",
    "toffoli_gates",
    "decompose_toffoli",
    "merge_rotations",
    "cancel_adjacent",
    "merge_and_cancel",
    "DEFAULT_PASSES",
    "rigetti_pipeline",
    "preprocess",
]
