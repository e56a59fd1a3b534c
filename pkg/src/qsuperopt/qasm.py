"""A small OpenQASM 2.0 subset: one ``qreg``, the built-in gates, ccx/ccz.

Grammar (statements end in ``;``; ``//`` comments are ignored)::

    OPENQASM 2.0;
    include "qelib1.inc";
    qreg NAME[N];
    creg NAME[N];                 (accepted and ignored)
    GATE[(ANGLE, ...)] NAME[i], NAME[j], ...;

Angles are rational multiples of ``pi`` (``pi/4``, ``-3*pi/4``) or
decimals.  ``cnot`` is read as ``cx``; ``rx(pi/2)``, ``rx(-pi/2)`` and
``rx(pi)`` are read as ``rx90``, ``rxm90`` and ``x``; ``u`` and ``p`` as
``u3`` and ``u1``.
"""

from __future__ import annotations

import math
import re

from .circuit import Circuit, CircuitError, Instruction, parse_angle
from .gatedef import GATES, Gate, GateSet
from .symexpr import LinComb


class QasmError(CircuitError):
    def __init__(self, msg: str, line: int, col: int):
        super().__init__(f"line {line}, column {col}: {msg}")
        self.line = line
        self.col = col


_ALIASES = {"cnot": "cx", "u": "u3", "p": "u1"}
_STMT = re.compile(r"[^;]*;", re.S)
_CALL = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*(?:\((.*)\))?\s*(.*?)\s*;\s*$", re.S)
_QARG = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*\[\s*(\d+)\s*\]\s*$")


def _strip_comments(text: str) -> str:
    return re.sub(r"//[^\n]*", lambda m: " " * len(m.group()), text)


def _pos(text: str, offset: int) -> tuple[int, int]:
    line = text.count("\n", 0, offset) + 1
    col = offset - (text.rfind("\n", 0, offset) + 1) + 1
    return line, col


def _rx_alias(angle: LinComb) -> str | None:
    v = math.remainder(angle.eval(), 2 * math.pi)
    for name, ref in (("rx90", math.pi / 2), ("rxm90", -math.pi / 2), ("x", math.pi)):
        if abs(math.remainder(v - ref, 2 * math.pi)) < 1e-12:
            return name
    return None


def parse_qasm(text: str, gates: GateSet | dict[str, Gate] | None = None) -> Circuit:
    """Parse ``text``; ``gates`` restricts the accepted gates (ccx/ccz always allowed)."""
    if isinstance(gates, GateSet):
        table = {g.name: g for g in gates.gates}
        table.setdefault("ccx", GATES["ccx"])
        table.setdefault("ccz", GATES["ccz"])
    else:
        table = dict(gates or GATES)
    clean = _strip_comments(text)
    reg: str | None = None
    nq = 0
    out: list[Instruction] = []
    end = 0
    for m in _STMT.finditer(clean):
        stmt = m.group()
        lead = len(stmt) - len(stmt.lstrip())
        here = _pos(clean, m.start() + lead)
        end = m.end()
        body = stmt.strip()
        if body.startswith("OPENQASM"):
            if not re.fullmatch(r"OPENQASM\s+2(\.0)?\s*;", body):
                raise QasmError("only OPENQASM 2.0 is supported", *here)
            continue
        if body.startswith("include"):
            continue
        if body.startswith(("creg", "barrier", "measure")):
            continue
        if body.startswith("qreg"):
            mm = re.fullmatch(r"qreg\s+([A-Za-z_][A-Za-z0-9_]*)\s*\[\s*(\d+)\s*\]\s*;", body)
            if not mm:
                raise QasmError("malformed qreg declaration", *here)
            if reg is not None:
                raise QasmError("only one qreg is supported", *here)
            reg, nq = mm.group(1), int(mm.group(2))
            continue
        call = _CALL.match(body)
        if not call:
            raise QasmError(f"cannot parse statement {body!r}", *here)
        name, argtext, qtext = call.group(1), call.group(2), call.group(3)
        if reg is None:
            raise QasmError("gate before qreg declaration", *here)
        try:
            args = tuple(parse_angle(a) for a in argtext.split(",")) if argtext is not None and argtext.strip() else ()
        except CircuitError as exc:
            raise QasmError(str(exc), *here) from None
        if name == "rx" and len(args) == 1:
            alias = _rx_alias(args[0])
            if alias is None:
                raise QasmError(f"rx angle {args[0]} has no gate in the library", *here)
            name, args = alias, ()
        name = _ALIASES.get(name, name)
        if name not in table:
            raise QasmError(f"unsupported gate {name!r}", *here)
        g = table[name]
        qubits = []
        for qa in qtext.split(","):
            qm = _QARG.match(qa)
            if not qm:
                raise QasmError(f"malformed qubit argument {qa.strip()!r}", *here)
            if qm.group(1) != reg:
                raise QasmError(f"unknown register {qm.group(1)!r}", *here)
            k = int(qm.group(2))
            if k >= nq:
                raise QasmError(f"qubit index {k} out of range for {reg}[{nq}]", *here)
            qubits.append(k)
        try:
            out.append(Instruction(g, args, tuple(qubits)))
        except CircuitError as exc:
            raise QasmError(str(exc), *here) from None
    rest = clean[end:].strip()
    if rest:
        raise QasmError("statement missing ';'", *_pos(clean, clean.index(rest, end)))
    if reg is None:
        raise QasmError("no qreg declared", 1, 1)
    return Circuit(nq, 0, tuple(out))


def _angle_text(a: LinComb) -> str:
    if not a.is_constant():
        raise CircuitError("cannot emit a symbolic circuit as QASM")
    return str(a)


def emit_qasm(c: Circuit, reg: str = "q") -> str:
    lines = ["OPENQASM 2.0;", 'include "qelib1.inc";', f"qreg {reg}[{c.q}];"]
    for ins in c.instrs:
        qs = ", ".join(f"{reg}[{k}]" for k in ins.qubits)
        if ins.args:
            lines.append(f"{ins.name}({', '.join(_angle_text(a) for a in ins.args)}) {qs};")
        else:
            lines.append(f"{ins.name} {qs};")
    return "\n".join(lines) + "\n"


def read_qasm(path, gates: GateSet | None = None) -> Circuit:
    with open(path) as fh:
        return parse_qasm(fh.read(), gates)


def write_qasm(c: Circuit, path) -> None:
    with open(path, "w") as fh:
        fh.write(emit_qasm(c))
