"""SMT-LIB 2 script construction and a persistent external solver process."""

from __future__ import annotations

import os
import select
import shutil
import subprocess
import time
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from .symexpr import Coef

SOLVER_ENV = "QSUPEROPT_SOLVER"


class SolverConfigError(RuntimeError):
    """Solver binary missing or the process broke protocol."""


@dataclass(frozen=True)
class SolverConfig:
    path: str | None = None
    timeout_s: float = 30.0
    logic: str = "QF_NRA"
    dump_dir: str | None = None

    def resolve_path(self) -> str:
        cand = self.path or os.environ.get(SOLVER_ENV) or shutil.which("z3")
        if not cand or not (os.path.isfile(cand) and os.access(cand, os.X_OK)):
            found = shutil.which(cand) if cand else None
            if not found:
                raise SolverConfigError(
                    f"SMT solver not found (tried {cand!r}); install z3 or set ${SOLVER_ENV}"
                )
            cand = found
        return cand


def _num(x: Fraction) -> str:
    if x < 0:
        return f"(- {_num(-x)})"
    if x.denominator == 1:
        return f"{x.numerator}.0"
    return f"(/ {x.numerator}.0 {x.denominator}.0)"


def real_coef_term(c: Coef) -> str:
    """Real element ``a + b*sqrt(2)`` of a coefficient with zero imaginary part."""
    parts = []
    if c.a:
        parts.append(_num(c.a))
    if c.b:
        parts.append(f"(* {_num(c.b)} r2)")
    if not parts:
        return "0.0"
    return parts[0] if len(parts) == 1 else f"(+ {' '.join(parts)})"


def poly_term(poly: dict, names: Sequence[str]) -> str:
    """Real polynomial (monomial tuple -> real Coef) as an SMT-LIB term."""
    terms = []
    for mono, c in sorted(poly.items()):
        factors = [real_coef_term(c)]
        for name, power in zip(names, mono):
            factors += [name] * power
        terms.append(factors[0] if len(factors) == 1 else f"(* {' '.join(factors)})")
    if not terms:
        return "0.0"
    return terms[0] if len(terms) == 1 else f"(+ {' '.join(terms)})"


def build_script(
    names: Sequence[str],
    trig_pairs: Sequence[tuple[str, str]],
    residuals: Sequence[dict],
    logic: str = "QF_NRA",
    uses_sqrt2: bool = True,
) -> str:
    """Satisfiable iff some residual polynomial can be nonzero on the trig circles."""
    lines = [f"(set-logic {logic})"]
    for n in names:
        lines.append(f"(declare-fun {n} () Real)")
    if uses_sqrt2:
        lines.append("(declare-fun r2 () Real)")
        lines.append("(assert (= (* r2 r2) 2.0))")
        lines.append("(assert (> r2 0.0))")
    for s, c in trig_pairs:
        lines.append(f"(assert (= (+ (* {s} {s}) (* {c} {c})) 1.0))")
    diseq = [f"(not (= {poly_term(r, names)} 0.0))" for r in residuals]
    if not diseq:
        lines.append("(assert false)")
    elif len(diseq) == 1:
        lines.append(f"(assert {diseq[0]})")
    else:
        lines.append("(assert (or")
        lines += ["  " + d for d in diseq]
        lines.append("))")
    return "\n".join(lines) + "\n"


def _sexpr(text: str):
    """Parse one s-expression into nested lists of atoms."""
    toks = text.replace("(", " ( ").replace(")", " ) ").split()
    stack: list[list] = [[]]
    for t in toks:
        if t == "(":
            stack.append([])
        elif t == ")":
            done = stack.pop()
            stack[-1].append(done)
        else:
            stack[-1].append(t)
    return stack[0][0] if stack[0] else []


def _value(node) -> float:
    if isinstance(node, str):
        return float(node.rstrip("?"))
    head, *rest = node
    if head == "-":
        return -_value(rest[0]) if len(rest) == 1 else _value(rest[0]) - _value(rest[1])
    if head == "/":
        return _value(rest[0]) / _value(rest[1])
    raise ValueError(f"cannot read model value {node!r}")


def parse_model(text: str) -> dict[str, float]:
    out = {}
    for entry in _sexpr(text):
        if isinstance(entry, list) and len(entry) == 2 and isinstance(entry[0], str):
            try:
                out[entry[0]] = _value(entry[1])
            except (ValueError, IndexError):
                pass
    return out


class SolverProcess:
    """One long-lived ``z3 -in`` process, reset between queries."""

    def __init__(self, cfg: SolverConfig):
        self.cfg = cfg
        self.path = cfg.resolve_path()
        self.proc: subprocess.Popen | None = None
        self.queries = 0

    def _start(self):
        try:
            self.proc = subprocess.Popen(
                [self.path, "-in", "-smt2"],
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.STDOUT,
                bufsize=0,
            )
            self._buf = b""
        except OSError as exc:
            raise SolverConfigError(f"cannot start solver {self.path}: {exc}") from exc

    def close(self):
        if getattr(self, "proc", None) is not None:
            try:
                self.proc.kill()
                self.proc.wait(timeout=5)
            except Exception:
                pass
            self.proc = None

    def __del__(self):
        self.close()

    def _send(self, text: str):
        assert self.proc is not None and self.proc.stdin is not None
        try:
            self.proc.stdin.write(text.encode())
        except BrokenPipeError as exc:
            raise SolverConfigError("solver process exited unexpectedly") from exc

    def _readline(self, deadline: float) -> str | None:
        assert self.proc is not None and self.proc.stdout is not None
        fd = self.proc.stdout.fileno()
        while b"\n" not in self._buf:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                return None
            ready, _, _ = select.select([fd], [], [], remaining)
            if not ready:
                return None
            chunk = os.read(fd, 65536)
            if not chunk:
                raise SolverConfigError("solver process closed its output")
            self._buf += chunk
        line, self._buf = self._buf.split(b"\n", 1)
        return line.decode().strip()

    def check(self, script: str, want_model: Sequence[str] = ()) -> tuple[str, dict[str, float]]:
        """Run ``script``; returns (``sat``|``unsat``|``unknown``|``timeout``, model)."""
        if self.proc is None or self.proc.poll() is not None:
            self._start()
        self.queries += 1
        ms = int(self.cfg.timeout_s * 1000)
        self._send(f"(reset)\n(set-option :timeout {ms})\n(set-option :pp.decimal true)\n{script}(check-sat)\n")
        deadline = time.monotonic() + self.cfg.timeout_s + 5.0
        line = self._readline(deadline)
        while line is not None and line == "":
            line = self._readline(deadline)
        if line is None:
            self.close()
            return "timeout", {}
        if line not in ("sat", "unsat", "unknown"):
            self.close()
            raise SolverConfigError(f"unexpected solver output: {line!r}")
        model: dict[str, float] = {}
        if line == "sat" and want_model:
            self._send(f"(get-value ({' '.join(want_model)}))\n")
            buf = ""
            while buf.count("(") == 0 or buf.count("(") != buf.count(")"):
                nxt = self._readline(deadline)
                if nxt is None:
                    self.close()
                    return "sat", {}
                buf += " " + nxt
            model = parse_model(buf)
        return line, model


def dump_script(cfg: SolverConfig, tag: str, script: str) -> Path | None:
    if not cfg.dump_dir:
        return None
    d = Path(cfg.dump_dir)
    d.mkdir(parents=True, exist_ok=True)
    p = d / f"{tag}.smt2"
    p.write_text(script + "(check-sat)\n")
    return p
