"""Equivalence checking of symbolic circuits up to a global phase.

For a phase candidate ``beta(p) = a.p + b`` the claim
``forall p. [[c1]](p) = e^{i beta(p)} [[c2]](p)`` is reduced entrywise to
polynomial identities over ``s_t, c_t`` (one sine/cosine pair per atomic
angle ``t``).  Two independent routes decide it:

* ``algebraic``: reduce every residual modulo ``s_t^2 + c_t^2 - 1``.  For
  independent angles these generators form a Groebner basis of a prime
  ideal, so the reduced residual is zero exactly when the identity holds for
  all real parameters.
* ``smt``: assert the disjunction of nonzero residuals together with the
  circle constraints in QF_NRA and hand it to an external solver;
  ``unsat`` means verified, ``sat`` yields a counterexample.

``both`` runs the two and raises if they disagree (audit mode).
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .circuit import Circuit, Instruction
from .fingerprint import FingerprintContext, amplitude
from .smtlib import SolverConfig, SolverProcess, build_script, dump_script
from .statevector import unitary
from .symexpr import ONE, Coef, LinComb, PolyRing, UnsupportedExpression, _iter_lincombs, cos_var, half_angle_scales, sin_var

log = logging.getLogger(__name__)

VERIFIED = "verified"
REFUTED = "refuted"
INCONCLUSIVE = "inconclusive"

PHASE_COEFS = (-2, -1, 0, 1, 2)
PHASE_STEPS = 8  # b ranges over k*pi/4


class VerifierDisagreement(AssertionError):
    """The algebraic and SMT routes returned different verdicts."""


@dataclass(frozen=True)
class PhaseFactor:
    """``beta(p) = a.p + b_steps * pi/4``."""

    a: tuple[int, ...]
    b_steps: int = 0

    @property
    def b(self) -> float:
        return self.b_steps * math.pi / 4

    def angle(self) -> LinComb:
        return LinComb(((i, k) for i, k in enumerate(self.a) if k), Fraction(self.b_steps, 4))

    def eval(self, params: Sequence[float]) -> float:
        return sum(k * p for k, p in zip(self.a, params)) + self.b

    def is_constant(self) -> bool:
        return not any(self.a)

    def __str__(self):
        return str(self.angle())


@dataclass
class Verdict:
    status: str
    phase: PhaseFactor | None = None
    method: str = ""
    counterexample: tuple[float, ...] | None = None
    detail: str = ""

    @property
    def verified(self) -> bool:
        return self.status == VERIFIED


@dataclass
class VerifierStats:
    pairs: int = 0
    candidates_tried: int = 0
    algebraic_checks: int = 0
    smt_queries: int = 0
    smt_unknown: int = 0


def phase_candidates_order(m: int) -> list[PhaseFactor]:
    """``a = 0`` first (``b`` ascending), then nonzero ``a`` by L1 norm, then lexicographically."""
    zero = tuple([0] * m)
    out = [PhaseFactor(zero, b) for b in range(PHASE_STEPS)]
    rest = [a for a in itertools.product(PHASE_COEFS, repeat=m) if any(a)]
    rest.sort(key=lambda a: (sum(map(abs, a)), a))
    out += [PhaseFactor(a, b) for a in rest for b in range(PHASE_STEPS)]
    return out


def find_phase_candidates(
    c1: Circuit, c2: Circuit, ctx: FingerprintContext, tol: float = 1e-9, constant_only: bool = False
) -> list[PhaseFactor]:
    """Candidates ``(a, b)`` with ``<psi0|c1|psi1> = e^{i(a.p0+b)} <psi0|c2|psi1>`` within ``tol``."""
    v1, v2 = amplitude(c1, ctx), amplitude(c2, ctx)
    return _candidates_from_amplitudes(v1, v2, ctx, tol, constant_only)


def _candidates_from_amplitudes(v1: complex, v2: complex, ctx: FingerprintContext, tol: float, constant_only: bool):
    out = []
    for ph in phase_candidates_order(ctx.m):
        if constant_only and not ph.is_constant():
            break
        if abs(v1 - complex(math.cos(ph.eval(ctx.p0)), math.sin(ph.eval(ctx.p0))) * v2) < tol:
            out.append(ph)
    return out


# ---------------------------------------------------------------------------
# Polynomial circuit matrices
# ---------------------------------------------------------------------------


def reduce_circle(poly: dict, npairs: int) -> dict:
    """Normal form modulo ``s_k^2 + c_k^2 - 1``: every ``s_k`` exponent ends up <= 1."""
    out: dict = {}
    for mono, coef in poly.items():
        terms = [(list(mono), coef)]
        for k in range(npairs):
            nxt = []
            for e, c in terms:
                half = e[2 * k] // 2
                if half == 0:
                    nxt.append((e, c))
                    continue
                # s^(2h + r) = s^r (1 - c^2)^h
                for j in range(half + 1):
                    e2 = list(e)
                    e2[2 * k] -= 2 * half
                    e2[2 * k + 1] += 2 * j
                    binom = Fraction(math.comb(half, j) * (-1) ** j)
                    nxt.append((e2, c * Coef(binom)))
            terms = nxt
        for e, c in terms:
            key = tuple(e)
            v = out.get(key)
            v = c if v is None else v + c
            if v.is_zero():
                out.pop(key, None)
            else:
                out[key] = v
    return out


def ring_for(circuits: Iterable[Circuit], extra: Iterable[LinComb] = ()) -> PolyRing:
    lcs: list[LinComb] = list(extra)
    for c in circuits:
        for ins in c.instrs:
            for row in ins.gate.matrix(ins.args).rows:
                for e in row:
                    lcs.extend(_iter_lincombs(e))
    return PolyRing(half_angle_scales(lcs))


class PolyMatrixBuilder:
    """Circuit matrices with polynomial entries over a fixed ring, with caching."""

    def __init__(self, ring: PolyRing):
        self.ring = ring
        self._gate_cache: dict[Instruction, list[list[dict]]] = {}
        self._circ_cache: dict[Circuit, list[list[dict]]] = {}

    def gate(self, ins: Instruction) -> list[list[dict]]:
        hit = self._gate_cache.get(ins)
        if hit is None:
            sm = ins.gate.matrix(ins.args)
            hit = [[self.ring.from_expr(e) for e in row] for row in sm.rows]
            self._gate_cache[ins] = hit
        return hit

    def matrix(self, c: Circuit) -> list[list[dict]]:
        hit = self._circ_cache.get(c)
        if hit is not None:
            return hit
        if c.instrs:
            prefix = Circuit(c.q, c.m, c.instrs[:-1])
            base = self._circ_cache.get(prefix)
            if base is None:
                base = self.matrix(prefix)
            out = self.apply(base, c.instrs[-1], c.q)
        else:
            dim = 1 << c.q
            out = [[self.ring.const(ONE) if r == k else {} for k in range(dim)] for r in range(dim)]
        if len(self._circ_cache) > 200000:
            self._circ_cache.clear()
        self._circ_cache[c] = out
        return out

    def apply(self, rows: list[list[dict]], ins: Instruction, q: int) -> list[list[dict]]:
        g = self.gate(ins)
        d = len(ins.qubits)
        bits = [1 << (q - 1 - w) for w in ins.qubits]
        mask = sum(bits)
        offsets = []
        for a in range(1 << d):
            off = 0
            for k in range(d):
                if a >> (d - 1 - k) & 1:
                    off |= bits[k]
            offsets.append(off)
        new = list(rows)
        add, mul = PolyRing.add, PolyRing.mul
        for base in range(1 << q):
            if base & mask:
                continue
            idx = [base | o for o in offsets]
            src = [rows[i] for i in idx]
            for a, ia in enumerate(idx):
                row = [{} for _ in range(len(rows))]
                for b, sb in enumerate(src):
                    gab = g[a][b]
                    if not gab:
                        continue
                    for col, val in enumerate(sb):
                        if val:
                            row[col] = add(row[col], mul(gab, val))
                new[ia] = row
        return new


# ---------------------------------------------------------------------------
# Verifier
# ---------------------------------------------------------------------------


@dataclass
class Verifier:
    """Checks pairs of circuits over ``ctx.q`` qubits and ``ctx.m`` parameters.

    ``backend`` is ``algebraic``, ``smt`` or ``both``.  When ``ring`` is not
    given, each pair gets its own ring sized to the pair's angles.
    """

    ctx: FingerprintContext
    solver: SolverConfig = field(default_factory=SolverConfig)
    backend: str = "both"
    tol: float = 1e-9
    constant_phase_only: bool = False
    ring: PolyRing | None = None
    stats: VerifierStats = field(default_factory=VerifierStats)

    def __post_init__(self):
        if self.backend not in ("algebraic", "smt", "both"):
            raise ValueError(f"unknown verifier backend {self.backend!r}")
        self._builder = PolyMatrixBuilder(self.ring) if self.ring is not None else None
        self._proc: SolverProcess | None = None
        self._dump_counter = 0

    def close(self):
        if self._proc is not None:
            self._proc.close()
            self._proc = None

    def _builder_for(self, c1: Circuit, c2: Circuit, phase: PhaseFactor) -> PolyMatrixBuilder:
        if self._builder is not None:
            return self._builder
        return PolyMatrixBuilder(ring_for((c1, c2), (phase.angle(),)))

    def residuals(self, c1: Circuit, c2: Circuit, phase: PhaseFactor) -> tuple[PolyRing, list[dict]]:
        """Real and imaginary parts of every structurally nonzero ``[[c1]] - e^{i beta}[[c2]]`` entry."""
        b = self._builder_for(c1, c2, phase)
        m1, m2 = b.matrix(c1), b.matrix(c2)
        ph = b.ring.expi(phase.angle())
        out = []
        for r1, r2 in zip(m1, m2):
            for x, y in zip(r1, r2):
                diff = b.ring.sub(x, PolyRing.mul(ph, y))
                if not diff:
                    continue
                for part in (PolyRing.real(diff), PolyRing.imag(diff)):
                    if part:
                        out.append(part)
        return b.ring, out

    def check_algebraic(self, ring: PolyRing, residuals: list[dict]) -> bool:
        self.stats.algebraic_checks += 1
        npairs = ring.nvars // 2
        return all(not reduce_circle(r, npairs) for r in residuals)

    def check_smt(self, c1: Circuit, c2: Circuit, phase: PhaseFactor, ring: PolyRing, residuals: list[dict]) -> Verdict:
        names = ring.var_names()
        uses_sqrt2 = any(c.b or c.d for r in residuals for c in r.values())
        script = build_script(names, ring.trig_pairs(), residuals, self.solver.logic, uses_sqrt2)
        self._dump_counter += 1
        dump_script(self.solver, f"query_{self._dump_counter:06d}", script)
        if self._proc is None:
            self._proc = SolverProcess(self.solver)
        self.stats.smt_queries += 1
        status, model = self._proc.check(script, names if residuals else ())
        if status == "unsat":
            return Verdict(VERIFIED, phase, "smt")
        if status == "sat":
            cex = None
            if model or not ring.scales:
                vals = []
                for p, s in ring.scales.items():
                    sv = model.get(sin_var(p, s), 0.0)
                    cv = model.get(cos_var(p, s), 1.0)
                    vals.append((p, s * math.atan2(sv, cv)))
                params = [0.0] * max(self.ctx.m, c1.m, c2.m)
                for p, v in vals:
                    params[p] = v
                cex = tuple(params)
            return Verdict(REFUTED, phase, "smt", cex)
        self.stats.smt_unknown += 1
        return Verdict(INCONCLUSIVE, phase, "smt", detail=status)

    def verify_equivalence(self, c1: Circuit, c2: Circuit, phase: PhaseFactor) -> Verdict:
        if c1.q != c2.q:
            return Verdict(REFUTED, phase, "shape", detail="qubit counts differ")
        try:
            ring, res = self.residuals(c1, c2, phase)
        except UnsupportedExpression as exc:
            return Verdict(INCONCLUSIVE, phase, "algebraic", detail=str(exc))
        if self.backend == "algebraic":
            ok = self.check_algebraic(ring, res)
            return Verdict(VERIFIED if ok else REFUTED, phase, "algebraic", None if ok else self._numeric_cex(c1, c2, phase))
        smt = self.check_smt(c1, c2, phase, ring, res)
        if self.backend == "both":
            ok = self.check_algebraic(ring, res)
            if smt.status != INCONCLUSIVE and ok != smt.verified:
                raise VerifierDisagreement(f"algebraic={ok} smt={smt.status} for {c1} vs {c2} phase {phase}")
            smt.method = "algebraic+smt"
        return smt

    def _numeric_cex(self, c1: Circuit, c2: Circuit, phase: PhaseFactor) -> tuple[float, ...] | None:
        rng = np.random.default_rng(0)
        m = max(c1.m, c2.m, len(phase.a))
        for _ in range(8):
            p = tuple(float(x) for x in rng.uniform(0, 2 * math.pi, m))
            diff = unitary(c1, p) - complex(math.cos(phase.eval(p)), math.sin(phase.eval(p))) * unitary(c2, p)
            if np.max(np.abs(diff)) > 1e-9:
                return p
        return None

    def verify_pair(self, c1: Circuit, c2: Circuit) -> Verdict:
        """Try each numeric phase candidate; verified on the first candidate that checks out."""
        self.stats.pairs += 1
        cands = find_phase_candidates(c1, c2, self.ctx, self.tol, self.constant_phase_only)
        if not cands:
            return Verdict(REFUTED, None, "fingerprint", detail="no phase candidate")
        inconclusive = None
        last = None
        for ph in cands:
            self.stats.candidates_tried += 1
            v = self.verify_equivalence(c1, c2, ph)
            if v.verified:
                return v
            if v.status == INCONCLUSIVE:
                inconclusive = v
            last = v
        if inconclusive is not None:
            log.warning("verification inconclusive: %s vs %s", c1, c2)
            return inconclusive
        return last


def verify_pair(
    c1: Circuit,
    c2: Circuit,
    ctx: FingerprintContext | None = None,
    solver: SolverConfig | None = None,
    backend: str = "both",
) -> Verdict:
    ctx = ctx or FingerprintContext(c1.q, max(c1.m, c2.m))
    v = Verifier(ctx, solver or SolverConfig(), backend)
    try:
        return v.verify_pair(c1, c2)
    finally:
        v.close()


def verify_equivalence(
    c1: Circuit, c2: Circuit, phase: PhaseFactor, solver: SolverConfig | None = None, backend: str = "both"
) -> Verdict:
    v = Verifier(FingerprintContext(c1.q, max(c1.m, c2.m, len(phase.a))), solver or SolverConfig(), backend)
    try:
        return v.verify_equivalence(c1, c2, phase)
    finally:
        v.close()
