"""Representative-based generation of (n, q)-complete ECC sets.

Round ``j`` extends every ``(j-1)``-gate representative ``L`` by each
single-gate circuit, keeps ``L' = L.(g i)`` only when ``L'[1:]`` is already a
representative, buckets ``L'`` by fingerprint, and either adds it to the
first verified-equivalent ECC in its (or an adjacent) bucket or opens a new
ECC with ``L'`` as representative.  Circuits are handled in ``precedes`` order,
so the first member of every ECC is its minimum.

Circuits are handled internally as tuples of indices into the fixed list of
single-gate circuits; that tuple order is exactly the ``precedes`` order for
circuits of equal length.
"""

from __future__ import annotations

import itertools
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .circuit import Circuit, CircuitOrder, Instruction, canonical_text
from .eccset import Ecc, EccSet
from .fingerprint import DEFAULT_EMAX, DEFAULT_SEED, FingerprintContext
from .gatedef import GateSet, ParamSpec
from .smtlib import SolverConfig
from .symexpr import LinComb
from .verifier import INCONCLUSIVE, Verdict, Verifier, ring_for

log = logging.getLogger(__name__)


@dataclass
class GenerationStats:
    representatives: list[int] = field(default_factory=list)
    constructed: int = 0
    kept: int = 0
    verifications: int = 0
    structural_hits: int = 0
    cache_hits: int = 0
    solver_verified: int = 0
    inconclusive: int = 0
    bucket_split_merges: int = 0
    round_seconds: list[float] = field(default_factory=list)

    def complexity_bound(self, ch: int, n: int) -> int:
        return (self.representatives[-1] if self.representatives else 1) * ch * n


class _Ecc:
    __slots__ = ("rep", "members", "key", "amp")

    def __init__(self, rep: tuple, key: int, amp: complex):
        self.rep = rep
        self.members = [rep]
        self.key = key
        self.amp = amp


class RepGen:
    """Stateful generator; call :meth:`run` once."""

    def __init__(
        self,
        gs: GateSet,
        sigma: ParamSpec,
        q: int,
        ctx: FingerprintContext | None = None,
        verifier: Verifier | None = None,
        backend: str = "algebraic",
        solver: SolverConfig | None = None,
        structural_shortcut: bool = True,
        use_cache: bool = True,
        neighbor_buckets: bool = True,
        progress: Callable[[str], None] | None = None,
        phase_tol: float = 1e-9,
    ):
        self.gs, self.sigma, self.q = gs, sigma, q
        self.m = sigma.num_params
        self.ctx = ctx or FingerprintContext(q, self.m)
        if (self.ctx.q, self.ctx.m) != (q, self.m):
            raise ValueError("fingerprint context does not match q and m")
        self.order = CircuitOrder(gs, sigma, q)
        self.instrs: list[Instruction] = self.order.instructions
        self.ch = len(self.instrs)
        self.iparams = [ins.params() for ins in self.instrs]
        if verifier is None:
            ring = ring_for([Circuit(q, self.m, (ins,)) for ins in self.instrs])
            verifier = Verifier(self.ctx, solver or SolverConfig(), backend, tol=phase_tol, ring=ring)
        self.verifier = verifier
        self.structural_shortcut = structural_shortcut
        self.use_cache = use_cache
        self.neighbor_buckets = neighbor_buckets
        self.progress = progress or (lambda msg: log.info(msg))
        self.stats = GenerationStats()
        self._cache: dict[tuple, bool] = {}
        self._perms = [
            (qp, pp)
            for qp in itertools.permutations(range(q))
            for pp in itertools.permutations(range(self.m))
        ]
        self._relabel: dict[tuple[int, tuple, tuple], int] = {}
        self._index = {ins: k for k, ins in enumerate(self.instrs)}

    # -- helpers ----------------------------------------------------------

    def circuit(self, t: Sequence[int]) -> Circuit:
        return Circuit(self.q, self.m, tuple(self.instrs[k] for k in t))

    def _params_of(self, t: Sequence[int]) -> frozenset[int]:
        out: frozenset[int] = frozenset()
        for k in t:
            out |= self.iparams[k]
        return out

    def _relabel_index(self, k: int, qp: tuple, pp: tuple) -> int:
        key = (k, qp, pp)
        hit = self._relabel.get(key)
        if hit is None:
            pmap = {i: LinComb.param(pp[i]) for i in range(self.m)}
            hit = self._index.get(self.instrs[k].remap(qp, pmap), -1)
            self._relabel[key] = hit
        return hit

    def _pair_key(self, a: tuple, b: tuple) -> tuple:
        """Canonical key of an unordered pair under qubit and parameter relabelling."""
        best = None
        for qp, pp in self._perms:
            ra = tuple(self._relabel_index(k, qp, pp) for k in a)
            rb = tuple(self._relabel_index(k, qp, pp) for k in b)
            cand = (ra, rb) if ra <= rb else (rb, ra)
            if best is None or cand < best:
                best = cand
        return best

    def _canonical(self, t: tuple) -> str:
        return canonical_text(self.circuit(t))

    def _amp_phase_match(self, a1: complex, a2: complex) -> bool:
        """Cheap necessary condition: some phase candidate maps ``a2`` onto ``a1``."""
        return abs(abs(a1) - abs(a2)) < self.verifier.tol

    def equivalent(self, new: tuple, rep: tuple) -> bool:
        self.stats.verifications += 1
        if self.structural_shortcut and len(new) == len(rep) and sorted(new) == sorted(rep):
            if self._canonical(new) == self._canonical(rep):
                self.stats.structural_hits += 1
                return True
        key = None
        if self.use_cache:
            key = self._pair_key(new, rep)
            hit = self._cache.get(key)
            if hit is not None:
                self.stats.cache_hits += 1
                return hit
        v: Verdict = self.verifier.verify_pair(self.circuit(new), self.circuit(rep))
        if v.status == INCONCLUSIVE:
            self.stats.inconclusive += 1
            log.warning("inconclusive verification, treated as inequivalent: %s vs %s", self.circuit(new), self.circuit(rep))
        ok = v.verified
        if ok:
            self.stats.solver_verified += 1
        if key is not None:
            self._cache[key] = ok
        return ok

    # -- main loop ----------------------------------------------------------

    def run(self, n: int) -> EccSet:
        if n < 1:
            raise ValueError("n must be >= 1")
        ctx = self.ctx
        psi0 = ctx.psi0
        empty = ()
        s0 = ctx.start_state()
        a0 = complex(np.vdot(psi0, s0))
        eccs: list[_Ecc] = [_Ecc(empty, ctx.key(abs(a0)), a0)]
        buckets: dict[int, list[int]] = {eccs[0].key: [0]}
        reps: set[tuple] = {empty}
        rep_state = {empty: s0}
        rep_params = {empty: frozenset()}
        frontier = [empty]
        self.stats.representatives = [1]
        gate_mats = None
        for j in range(1, n + 1):
            t_start = time.perf_counter()
            new_reps: list[tuple] = []
            for L in frontier:
                state = rep_state[L]
                used = rep_params[L]
                for k, ins in enumerate(self.instrs):
                    if self.sigma.single_use and used & self.iparams[k]:
                        continue
                    Lp = L + (k,)
                    self.stats.constructed += 1
                    if Lp[1:] not in reps:
                        continue
                    self.stats.kept += 1
                    st = ctx.advance(state, ins)
                    amp = complex(np.vdot(psi0, st))
                    h = ctx.key(abs(amp))
                    joined = False
                    for b in ((h - 1, h, h + 1) if self.neighbor_buckets else (h,)):
                        for eid in buckets.get(b, ()):
                            e = eccs[eid]
                            if not self._amp_phase_match(amp, e.amp):
                                continue
                            if self.equivalent(Lp, e.rep):
                                e.members.append(Lp)
                                if b != h:
                                    self.stats.bucket_split_merges += 1
                                joined = True
                                break
                        if joined:
                            break
                    if not joined:
                        eccs.append(_Ecc(Lp, h, amp))
                        buckets.setdefault(h, []).append(len(eccs) - 1)
                        new_reps.append(Lp)
                        rep_state[Lp] = st
                        rep_params[Lp] = used | self.iparams[k]
            if j > 1:
                for L in frontier:
                    rep_state.pop(L, None)
            reps.update(new_reps)
            frontier = new_reps
            self.stats.representatives.append(len(reps))
            self.stats.round_seconds.append(time.perf_counter() - t_start)
            self.progress(
                f"round {j}: |R_{j}|={len(reps)} kept={self.stats.kept} "
                f"eccs={len(eccs)} {self.stats.round_seconds[-1]:.1f}s"
            )
        self._eccs = eccs
        out = [Ecc([self.circuit(t) for t in e.members]) for e in eccs if len(e.members) > 1]
        info = {
            "representatives": list(self.stats.representatives),
            "eccs_with_singletons": len(eccs),
            "constructed": self.stats.constructed,
            "kept": self.stats.kept,
            "ch": self.ch,
        }
        return EccSet(self.gs, out, self.sigma, n, self.q, self.m, ctx.seed, ctx.emax, info)


def repgen(
    gs: GateSet,
    sigma: ParamSpec,
    n: int,
    q: int,
    ctx: FingerprintContext | None = None,
    verifier: Verifier | None = None,
    **kwargs,
) -> EccSet:
    gen = RepGen(gs, sigma, q, ctx, verifier, **kwargs)
    try:
        return gen.run(n)
    finally:
        gen.verifier.close()


def eccify(bucket: Iterable[Circuit], verifier: Verifier) -> list[Ecc]:
    """Partition ``bucket`` into verified ECCs, testing each circuit against representatives only.

    Circuits are taken in the given order, so pass them sorted by ``precedes``.
    """
    out: list[Ecc] = []
    for c in bucket:
        for e in out:
            if verifier.verify_pair(c, e.representative).verified:
                e.circuits.append(c)
                break
        else:
            out.append(Ecc([c]))
    return out


def transformation_count(es: EccSet) -> int:
    from .eccset import transformation_count as _tc

    return _tc(es)


# ---------------------------------------------------------------------------
# Brute-force completeness oracle
# ---------------------------------------------------------------------------


@dataclass
class CompletenessReport:
    complete: bool | None  # None: search budget exhausted
    classes: int = 0
    circuits: int = 0
    disconnected: list[tuple[str, str]] = field(default_factory=list)
    apply_calls: int = 0

    @property
    def inconclusive(self) -> bool:
        return self.complete is None


def completeness_oracle(
    gs: GateSet,
    sigma: ParamSpec,
    n: int,
    q: int,
    es: EccSet,
    ctx: FingerprintContext | None = None,
    backend: str = "algebraic",
    budget: int = 2_000_000,
    extra_length: int = 0,
) -> CompletenessReport:
    """Check by brute force that every equivalent pair in ``C^(n,q)`` is connected by ``es``'s rewrites.

    All sequences with at most ``n`` gates are grouped by verified
    equivalence.  Each sequence's DAG is a node; applying any extracted
    transformation anywhere (convex-subgraph matching) gives an edge.
    Intermediate circuits may have up to ``n + extra_length`` gates.
    """
    from .circuit import canonical_form
    from .optimizer import DagIndex, apply_transformation, extract_transformations

    m = sigma.num_params
    ctx = ctx or FingerprintContext(q, m)
    order = CircuitOrder(gs, sigma, q)
    singles = order.instructions
    verifier = Verifier(ctx, SolverConfig(), backend)
    seqs: list[Circuit] = []
    for length in range(n + 1):
        for combo in itertools.product(range(len(singles)), repeat=length):
            c = Circuit(q, m, tuple(singles[k] for k in combo))
            if sigma.single_use and not c.satisfies_single_use():
                continue
            seqs.append(c)
    # group by verified equivalence, bucketed by fingerprint
    classes: list[list[Circuit]] = []
    by_key: dict[int, list[int]] = {}
    for c in seqs:
        fp = abs(ctx.amplitude_of_state(ctx.start_state() if not c.instrs else _state(c, ctx)))
        h = ctx.key(fp)
        placed = False
        for b in (h - 1, h, h + 1):
            for cid in by_key.get(b, ()):
                if verifier.verify_pair(c, classes[cid][0]).verified:
                    classes[cid].append(c)
                    placed = True
                    break
            if placed:
                break
        if not placed:
            classes.append([c])
            by_key.setdefault(h, []).append(len(classes) - 1)
    verifier.close()

    ts = extract_transformations(es)
    limit = n + extra_length
    report = CompletenessReport(True, len(classes), len(seqs))
    # union-find over canonical forms
    parent: dict[str, str] = {}

    def find(x: str) -> str:
        while parent.setdefault(x, x) != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a: str, b: str):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    seen: set[str] = set()
    queue = [canonical_form(c) for c in seqs]
    while queue:
        c = queue.pop()
        key = canonical_text(c)
        if key in seen:
            continue
        seen.add(key)
        idx = DagIndex(c)
        for t in ts:
            report.apply_calls += 1
            if report.apply_calls > budget:
                report.complete = None
                return report
            for r in apply_transformation(idx, t):
                if len(r) > limit:
                    continue
                rk = canonical_text(r)
                union(key, rk)
                if rk not in seen:
                    queue.append(r)
    for cls in classes:
        roots = {find(canonical_text(c)) for c in cls}
        if len(roots) > 1:
            report.complete = False
            report.disconnected.append((cls[0].text(), " | ".join(c.text() for c in cls[1:4])))
    return report


def _state(c: Circuit, ctx: FingerprintContext) -> np.ndarray:
    st = ctx.start_state()
    for ins in c.instrs:
        st = ctx.advance(st, ins)
    return st
