"""Rewriting circuits with verified transformations and a cost-bounded search.

A transformation's target is matched against a convex subgraph of the
circuit DAG: pattern gates are visited in canonical order, the first one
anchored at every circuit gate of the same type, later ones reached along
wires from already-matched gates (or anchored afresh when the pattern is
disconnected).  Qubit maps must be injective and preserve edge labels
(ports); pattern parameters are bound to the concrete angles they meet.
The matched region is then replaced by the instantiated rewrite and the
sequence re-stitched: ancestors of the region, then the rewrite, then the
remaining gates.
"""

from __future__ import annotations

import heapq
import logging
import math
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .circuit import SOURCE, Circuit, CircuitDag, Instruction, canonical_hash, canonical_order
from .eccset import EccSet
from .gatedef import GateSet
from .symexpr import LinComb

log = logging.getLogger(__name__)

ANGLE_TOL = 1e-9


class OptimizerError(ValueError):
    pass


@dataclass(frozen=True)
class Transformation:
    target: Circuit
    rewrite: Circuit
    ecc_id: int = -1

    def __str__(self):
        return f"{self.target.text() or '()'}  ->  {self.rewrite.text() or '()'}"


def extract_transformations(es: EccSet) -> list[Transformation]:
    """``rep -> c`` and ``c -> rep`` for every non-representative member ``c``."""
    out = []
    for k, e in enumerate(es.eccs):
        rep = e.representative
        for c in e.circuits[1:]:
            out.append(Transformation(rep, c, k))
            out.append(Transformation(c, rep, k))
    return out


# ---------------------------------------------------------------------------
# Matching
# ---------------------------------------------------------------------------


class DagIndex:
    """A circuit plus the adjacency needed for matching."""

    __slots__ = ("circuit", "dag", "by_name", "by_wire", "pos")

    def __init__(self, c: Circuit):
        self.circuit = c
        self.dag = CircuitDag(c.q, c.m, c.instrs)
        self.by_name: dict[str, list[int]] = {}
        self.by_wire: list[list[int]] = [[] for _ in range(c.q)]
        for v, ins in enumerate(c.instrs):
            self.by_name.setdefault(ins.gate.name, []).append(v)
            for w in ins.qubits:
                self.by_wire[w].append(v)


@dataclass
class _Pattern:
    t: Transformation
    order: list[int]  # pattern gate indices in canonical order
    instrs: tuple[Instruction, ...]
    pred: tuple  # per pattern gate, per port: pattern gate id or SOURCE
    ok: bool


_PATTERN_CACHE: dict[int, _Pattern] = {}


def _pattern(t: Transformation) -> _Pattern:
    key = id(t)
    hit = _PATTERN_CACHE.get(key)
    if hit is not None and hit.t is t:
        return hit
    tgt = t.target
    order = canonical_order(tgt.instrs, tgt.q)
    instrs = tuple(tgt.instrs[v] for v in order)
    dag = CircuitDag(tgt.q, tgt.m, instrs)
    ok = bool(instrs)
    # every rewrite qubit and parameter must be determined by the target
    if not t.rewrite.qubits_used() <= tgt.qubits_used() or not t.rewrite.params_used() <= tgt.params_used():
        ok = False
    pat = _Pattern(t, list(range(len(instrs))), instrs, dag.pred, ok)
    _PATTERN_CACHE[key] = pat
    return pat


def _angles_equal(a: LinComb, b: LinComb) -> bool:
    if a.terms != b.terms:
        return False
    diff = (a.pi - b.pi) * math.pi + (a.offset - b.offset)
    r = math.remainder(diff, 2 * math.pi)
    return abs(r) < ANGLE_TOL


def _bind_args(pargs: Sequence[LinComb], cargs: Sequence[LinComb], bind: dict[int, LinComb], deferred: list) -> bool:
    for e, v in zip(pargs, cargs):
        unbound = [i for i in e.params() if i not in bind]
        if not unbound:
            if not _angles_equal(e.substitute(bind), v):
                return False
            continue
        if len(unbound) == 1:
            i = unbound[0]
            k = e.coef(i)
            rest = LinComb([(j, c) for j, c in e.terms if j != i], e.pi, e.offset).substitute(bind)
            # k * p_i + rest = v
            bind[i] = (v - rest).scale(Fraction(1) / k)
            continue
        deferred.append((e, v))
    return True


def _resolve_deferred(deferred: list, bind: dict[int, LinComb]) -> bool:
    progress = True
    while deferred and progress:
        progress = False
        for item in list(deferred):
            e, v = item
            unbound = [i for i in e.params() if i not in bind]
            if len(unbound) <= 1:
                deferred.remove(item)
                if not _bind_args([e], [v], bind, []):
                    return False
                progress = True
    for e, v in deferred:
        # several free parameters in one expression: put the whole angle on the first
        unbound = [i for i in e.params() if i not in bind]
        for i in unbound[1:]:
            bind[i] = LinComb()
        if not _bind_args([e], [v], bind, []):
            return False
    return True


def find_matches(idx: DagIndex, t: Transformation) -> list[tuple[list[int], dict[int, int], dict[int, LinComb]]]:
    """All ``(circuit gate ids in pattern order, qubit map, parameter binding)`` matches of ``t.target``."""
    pat = _pattern(t)
    if not pat.ok:
        return []
    c = idx.circuit
    cdag = idx.dag
    k = len(pat.instrs)
    out = []
    matched = [-1] * k
    used_gates: set[int] = set()
    qmap: dict[int, int] = {}
    qinv: dict[int, int] = {}

    def candidates(i: int) -> Iterable[int]:
        pins = pat.instrs[i]
        for port, pw in enumerate(pins.qubits):
            u = pat.pred[i][port]
            if u != SOURCE:
                uw = matched[u]
                cw = qmap[pw]
                uport = c.instrs[uw].qubits.index(cw)
                nxt = cdag.succ[uw][uport]
                return () if nxt == SOURCE else (nxt,)
        return idx.by_name.get(pins.gate.name, ())

    def rec(i: int, bind: dict[int, LinComb], deferred: list):
        if i == k:
            b = dict(bind)
            d = list(deferred)
            if not _resolve_deferred(d, b):
                return
            if _convex(idx, matched):
                out.append((list(matched), dict(qmap), b))
            return
        pins = pat.instrs[i]
        for v in candidates(i):
            if v in used_gates:
                continue
            cins = c.instrs[v]
            if cins.gate.name != pins.gate.name:
                continue
            # qubit map consistency and injectivity
            added = []
            good = True
            for pw, cw in zip(pins.qubits, cins.qubits):
                have = qmap.get(pw)
                if have is None:
                    if cw in qinv:
                        good = False
                        break
                    qmap[pw] = cw
                    qinv[cw] = pw
                    added.append(pw)
                elif have != cw:
                    good = False
                    break
            if good:
                # edges from sources in the pattern: circuit predecessor must not be matched
                for port in range(len(pins.qubits)):
                    u = pat.pred[i][port]
                    cu = cdag.pred[v][port]
                    if u == SOURCE:
                        if cu != SOURCE and cu in used_gates:
                            good = False
                            break
                    elif cu != matched[u]:
                        good = False
                        break
            if good:
                b2 = dict(bind)
                d2 = list(deferred)
                if _bind_args(pins.args, cins.args, b2, d2):
                    matched[i] = v
                    used_gates.add(v)
                    rec(i + 1, b2, d2)
                    used_gates.discard(v)
                    matched[i] = -1
            for pw in added:
                del qinv[qmap.pop(pw)]

    rec(0, {}, [])
    return out


def _convex(idx: DagIndex, gates: Sequence[int]) -> bool:
    """No path leaves the matched set and comes back (forward search bounded by sequence position)."""
    s = set(gates)
    hi = max(gates)
    dag = idx.dag
    stack = []
    seen: set[int] = set()
    for v in gates:
        for u in dag.succ[v]:
            if u != SOURCE and u not in s and u < hi and u not in seen:
                seen.add(u)
                stack.append(u)
    while stack:
        u = stack.pop()
        for w in dag.succ[u]:
            if w == SOURCE or w > hi:
                continue
            if w in s:
                return False
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return True


def _instantiate(t: Transformation, qmap: dict[int, int], bind: dict[int, LinComb]) -> list[Instruction]:
    out = []
    for ins in t.rewrite.instrs:
        args = tuple(_normalize_angle(a.substitute(bind)) for a in ins.args)
        out.append(Instruction(ins.gate, args, tuple(qmap[w] for w in ins.qubits)))
    return out


def _normalize_angle(a: LinComb) -> LinComb:
    if a.terms:
        return a
    if a.offset:
        return LinComb.const_float(math.remainder(a.eval(), 2 * math.pi))
    p = a.pi - 2 * math.floor((a.pi + 1) / 2)  # into (-1, 1]
    if p == -1:
        p = Fraction(1)
    return LinComb((), p)


def _restitch(idx: DagIndex, gates: Sequence[int], new: list[Instruction]) -> Circuit:
    c = idx.circuit
    s = set(gates)
    anc: set[int] = set()
    stack = [u for v in gates for u in idx.dag.pred[v] if u != SOURCE and u not in s]
    while stack:
        u = stack.pop()
        if u in anc:
            continue
        anc.add(u)
        stack.extend(w for w in idx.dag.pred[u] if w != SOURCE and w not in anc)
    before = [c.instrs[v] for v in range(len(c.instrs)) if v in anc]
    after = [c.instrs[v] for v in range(len(c.instrs)) if v not in anc and v not in s]
    return Circuit(c.q, c.m, tuple(before + new + after))


def apply_transformation(idx: DagIndex | Circuit, t: Transformation) -> list[Circuit]:
    """Every circuit obtained by rewriting one match of ``t.target`` into ``t.rewrite``."""
    if isinstance(idx, Circuit):
        idx = DagIndex(idx)
    out = []
    for gates, qmap, bind in find_matches(idx, t):
        out.append(_restitch(idx, gates, _instantiate(t, qmap, bind)))
    return out


def apply(c: Circuit, t: Transformation) -> list[Circuit]:
    return apply_transformation(DagIndex(c), t)


# ---------------------------------------------------------------------------
# Search
# ---------------------------------------------------------------------------


@dataclass
class SearchConfig:
    gamma: float = 1.0001
    timeout_s: float = 60.0
    queue_cap: int = 2000
    queue_keep: int = 1000
    seed: int | None = None  # shuffles ties among equal-cost entries when set
    max_iterations: int | None = None
    cost: Callable[[Circuit], float] = len

    def __post_init__(self):
        if self.gamma < 1:
            raise ValueError("gamma must be >= 1")


@dataclass
class SearchResult:
    best: Circuit
    initial_cost: float
    best_cost: float
    iterations: int = 0
    enqueued: int = 0
    seconds: float = 0.0
    history: list[tuple[float, float]] = field(default_factory=list)  # (elapsed, best cost)
    max_enqueued_ratio: float = 0.0  # max cost(enqueued) / cost(best) at enqueue time


def check_gate_set(c: Circuit, gs: GateSet) -> None:
    names = set(gs.names())
    bad = sorted({ins.gate.name for ins in c.instrs} - names)
    if bad:
        raise OptimizerError(f"gates {bad} are not in gate set {gs.name}")


def optimize(
    c_in: Circuit,
    ts: Sequence[Transformation],
    cfg: SearchConfig | None = None,
    gate_set: GateSet | None = None,
    progress: Callable[[str], None] | None = None,
) -> SearchResult:
    """Best-first search: explore rewrites costing less than ``gamma * cost(best)``."""
    cfg = cfg or SearchConfig()
    if gate_set is not None:
        check_gate_set(c_in, gate_set)
    rng = random.Random(cfg.seed) if cfg.seed is not None else None
    cost = cfg.cost
    start = time.monotonic()
    best, best_cost = c_in, cost(c_in)
    res = SearchResult(c_in, best_cost, best_cost)
    res.history.append((0.0, best_cost))
    seen = {canonical_hash(c_in)}
    counter = 0
    queue: list[tuple[float, float, int, Circuit]] = [(best_cost, 0.0, counter, c_in)]
    last_log = start
    while queue:
        if time.monotonic() - start > cfg.timeout_s:
            break
        if cfg.max_iterations is not None and res.iterations >= cfg.max_iterations:
            break
        cur_cost, _, _, cur = heapq.heappop(queue)
        res.iterations += 1
        if cur_cost < best_cost:
            best, best_cost = cur, cur_cost
            res.history.append((time.monotonic() - start, best_cost))
        idx = DagIndex(cur)
        for t in ts:
            for r in apply_transformation(idx, t):
                rc = cost(r)
                if rc >= cfg.gamma * best_cost:
                    continue
                h = canonical_hash(r)
                if h in seen:
                    continue
                seen.add(h)
                counter += 1
                res.enqueued += 1
                res.max_enqueued_ratio = max(res.max_enqueued_ratio, rc / best_cost if best_cost else 0.0)
                tie = rng.random() if rng is not None else 0.0
                heapq.heappush(queue, (rc, tie, counter, r))
                if rc < best_cost:
                    best, best_cost = r, rc
                    res.history.append((time.monotonic() - start, best_cost))
        if len(queue) > cfg.queue_cap:
            queue = heapq.nsmallest(cfg.queue_keep, queue)
            heapq.heapify(queue)
        now = time.monotonic()
        if progress is not None and now - last_log > 5.0:
            last_log = now
            progress(f"{now - start:.0f}s queue={len(queue)} best={best_cost:g}")
    res.best, res.best_cost = best, best_cost
    res.seconds = time.monotonic() - start
    return res
