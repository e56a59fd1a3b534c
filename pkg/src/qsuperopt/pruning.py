"""Redundancy elimination on ECC sets.

``simplify_eccs`` first treats each ECC as a set of circuits rather than of
sequences (members with the same DAG collapse onto one canonical sequence;
ECCs left with one circuit disappear), then drops qubits and parameters no
circuit in an ECC touches and removes ECCs that coincide afterwards (also up
to renaming parameters).
``prune_common_subcircuit`` drops ECC members that share a first or last
gate with the representative: the transformation between them is subsumed by
the one between the two circuits with that gate stripped.
"""

from __future__ import annotations

import itertools

from .circuit import Circuit, CircuitDag, Instruction, canonical_form, relabel, to_dag
from .eccset import Ecc, EccSet
from .symexpr import LinComb

BOUNDARY_MODES = ("sequence", "dag")


def dedup_sequences(ecc: Ecc) -> Ecc:
    """Keep one canonical sequence per distinct circuit, representative first."""
    seen: dict[str, Circuit] = {}
    for c in ecc.circuits:
        cf = canonical_form(c)
        seen.setdefault(cf.text(), cf)
    return Ecc(list(seen.values()))


def _compact(ecc: Ecc) -> Ecc:
    qubits = sorted({k for c in ecc.circuits for k in c.qubits_used()})
    params = sorted({i for c in ecc.circuits for i in c.params_used()})
    qmap = {w: k for k, w in enumerate(qubits)}
    pmap = {p: LinComb.param(k) for k, p in enumerate(params)}
    return Ecc([relabel(c, qmap, pmap, q=len(qubits), m=len(params)) for c in ecc.circuits])


def _texts(ecc: Ecc) -> tuple[str, ...]:
    return tuple(c.text() for c in ecc.circuits)


def _param_variants(ecc: Ecc, permute: bool) -> set[tuple]:
    """Member-set keys of ``ecc``, under every parameter permutation when ``permute``."""
    out = set()
    perms = itertools.permutations(range(ecc.m)) if permute else [tuple(range(ecc.m))]
    for perm in perms:
        pmap = {i: LinComb.param(perm[i]) for i in range(ecc.m)}
        out.add((ecc.q, ecc.m, frozenset(relabel(c, list(range(ecc.q)), pmap).text() for c in ecc.circuits)))
    return out


def simplify_eccs(es: EccSet, param_permutations: bool = False) -> EccSet:
    """Remove unused qubits and parameters per ECC, then deduplicate.

    Compacting parameter indices already identifies ECCs that differ only in
    which parameters they use.  With ``param_permutations`` ECCs that
    coincide under any permutation of the remaining parameters are merged as
    well.  Among coinciding ECCs the one with the lexicographically least text
    is kept; output order follows first occurrence of each group.
    """
    distinct = [d for d in (dedup_sequences(e) for e in es.eccs) if len(d) > 1]
    compacted = [_compact(e) for e in distinct]
    groups: dict[tuple, int] = {}
    kept: list[Ecc] = []
    for e in compacted:
        variants = _param_variants(e, param_permutations)
        slot = next((groups[v] for v in variants if v in groups), None)
        if slot is None:
            for v in variants:
                groups[v] = len(kept)
            kept.append(e)
        elif _texts(e) < _texts(kept[slot]):
            kept[slot] = e
    return es.with_eccs(kept)


def _first_gates(c: Circuit, mode: str) -> set[Instruction]:
    if not c.instrs:
        return set()
    if mode == "sequence":
        return {c.instrs[0]}
    d: CircuitDag = to_dag(c)
    return {d.instrs[v] for v in range(len(d)) if d.is_first(v)}


def _last_gates(c: Circuit, mode: str) -> set[Instruction]:
    if not c.instrs:
        return set()
    if mode == "sequence":
        return {c.instrs[-1]}
    d: CircuitDag = to_dag(c)
    return {d.instrs[v] for v in range(len(d)) if d.is_last(v)}


def share_boundary_gate(a: Circuit, b: Circuit, mode: str = "sequence") -> bool:
    """Same gate (with arguments and qubits) at the start of both, or at the end of both."""
    if mode not in BOUNDARY_MODES:
        raise ValueError(f"mode must be one of {BOUNDARY_MODES}")
    return bool(_first_gates(a, mode) & _first_gates(b, mode)) or bool(_last_gates(a, mode) & _last_gates(b, mode))


def prune_common_subcircuit(es: EccSet, mode: str = "sequence") -> EccSet:
    """Drop members sharing a boundary gate with their representative; drop ECCs left as singletons."""
    out = []
    for e in es.eccs:
        rep = e.representative
        members = [rep] + [c for c in e.circuits[1:] if not share_boundary_gate(rep, c, mode)]
        if len(members) > 1:
            out.append(Ecc(members))
    return es.with_eccs(out)


def prune(
    es: EccSet,
    passes: tuple[str, ...] = ("simplify", "common"),
    mode: str = "sequence",
    param_permutations: bool = False,
    max_rounds: int = 20,
) -> EccSet:
    """Run ``passes`` in order, repeating until the set stops changing."""
    for p in passes:
        if p not in ("simplify", "common"):
            raise ValueError(f"unknown pruning pass {p!r}")
    for _ in range(max_rounds):
        before = [e.key() for e in es.eccs]
        for p in passes:
            if p == "simplify":
                es = simplify_eccs(es, param_permutations)
            else:
                es = prune_common_subcircuit(es, mode)
        if [e.key() for e in es.eccs] == before:
            break
    return es
