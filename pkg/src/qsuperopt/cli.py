"""Command-line front end.

Exit codes: 0 ok, 1 usage, 2 I/O or file format, 3 audit found a failure,
4 solver configuration.
"""

from __future__ import annotations

import argparse
import json
import logging
import platform
import re
import sys
import time
from pathlib import Path

from . import __version__
from .circuit import CircuitError
from .eccset import EccFileError, EccSet, load, save
from .fingerprint import DEFAULT_EMAX, DEFAULT_SEED, FingerprintContext
from .gatedef import GateDefinitionError, ParamSpec, resolve_gate_set
from .generator import RepGen
from .optimizer import OptimizerError, SearchConfig, extract_transformations, optimize
from .preprocess import DEFAULT_PASSES, PASSES, PreprocessError, preprocess
from .pruning import BOUNDARY_MODES, prune
from .qasm import QasmError, emit_qasm, parse_qasm
from .smtlib import SolverConfig, SolverConfigError
from .verifier import INCONCLUSIVE, VERIFIED, Verifier, VerifierDisagreement

log = logging.getLogger("qsuperopt")

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_AUDIT, EXIT_SOLVER = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def parse_duration(text: str) -> float:
    """``600``, ``600s``, ``10m``, ``1h`` -> seconds."""
    m = re.fullmatch(r"\s*([0-9]*\.?[0-9]+)\s*([smh]?)\s*", text)
    if not m:
        raise argparse.ArgumentTypeError(f"bad duration {text!r}")
    return float(m.group(1)) * {"": 1, "s": 1, "m": 60, "h": 3600}[m.group(2)]


def _solver(args) -> SolverConfig:
    return SolverConfig(path=args.solver, timeout_s=args.solver_timeout, dump_dir=args.dump_smt)


def write_manifest(out: Path, args, extra: dict) -> Path:
    flags = {k: v for k, v in sorted(vars(args).items()) if k not in ("func",)}
    doc = {
        "command": args.command,
        "flags": flags,
        "tool_version": __version__,
        "python": platform.python_version(),
        **extra,
    }
    path = out.with_name(out.name + ".manifest.json")
    path.write_text(json.dumps(doc, indent=1, sort_keys=True, default=str) + "\n")
    return path


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise EccFileError(f"cannot read {path}: {exc}") from exc


def _write_text(path: str, text: str) -> None:
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise EccFileError(f"cannot write {path}: {exc}") from exc


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_generate(args) -> int:
    gs = resolve_gate_set(args.gateset)
    sigma = ParamSpec(args.m)
    ctx = FingerprintContext(args.q, args.m, seed=args.seed, emax=args.emax)
    t0 = time.perf_counter()
    gen = RepGen(
        gs, sigma, args.q, ctx, backend=args.backend, solver=_solver(args), progress=log.info, phase_tol=args.phase_tol
    )
    try:
        es = gen.run(args.n)
    finally:
        gen.verifier.close()
    if args.prune:
        es = prune(es, mode=args.mode)
    save(es, args.out)
    wall = time.perf_counter() - t0
    counts = es.counts()
    print(f"{args.out}: {counts['eccs']} ECCs, {counts['circuits']} circuits, "
          f"{counts['transformations']} transformations, |R_{args.n}|={es.info['representatives'][-1]}")
    extra = {
        "counts": counts,
        "wall_seconds": round(wall, 3),
        "gate_set": gs.name,
        "sigma": {"num_params": sigma.num_params, "exprs": [str(e) for e in sigma.exprs], "single_use": sigma.single_use},
        "seed": args.seed,
        "round_seconds": [round(t, 3) for t in gen.stats.round_seconds],
    }
    write_manifest(Path(args.out), args, extra)
    return EXIT_OK


def cmd_prune(args) -> int:
    es = load(args.input)
    before = es.counts()
    passes = tuple(p.strip() for p in args.passes.split(",") if p.strip())
    out = prune(es, passes=passes, mode=args.mode, param_permutations=args.param_permutations)
    save(out, args.out)
    after = out.counts()
    print(f"{before['circuits']} -> {after['circuits']} circuits, "
          f"{before['transformations']} -> {after['transformations']} transformations")
    write_manifest(Path(args.out), args, {"counts_before": before, "counts": after})
    return EXIT_OK


def audit(
    es: EccSet,
    backend: str,
    solver: SolverConfig,
    constant_phase_only: bool = False,
    seed: int | None = None,
    phase_tol: float = 1e-9,
):
    """Re-verify every member against its ECC's representative.  Returns (verified, refuted, inconclusive, failures)."""
    verified = refuted = inconclusive = 0
    failures = []
    verifiers: dict[tuple[int, int], Verifier] = {}
    try:
        for k, e in enumerate(es.eccs):
            key = (e.q, e.m)
            v = verifiers.get(key)
            if v is None:
                ctx = FingerprintContext(e.q, e.m, seed=es.seed if seed is None else seed, emax=es.emax or DEFAULT_EMAX)
                v = verifiers[key] = Verifier(ctx, solver, backend, tol=phase_tol, constant_phase_only=constant_phase_only)
            rep = e.representative
            for c in e.circuits[1:]:
                verdict = v.verify_pair(c, rep)
                if verdict.status == VERIFIED:
                    verified += 1
                elif verdict.status == INCONCLUSIVE:
                    inconclusive += 1
                    failures.append((k, c.text(), rep.text(), verdict))
                else:
                    refuted += 1
                    failures.append((k, c.text(), rep.text(), verdict))
    finally:
        for v in verifiers.values():
            v.close()
    return verified, refuted, inconclusive, failures


def cmd_verify(args) -> int:
    es = load(args.eccs)
    t0 = time.perf_counter()
    ok, bad, unk, failures = audit(es, args.backend, _solver(args), args.constant_phase_only, phase_tol=args.phase_tol)
    wall = time.perf_counter() - t0
    for k, c, rep, v in failures[:20]:
        cex = f" counterexample={v.counterexample}" if v.counterexample else ""
        print(f"ECC {k}: {v.status}: {c or '()'} vs {rep or '()'}{cex}")
    print(f"verified {ok}, refuted {bad}, inconclusive {unk} in {wall:.1f}s ({args.backend})")
    return EXIT_OK if not failures else EXIT_AUDIT


def cmd_preprocess(args) -> int:
    c = parse_qasm(_read_text(args.input))
    passes = tuple(p.strip() for p in args.passes.split(",") if p.strip())
    out = preprocess(c, args.gateset, passes)
    _write_text(args.out, emit_qasm(out))
    print(f"{len(c)} -> {len(out)} gates")
    write_manifest(Path(args.out), args, {"gates_in": len(c), "gates_out": len(out)})
    return EXIT_OK


def cmd_optimize(args) -> int:
    es = load(args.eccs)
    c = parse_qasm(_read_text(args.input))
    ts = extract_transformations(es)
    cfg = SearchConfig(gamma=args.gamma, timeout_s=args.timeout, seed=args.seed, max_iterations=args.max_iterations)
    res = optimize(c, ts, cfg, es.gate_set, progress=log.info)
    _write_text(args.out, emit_qasm(res.best))
    print(f"{res.initial_cost:g} -> {res.best_cost:g} gates ({res.iterations} iterations, {res.seconds:.1f}s)")
    write_manifest(Path(args.out), args, {
        "gates_in": res.initial_cost,
        "gates_out": res.best_cost,
        "iterations": res.iterations,
        "transformations": len(ts),
    })
    return EXIT_OK


def cmd_stats(args) -> int:
    es = load(args.eccs)
    counts = es.counts()
    reps = es.info.get("representatives", [])
    rows = [
        ("gate set", es.gate_set.name),
        ("n, q, m", f"{es.n}, {es.q}, {es.m}"),
        ("ECCs", counts["eccs"]),
        ("circuits", counts["circuits"]),
        ("transformations |T|", counts["transformations"]),
    ]
    if reps:
        rows.append((f"|R_{len(reps) - 1}|", reps[-1]))
        rows.append(("|R_j| per round", " ".join(map(str, reps))))
    if "ch" in es.info:
        rows.append(("characteristic", es.info["ch"]))
    manifest = Path(args.eccs + ".manifest.json")
    if manifest.is_file():
        # timings live in the manifest so the .eccs file stays deterministic
        secs = json.loads(manifest.read_text()).get("round_seconds")
        if secs:
            rows.append(("seconds per round", " ".join(f"{t:.2f}" for t in secs)))
    for k, v in rows:
        print(f"{k:22s} {v}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qsuperopt", description="Generate, verify, prune and apply quantum circuit transformations.")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="count", default=0)
    p.add_argument("--jobs", type=int, default=1, help="worker count (the search and generator run in one process)")
    p.add_argument("--solver", help="path to the SMT solver binary (default: $QSUPEROPT_SOLVER or z3 on PATH)")
    p.add_argument("--solver-timeout", type=float, default=30.0, help="per-query solver timeout in seconds")
    p.add_argument("--dump-smt", metavar="DIR", help="write every solver query to DIR")
    p.add_argument("--phase-tol", type=float, default=1e-9, help="tolerance when matching global-phase candidates")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="run the generator and write an .eccs file")
    g.add_argument("--gateset", default="nam", help="nam, ibm, rigetti, clifford_t or a JSON gate-set file")
    g.add_argument("--n", type=int, required=True, help="maximum gate count")
    g.add_argument("--q", type=int, required=True, help="qubit count")
    g.add_argument("--m", type=int, default=2, help="parameter count")
    g.add_argument("--seed", type=int, default=DEFAULT_SEED)
    g.add_argument("--emax", type=float, default=DEFAULT_EMAX)
    g.add_argument("--backend", choices=("algebraic", "smt", "both"), default="algebraic")
    g.add_argument("--prune", action="store_true", help="also run both pruning passes")
    g.add_argument("--mode", choices=BOUNDARY_MODES, default="sequence")
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_generate)

    r = sub.add_parser("prune", help="simplify ECCs and drop common-subcircuit transformations")
    r.add_argument("input", metavar="IN")
    r.add_argument("--out", required=True)
    r.add_argument("--passes", default="simplify,common")
    r.add_argument("--mode", choices=BOUNDARY_MODES, default="sequence")
    r.add_argument("--param-permutations", action="store_true", help="also merge ECCs equal up to a parameter permutation")
    r.set_defaults(func=cmd_prune)

    v = sub.add_parser("verify", help="re-verify every ECC of a file (audit)")
    v.add_argument("--eccs", required=True)
    v.add_argument("--backend", choices=("algebraic", "smt", "both"), default="smt")
    v.add_argument("--constant-phase-only", action="store_true")
    v.set_defaults(func=cmd_verify)

    pp = sub.add_parser("preprocess", help="transpile, expand Toffolis and merge rotations")
    pp.add_argument("--gateset", default="nam", choices=("nam", "ibm", "rigetti"))
    pp.add_argument("--in", dest="input", required=True)
    pp.add_argument("--out", required=True)
    pp.add_argument("--passes", default=",".join(DEFAULT_PASSES), help=f"comma list from {', '.join(PASSES)}")
    pp.set_defaults(func=cmd_preprocess)

    o = sub.add_parser("optimize", help="cost-bounded search with the transformations of an .eccs file")
    o.add_argument("--eccs", required=True)
    o.add_argument("--in", dest="input", required=True)
    o.add_argument("--out", required=True)
    o.add_argument("--gamma", type=float, default=1.0001)
    o.add_argument("--timeout", type=parse_duration, default=60.0, help="e.g. 600s, 10m")
    o.add_argument("--seed", type=int, default=None, help="shuffle ties among equal-cost circuits")
    o.add_argument("--max-iterations", type=int, default=None)
    o.set_defaults(func=cmd_optimize)

    s = sub.add_parser("stats", help="print counts of an .eccs file")
    s.add_argument("eccs")
    s.set_defaults(func=cmd_stats)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(message)s")
    if args.jobs < 1:
        parser.error("--jobs must be >= 1")
    if args.phase_tol <= 0:
        parser.error("--phase-tol must be positive")
    try:
        return args.func(args)
    except SolverConfigError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except VerifierDisagreement as exc:
        print(f"verifier routes disagree: {exc}", file=sys.stderr)
        return EXIT_AUDIT
    except (EccFileError, QasmError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (OptimizerError, PreprocessError, CircuitError, GateDefinitionError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
