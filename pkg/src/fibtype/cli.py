"""Command-line entry point.

Exit codes: 0 success, 1 mismatch or failed check, 2 usage error, 3 resource
overflow. Flags take precedence over FIBTYPE_MAX_COSETS / FIBTYPE_EMBED_BUDGET.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .abelian import abelianization, abelian_order_via_resultant
from .classify import CrossCheckMismatch, classify, cross_check
from .coset import EnumerationLimits, EnumerationOverflow, enumerate_cosets
from .presentations import (
    ALT_FIBONACCI_WORD,
    ALT_SIERADSKI_WORD,
    CyclicPresentation,
    FibTypeParams,
    make_fib_presentation,
    parse_word,
    reduce_gcd,
    to_h_form,
)
from .spine import (
    build_alt_fibonacci_polyhedron,
    build_alt_sieradski_polyhedron,
    build_h_n1_polyhedron,
    verify_face_pairing,
)
from .whitehead import (
    DEFAULT_EMBED_BUDGET,
    EmbeddingBudgetExceeded,
    enumerate_spherical_embeddings,
    is_planar,
    is_three_connected,
    to_dot,
    whitehead_graph,
)

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE, EXIT_OVERFLOW = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2)


def _emit(obj, out: str | None = None) -> None:
    text = obj if isinstance(obj, str) else _dump(obj) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if raw is None or raw == "":
        return default
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{name}={raw!r} is not an integer")


def _limits(args) -> EnumerationLimits:
    mc = args.max_cosets if getattr(args, "max_cosets", None) is not None else _env_int("FIBTYPE_MAX_COSETS", 10**6)
    return EnumerationLimits(max_cosets=mc, max_time=getattr(args, "max_time", None))


def _embed_budget(args) -> int:
    if getattr(args, "budget", None) is not None:
        return args.budget
    return _env_int("FIBTYPE_EMBED_BUDGET", DEFAULT_EMBED_BUDGET)


def _params(args) -> FibTypeParams:
    if args.n < 1:
        raise UsageError("n must be >= 1")
    return FibTypeParams(args.n, args.m, args.k)


def _add_triple(p: argparse.ArgumentParser) -> None:
    p.add_argument("n", type=int)
    p.add_argument("m", type=int)
    p.add_argument("k", type=int)


def _parse_range(text: str) -> range:
    try:
        if ".." in text:
            a, b = text.split("..", 1)
            lo, hi = int(a), int(b)
        else:
            lo = hi = int(text)
    except ValueError:
        raise UsageError(f"bad range {text!r}; expected A..B")
    if lo < 1 or hi < lo:
        raise UsageError(f"bad range {text!r}; need 1 <= A <= B")
    return range(lo, hi + 1)


# --- commands ----------------------------------------------------------------------


def cmd_classify(args) -> int:
    v = classify(_params(args))
    out = v.to_json()
    code = EXIT_OK
    if args.check:
        try:
            out["cross_check"] = cross_check(v, _limits(args), obstructions=not args.no_obstructions).to_json()
        except CrossCheckMismatch as exc:
            out["cross_check"] = exc.report.to_json()
            code = EXIT_MISMATCH
    _emit(out)
    return code


def cmd_abelianize(args) -> int:
    p = _params(args)
    inv = abelianization(make_fib_presentation(p))
    out = {"params": list(p.as_tuple()), "abelianization": inv.to_json(), "label": str(inv)}
    out["resultant_order"] = abelian_order_via_resultant(p)
    _emit(out)
    return EXIT_OK if out["resultant_order"] == inv.order else EXIT_MISMATCH


def cmd_enumerate(args) -> int:
    p = _params(args)
    pres = make_fib_presentation(p).to_general()
    if args.quotient:
        pres = pres.with_relators([parse_word(w, p.n) for w in args.quotient])
    subgroup = [parse_word(w, p.n) for w in args.subgroup]
    t = enumerate_cosets(pres, subgroup, _limits(args), strategy=args.strategy)
    out = {"params": list(p.as_tuple()), "table": t.to_json(), "elapsed": round(t.elapsed, 3)}
    if args.quotient:
        out["quotient_by"] = list(args.quotient)
    if subgroup:
        out["subgroup"] = list(args.subgroup)
    _emit(out)
    return EXIT_OK if t.is_complete else EXIT_OVERFLOW


def _whitehead_json(p: FibTypeParams) -> dict:
    g = whitehead_graph(make_fib_presentation(p))
    planar, witness = is_planar(g)
    return {
        "params": list(p.as_tuple()),
        "vertices": [str(v) for v in g.vertices],
        "edges": [{"u": str(e.u), "v": str(e.v), "relator": e.provenance[0], "pos": e.provenance[1]} for e in g.edges],
        "planar": planar,
        "three_connected": is_three_connected(g),
        "witness": witness.to_json() if witness else None,
    }


def cmd_whitehead(args) -> int:
    _emit(_whitehead_json(_params(args)))
    return EXIT_OK


def _embeddings_json(p: FibTypeParams, budget: int, limit: int | None) -> dict:
    g = whitehead_graph(make_fib_presentation(p))
    embs = enumerate_spherical_embeddings(g, budget=budget, limit=limit)
    return {
        "params": list(p.as_tuple()),
        "count": len(embs),
        "embeddings": [e.to_json() for e in embs],
    }


def cmd_embeddings(args) -> int:
    _emit(_embeddings_json(_params(args), _embed_budget(args), args.limit))
    return EXIT_OK


def _polyhedron(args):
    fam = args.family
    size = args.m if args.m is not None else args.n
    if size is None:
        raise UsageError("polyhedron needs --m (alt families) or --n (h1)")
    try:
        if fam == "h1":
            return build_h_n1_polyhedron(size), make_fib_presentation(FibTypeParams(size, 1, 1))
        if fam == "altfib":
            return build_alt_fibonacci_polyhedron(size), CyclicPresentation(size, ALT_FIBONACCI_WORD)
        if fam == "altsier":
            return build_alt_sieradski_polyhedron(size), CyclicPresentation(size, ALT_SIERADSKI_WORD)
    except ValueError as exc:
        raise UsageError(str(exc))
    raise UsageError(f"unknown family {fam!r}")


def cmd_polyhedron(args) -> int:
    c, p = _polyhedron(args)
    cert = verify_face_pairing(c, p)
    out = cert.to_json()
    out["edge_cycles"] = [cert.cycle_text(c, cy) for cy in cert.edge_cycles]
    _emit(out)
    return EXIT_OK if cert.ok else EXIT_MISMATCH


def cmd_export(args) -> int:
    fmt = "dot" if args.dot else "json"
    if args.what == "polyhedron":
        if fmt == "dot":
            raise UsageError("polyhedra export as JSON only")
        c, _ = _polyhedron(args)
        _emit(c.to_json(), args.out)
        return EXIT_OK
    if len(args.params) != 3:
        raise UsageError(f"export {args.what} needs n m k")
    n, m, k = args.params
    if n < 1:
        raise UsageError("n must be >= 1")
    p = FibTypeParams(n, m, k)
    if args.what == "whitehead":
        if fmt == "dot":
            g = whitehead_graph(make_fib_presentation(p))
            _emit(to_dot(g, name=f"W_{n}_{p.m}_{p.k}"), args.out)
        else:
            _emit(_whitehead_json(p), args.out)
        return EXIT_OK
    if args.what == "embedding":
        if fmt == "dot":
            g = whitehead_graph(make_fib_presentation(p))
            embs = enumerate_spherical_embeddings(g, budget=_embed_budget(args))
            if not embs:
                raise UsageError("graph is non-planar; no embedding to export")
            _emit(to_dot(g, embs[0], name=f"E_{n}_{p.m}_{p.k}"), args.out)
        else:
            _emit(_embeddings_json(p, _embed_budget(args), None), args.out)
        return EXIT_OK
    raise UsageError(f"cannot export {args.what!r}")


# --- batch -------------------------------------------------------------------


@dataclass
class RunRecord:
    params: tuple
    verdict: dict
    evidence: dict
    digest: str
    started: float
    finished: float
    version: str

    def to_json(self) -> dict:
        return {
            "params": list(self.params),
            "verdict": self.verdict,
            "evidence": self.evidence,
            "digest": self.digest,
            "started": self.started,
            "finished": self.finished,
            "version": self.version,
        }


def record_digest(verdict: dict, evidence: dict) -> str:
    blob = json.dumps({"verdict": verdict, "evidence": evidence}, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def run_triple(job: tuple) -> dict:
    (n, m, k), max_cosets, obstructions = job
    started = time.time()
    v = classify(FibTypeParams(n, m, k))
    evidence: dict = {}
    try:
        rep = cross_check(v, EnumerationLimits(max_cosets=max_cosets), obstructions=obstructions)
        evidence["cross_check"] = rep.to_json()
    except CrossCheckMismatch as exc:
        evidence["cross_check"] = exc.report.to_json()
    except EnumerationOverflow as exc:
        evidence["cross_check"] = {"passed": None, "overflow": exc.table.to_json()}
    verdict = v.to_json()
    rec = RunRecord((n, m, k), verdict, evidence, record_digest(verdict, evidence), started, time.time(), __version__)
    return rec.to_json()


def _matches_filter(t: tuple, filt: str | None) -> bool:
    if filt is None:
        return True
    if filt == "h-form":
        p = FibTypeParams(*t)
        d, _ = reduce_gcd(p)
        return d == 1 and to_h_form(p) is not None
    raise UsageError(f"unknown filter {filt!r}")


def _load_done(path: Path) -> dict:
    done = {}
    if not path.exists():
        return done
    try:
        with path.open() as fh:
            for line_no, line in enumerate(fh, 1):
                if not line.strip():
                    continue
                rec = json.loads(line)
                if rec.get("digest") == record_digest(rec["verdict"], rec["evidence"]):
                    done[tuple(rec["params"])] = rec
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        raise OSError(f"{path}: cannot resume from existing file ({exc})")
    return done


def cmd_batch(args) -> int:
    ns = _parse_range(args.n)
    triples = [(n, m, k) for n in ns for m in range(n) for k in range(n)]
    triples = [t for t in triples if _matches_filter(t, args.filter)]
    path = Path(args.out)
    done = {} if args.force else _load_done(path)
    todo = [t for t in triples if t not in done]
    mc = _limits(args).max_cosets
    jobs = [(t, mc, args.obstructions) for t in todo]
    try:
        if args.jobs > 1 and len(jobs) > 1:
            with ProcessPoolExecutor(args.jobs) as pool:
                fresh = list(pool.map(run_triple, jobs, chunksize=8))
        else:
            fresh = [run_triple(j) for j in jobs]
        new = {tuple(r["params"]): r for r in fresh}
        records = [done.get(t) or new[t] for t in triples]
        # rewrite in deterministic (n, m, k) order; records outside this run are kept after
        extra = [r for t, r in sorted(done.items()) if t not in set(triples)]
        tmp = path.with_suffix(path.suffix + ".tmp")
        with tmp.open("w") as fh:
            for r in records + extra:
                fh.write(json.dumps(r, sort_keys=True) + "\n")
        tmp.replace(path)
    except OSError as exc:
        print(f"error: {path}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    failed = [r["params"] for r in fresh if r["evidence"]["cross_check"].get("passed") is False]
    summary = {"out": str(path), "records": len(records), "computed": len(fresh), "skipped": len(triples) - len(fresh), "mismatches": failed}
    print(json.dumps(summary, sort_keys=True), file=sys.stderr)
    return EXIT_MISMATCH if failed else EXIT_OK


# --- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="fibtype", description="Classify the groups of Fibonacci type G_n(m,k).")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("classify", help="group and spine verdict as JSON")
    _add_triple(p)
    p.add_argument("--check", action="store_true", help="recompute the verdict's claims")
    p.add_argument("--no-obstructions", action="store_true", help="with --check, skip spine obstructions")
    p.add_argument("--max-cosets", type=int)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("batch", help="sweep triples into a JSON-lines file")
    p.add_argument("--n", required=True, help="range of n, e.g. 1..12")
    p.add_argument("--out", required=True)
    p.add_argument("--force", action="store_true", help="recompute existing records")
    p.add_argument("--filter", choices=["h-form"])
    p.add_argument("--obstructions", action="store_true", help="also run spine obstructions")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--max-cosets", type=int)
    p.set_defaults(func=cmd_batch)

    p = sub.add_parser("abelianize", help="abelian invariants of G_n(m,k)")
    _add_triple(p)
    p.set_defaults(func=cmd_abelianize)

    p = sub.add_parser("enumerate", help="coset enumeration")
    _add_triple(p)
    p.add_argument("--subgroup", action="append", default=[], metavar="WORD")
    p.add_argument("--quotient", action="append", default=[], metavar="WORD", help="extra relator")
    p.add_argument("--strategy", choices=["hlt", "felsch"], default="hlt")
    p.add_argument("--max-cosets", type=int)
    p.add_argument("--max-time", type=float)
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("whitehead", help="Whitehead graph and planarity")
    _add_triple(p)
    p.set_defaults(func=cmd_whitehead)

    p = sub.add_parser("embeddings", help="spherical embeddings of the Whitehead graph")
    _add_triple(p)
    p.add_argument("--budget", type=int)
    p.add_argument("--limit", type=int)
    p.set_defaults(func=cmd_embeddings)

    p = sub.add_parser("polyhedron", help="verify a face-pairing polyhedron")
    p.add_argument("--family", choices=["h1", "altfib", "altsier"], required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)
    p.set_defaults(func=cmd_polyhedron)

    p = sub.add_parser("export", help="write DOT or JSON")
    p.add_argument("what", choices=["whitehead", "embedding", "polyhedron"])
    p.add_argument("params", type=int, nargs="*")
    fmt = p.add_mutually_exclusive_group()
    fmt.add_argument("--dot", action="store_true")
    fmt.add_argument("--json", action="store_true")
    p.add_argument("--family", choices=["h1", "altfib", "altsier"])
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--budget", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_export)
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
        if not getattr(args, "func", None):
            ap.print_help(sys.stderr)
            return EXIT_USAGE
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except EnumerationOverflow as exc:
        print(f"resource overflow: {exc}", file=sys.stderr)
        return EXIT_OVERFLOW
    except EmbeddingBudgetExceeded as exc:
        print(f"resource overflow: {exc}", file=sys.stderr)
        return EXIT_OVERFLOW


if __name__ == "__main__":
    sys.exit(main())
