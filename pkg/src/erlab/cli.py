"""Command-line front end tying the modules into reproducible experiments.

Exit codes: 0 success or verified, 1 falsification witness found (a clique
where freeness is expected, a violating subset, a failed refutation), 2
inconclusive or budget exhausted, 3 usage error.  All randomness flows from
--seed through the seed-splitting scheme, so runs in deterministic mode
write byte-identical artifacts for any worker count.
"""

from __future__ import annotations

import argparse
import sys
from itertools import combinations

from . import bitdelta, coloring, extract, h4, search, stepup
from .bitdelta import OrderedVertexSet
from .parallel import default_threads
from .seeds import child_rng

EXIT_OK = 0
EXIT_FALSIFIED = 1
EXIT_INCONCLUSIVE = 2
EXIT_USAGE = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _kv(key, value):
    print(f"{key}={value}")


def build_parser() -> argparse.ArgumentParser:
    top = _Parser(prog="erlab")
    top.add_argument("--threads", type=int, default=None,
                     help="worker count (default: ERLAB_THREADS or 1)")
    top.add_argument("--deterministic", action="store_true", default=True)
    top.add_argument("--non-deterministic", dest="deterministic",
                     action="store_false")
    sub = top.add_subparsers(dest="command", required=True)

    props = sub.add_parser("props").add_subparsers(dest="sub", required=True)
    p = props.add_parser("check")
    p.add_argument("--which", required=True, choices=bitdelta.PROPERTIES)
    p.add_argument("--D", type=int, required=True, dest="width")
    p.add_argument("--budget", type=int, default=2_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_props_check)

    color = sub.add_parser("color").add_subparsers(dest="sub", required=True)
    p = color.add_parser("search")
    p.add_argument("--D", type=int, required=True, dest="size")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=int, default=50_000)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_color_search)
    p = color.add_parser("verify")
    p.add_argument("--coloring", required=True)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--mode", choices=("exhaustive", "sample"), default="exhaustive")
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=int, default=2_000_000)
    p.add_argument("--out", help="witness file on violation")
    p.set_defaults(fn=_cmd_color_verify)

    p = sub.add_parser("steiner")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_steiner)

    h4p = sub.add_parser("h4").add_subparsers(dest="sub", required=True)
    p = h4p.add_parser("edge")
    p.add_argument("--coloring", required=True)
    p.add_argument("--vertices", required=True,
                   help="four increasing integers, space separated")
    p.set_defaults(fn=_cmd_h4_edge)
    p = h4p.add_parser("window-check")
    p.add_argument("--coloring", required=True)
    p.add_argument("--D", type=int, required=True, dest="width")
    p.add_argument("--lo", type=int, default=0)
    p.add_argument("--hi", type=int, default=20)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_h4_window)
    p = h4p.add_parser("clique-search")
    p.add_argument("--coloring", required=True)
    p.add_argument("--D", type=int, required=True, dest="width")
    p.add_argument("--s", type=int, default=11, dest="size")
    p.add_argument("--strategy", choices=("window", "random", "delta-pruned"),
                   default="window")
    p.add_argument("--window", type=int, default=20)
    p.add_argument("--stride", type=int, default=10)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_h4_search)

    ext = sub.add_parser("extract").add_subparsers(dest="sub", required=True)
    for name in ("layers", "k5"):
        p = ext.add_parser(name)
        p.add_argument("--coloring", required=True)
        p.add_argument("--L", type=int, required=True, dest="levels")
        p.add_argument("--shrink", type=int, required=True)
        p.add_argument("--n", type=int, required=True, dest="run_cap")
        p.add_argument("--q-size", type=int, required=True)
        p.add_argument("--width", type=int, default=None,
                       help="vertex bit width (default: palette size)")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out")
        p.set_defaults(fn=_cmd_extract_layers if name == "layers"
                       else _cmd_extract_k5)

    st = sub.add_parser("stepup").add_subparsers(dest="sub", required=True)
    p = st.add_parser("build")
    p.add_argument("--base", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_stepup_build)
    p = st.add_parser("refute")
    p.add_argument("--base", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_stepup_refute)
    p = st.add_parser("bound")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--s", type=int, default=12)
    p.add_argument("--base-value", type=int, required=True)
    p.set_defaults(fn=_cmd_stepup_bound)

    p = sub.add_parser("report")
    p.add_argument("files", nargs="+")
    p.set_defaults(fn=_cmd_report)
    return top


def _cmd_props_check(args):
    report = bitdelta.check_property(args.which, args.width, budget=args.budget,
                                     seed=args.seed, workers=args.threads)
    lines = [
        ("property", report.name),
        ("D", report.width),
        ("mode", report.mode),
        ("examined", report.examined),
        ("passed", str(report.passed).lower()),
        ("counterexample", " ".join(map(str, report.counterexample))
         if report.counterexample else "none"),
        ("witness", " ".join(map(str, report.witness)) if report.witness else "none"),
    ]
    for k, v in lines:
        _kv(k, v)
    if args.out:
        text = "\n".join(f"{k}={v}" for k, v in lines) + "\n"
        with open(args.out, "wb") as fh:
            fh.write(text.encode("ascii"))
    if not report.passed:
        return EXIT_FALSIFIED
    if report.inconclusive:
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def _cmd_color_search(args):
    try:
        phi = coloring.search_coloring(args.size, args.n, args.seed, args.budget)
    except coloring.SearchBudgetError as err:
        _kv("status", "budget-exhausted")
        _kv("best_violations", err.best_violations)
        return EXIT_INCONCLUSIVE
    coloring.write_coloring(phi, args.out)
    _kv("status", "ok")
    _kv("file", args.out)
    _kv("iterations", phi.provenance.iterations)
    return EXIT_OK


def _cmd_color_verify(args):
    phi = coloring.read_coloring(args.coloring)
    n = args.n if args.n is not None else phi.provenance.verified_n
    if n is None:
        raise _UsageError("no --n given and the palette file carries none")
    outcome = coloring.verify_coloring(phi, n, args.mode, samples=args.samples,
                                       seed=args.seed, budget=args.budget,
                                       workers=args.threads)
    _kv("status", outcome.status)
    _kv("sets_checked", outcome.sets_checked)
    _kv("mode", outcome.mode)
    if outcome.status == "violation":
        _kv("violating", " ".join(map(str, outcome.violating)))
        if args.out:
            effort = search.Effort(f"verify:{outcome.mode}", args.seed,
                                   outcome.sets_checked, 0.0)
            wit = search.Witness("violating-n-set", outcome.violating, True, effort)
            search.write_witness(wit, args.out)
        return EXIT_FALSIFIED
    return EXIT_OK if outcome.ok else EXIT_INCONCLUSIVE


def _cmd_steiner(args):
    system = coloring.greedy_partial_steiner(args.n, args.seed)
    bound = (args.n * (args.n - 1) + 71) // 72
    _kv("n", args.n)
    _kv("blocks", len(system.blocks))
    _kv("bound", bound)
    _kv("valid", str(coloring.steiner_is_valid(system)).lower())
    if args.out:
        lines = [f"n={args.n} seed={args.seed} blocks={len(system.blocks)}"]
        lines += [" ".join(map(str, b)) for b in system.blocks]
        with open(args.out, "wb") as fh:
            fh.write(("\n".join(lines) + "\n").encode("ascii"))
    return EXIT_OK


def _cmd_h4_edge(args):
    phi = coloring.read_coloring(args.coloring)
    quad = tuple(int(tok) for tok in args.vertices.split())
    verdict, tag = h4.edge_predicate(phi, quad)
    _kv("edge", str(verdict).lower())
    _kv("rule", tag)
    return EXIT_OK


def _cmd_h4_window(args):
    phi = coloring.read_coloring(args.coloring)
    handle = h4.build_h4(args.width, phi)
    sub = h4.window_materialize(handle, args.lo, args.hi)
    agree = all(
        sub.has_edge(rel) == handle.has_edge(tuple(args.lo + r for r in rel))
        for rel in combinations(range(args.hi - args.lo), 4))
    _kv("window", f"[{args.lo},{args.hi})")
    _kv("edges", sub.edge_count())
    _kv("agreement", str(agree).lower())
    if args.out:
        h4.write_hypergraph(sub, args.out)
    return EXIT_OK if agree else EXIT_FALSIFIED


def _cmd_h4_search(args):
    phi = coloring.read_coloring(args.coloring)
    handle = h4.build_h4(args.width, phi)
    wit = search.find_clique(handle, args.size, args.strategy,
                             width=args.window, stride=args.stride,
                             samples=args.samples, seed=args.seed,
                             budget=args.budget, workers=args.threads)
    _kv("kind", wit.kind)
    _kv("vertices", " ".join(map(str, wit.vertices)))
    _kv("examined", wit.effort.tuples_examined)
    if args.out:
        search.write_witness(wit, args.out)
    if wit.kind == "clique":
        return EXIT_FALSIFIED
    if "inconclusive" in wit.note:
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def _random_vertex_set(num_vertices, size, width, seed):
    rng = child_rng(seed, "vertex-set")
    verts = sorted(rng.sample(range(num_vertices), size))
    return OrderedVertexSet(tuple(verts), width)


def _cmd_extract_layers(args):
    phi = coloring.read_coloring(args.coloring)
    width = args.width if args.width is not None else phi.size
    params = extract.ExtractParams(args.levels, args.shrink, args.run_cap)
    Q = _random_vertex_set(1 << width, args.q_size, width, args.seed)
    out = extract.layered_maxima(Q, params)
    entries = [("seed", str(args.seed))]
    if isinstance(out, extract.Obstruction):
        _kv("status", f"obstruction:{out.kind}")
        entries.append(("obstruction", f"{out.kind} level={out.level}"))
    else:
        _kv("status", "built")
        _kv("layers", " ".join(str(len(layer)) for layer in out.layers))
        entries += extract.trace_entries_for_layers(out)
        for which in ("blue", "green"):
            entries += extract.trace_entries_for_claims(
                extract.claim_forcing_check(phi, out, which))
    if args.out:
        extract.write_trace(extract.TraceDoc(tuple(entries)), args.out)
    return EXIT_OK


def _cmd_extract_k5(args):
    phi = coloring.read_coloring(args.coloring)
    width = args.width if args.width is not None else phi.size
    params = extract.ExtractParams(args.levels, args.shrink, args.run_cap)
    Q = _random_vertex_set(1 << width, args.q_size, width, args.seed)
    entries = [("seed", str(args.seed))]
    try:
        wit = extract.find_k5(phi, Q, params)
    except extract.ExtractionError as err:
        _kv("status", "failed")
        _kv("reason", str(err))
        entries.append(("status", "failed"))
        entries.append(("reason", str(err)))
        for step in err.trace:
            entries.append(("step", step))
        if args.out:
            extract.write_trace(extract.TraceDoc(tuple(entries)), args.out)
        return EXIT_FALSIFIED
    _kv("status", "ok")
    _kv("branch", wit.branch)
    _kv("vertices", " ".join(map(str, wit.vertices)))
    entries.append(("branch", wit.branch))
    for step in wit.steps:
        entries.append(("step", step))
    entries.append(("witness", " ".join(map(str, wit.vertices))))
    entries.append(("verified", "true"))
    if args.out:
        extract.write_trace(extract.TraceDoc(tuple(entries)), args.out)
    return EXIT_OK


def _cmd_stepup_build(args):
    base = h4.read_hypergraph(args.base)
    lift = stepup.build_stepup(base, args.k)
    h4.write_hypergraph(lift, args.out, base_path=args.base)
    _kv("k", lift.k)
    _kv("N", lift.num_vertices)
    _kv("file", args.out)
    return EXIT_OK


def _cmd_stepup_refute(args):
    base = h4.read_hypergraph(args.base)
    lift = stepup.build_stepup(base, args.k)
    n = search.brute_force_alpha_t(base, args.k, range(base.num_vertices))
    size = 4 * n * n
    _kv("alpha", n)
    _kv("q_size", size)
    if size > lift.num_vertices:
        raise _UsageError(f"4 n^2 = {size} exceeds the lifted vertex count")
    first = None
    for i in range(args.count):
        rng = child_rng(args.seed, "refute", i)
        Q = tuple(sorted(rng.sample(range(lift.num_vertices), size)))
        try:
            wit = stepup.refute_independent(lift, Q)
        except stepup.RefutationError as err:
            _kv("status", "failed")
            _kv("reason", str(err))
            return EXIT_FALSIFIED
        if first is None:
            first = wit
    _kv("status", "ok")
    _kv("branch", first.branch)
    _kv("clique", " ".join(map(str, first.vertices)))
    if args.out:
        effort = search.Effort("refute", args.seed, args.count, 0.0)
        search.write_witness(
            search.Witness("clique", first.vertices, True, effort,
                           note=f"branch={first.branch}"), args.out)
    return EXIT_OK


def _cmd_stepup_bound(args):
    value = stepup.iterate_bound(args.k, args.s, args.base_value)
    _kv("k", args.k)
    _kv("s", args.s)
    _kv("base", args.base_value)
    _kv("bound", value)
    return EXIT_OK


def _cmd_report(args):
    code = EXIT_OK
    for path in args.files:
        print(f"== {path}")
        with open(path, "rb") as fh:
            head = fh.readline().decode("ascii").strip()
        if head == "ER-WITNESS v1":
            wit = search.read_witness(path)
            _kv("kind", wit.kind)
            _kv("vertices", " ".join(map(str, wit.vertices)))
            _kv("verified", str(wit.verified).lower())
            _kv("strategy", wit.effort.strategy)
        elif head == "ER-TRACE v1":
            doc = extract.read_trace(path)
            for key, value in doc.entries:
                _kv(key, value)
        elif head == "ER-COLORING v1":
            phi = coloring.read_coloring(path)
            _kv("D", phi.size)
            _kv("verified", phi.provenance.verified)
            _kv("verified_n", phi.provenance.verified_n)
        elif head == "ER-HGRAPH v1":
            handle = h4.read_hypergraph(path)
            _kv("k", handle.k)
            _kv("N", handle.num_vertices)
            _kv("kind", handle.kind)
        else:
            _kv("error", f"unrecognized file {path}")
            code = EXIT_USAGE
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.threads is None:
            args.threads = default_threads()
        return args.fn(args)
    except _UsageError as err:
        print(f"usage error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
