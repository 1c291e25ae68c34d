"""Command-line interface: ``hierarch {build,sweep,baseline,synth,compare}``.

Exit codes: 0 success, 1 internal invariant violation, 2 bad input,
3 class-set mismatch in ``compare``.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import __version__
from .baselines import LINKAGES, agglomerate, euclidean_distance, l1_distance
from .engine import HierarchyConfig, InvariantError, trace_hierarchy
from .formats import FORMATS, from_json, render
from .hierarchy import TreeError, depth, internal_count, max_arity
from .matrix import (ConfusionMatrix, MatrixError, SimilarityMatrix, load_matrix,
                     similarity_from_counts, to_csv, to_json)
from .metrics import ClassSetMismatch, compare
from .synth import (IslandSpec, InvalidPartition, PlantedSpec, balanced_tree, gen_constant,
                    gen_islands, gen_planted, reference_counts, reference_similarity)

log = logging.getLogger("hierarch")

EXT = {"json": "json", "dot": "dot", "newick": "nwk", "ascii": "txt"}
EPSILON_ENV = "HIERARCH_EPSILON"


class UsageError(Exception):
    pass


def _epsilon() -> float:
    raw = os.environ.get(EPSILON_ENV)
    if raw is None:
        return 0.0
    try:
        value = float(raw)
    except ValueError:
        raise UsageError(f"{EPSILON_ENV} must be a number, got {raw!r}") from None
    if not value >= 0:
        raise UsageError(f"{EPSILON_ENV} must be >= 0")
    return value


def _nonneg_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not value >= 0:
        raise argparse.ArgumentTypeError(f"must be >= 0: {text!r}")
    return value


def _ratio_list(text: str) -> list[float]:
    parts = [p for p in text.split(",") if p.strip()]
    if not parts:
        raise argparse.ArgumentTypeError("ratio list is empty")
    return [_nonneg_float(p.strip()) for p in parts]


def _load_similarity(path: str, is_similarity: bool) -> SimilarityMatrix:
    m = load_matrix(path, "similarity" if is_similarity else None)
    if isinstance(m, ConfusionMatrix):
        return similarity_from_counts(m)
    return m


def _emit(text: str, output: str | None) -> None:
    if output is None or output == "-":
        sys.stdout.write(text)
    else:
        Path(output).write_text(text)


def _stats(tree) -> str:
    return (f"depth={depth(tree)} max_arity={max_arity(tree)} "
            f"internal_nodes={internal_count(tree)} leaves={sum(1 for _ in tree.leaves())}")


def _config(args, ratio: float | None = None) -> HierarchyConfig:
    return HierarchyConfig(ratio=args.ratio if ratio is None else ratio,
                           single_inheritance=args.mode == "sit", epsilon=_epsilon())


def run_build(args) -> int:
    s = _load_similarity(args.input, args.similarity)
    result = trace_hierarchy(s, _config(args))
    _emit(render(result.tree, args.format), args.output)
    print(f"n={s.n} iterations={result.iterations} {_stats(result.tree)}", file=sys.stderr)
    return 0


def format_ratio(r: float) -> str:
    return repr(float(r))


def run_sweep(args) -> int:
    s = _load_similarity(args.input, args.similarity)
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    configs = [_config(args, r) for r in args.ratios]
    with ThreadPoolExecutor(max_workers=max(1, args.jobs)) as pool:
        results = list(pool.map(lambda cfg: trace_hierarchy(s, cfg), configs))
    rows = ["ratio\tdepth\tmax_arity\tinternal_nodes\titerations"]
    for cfg, res in zip(configs, results):
        name = outdir / f"tree_r{format_ratio(cfg.ratio)}.{EXT[args.format]}"
        name.write_text(render(res.tree, args.format))
        rows.append(f"{format_ratio(cfg.ratio)}\t{depth(res.tree)}\t{max_arity(res.tree)}\t"
                    f"{internal_count(res.tree)}\t{res.iterations}")
    table = "\n".join(rows) + "\n"
    (outdir / "summary.tsv").write_text(table)
    sys.stdout.write(table)
    return 0


def run_baseline(args) -> int:
    cm = load_matrix(args.input, "counts")
    dist = euclidean_distance if args.method == "ed" else l1_distance
    tree = agglomerate(dist(cm, rates=args.rates), cm.labels, linkage=args.linkage)
    _emit(render(tree, args.format), args.output)
    print(f"n={cm.n} method={args.method} linkage={args.linkage} {_stats(tree)}", file=sys.stderr)
    return 0


def run_synth(args) -> int:
    truth = None
    if args.islands:
        m = gen_islands(IslandSpec.parse(args.islands, low=args.low, high=args.high, seed=args.seed))
    elif args.constant:
        m = gen_constant(args.constant, args.value, args.diag)
    elif args.planted:
        truth = balanced_tree(args.planted, args.arity)
        m = gen_planted(PlantedSpec(truth, args.noise, args.samples, args.seed))
    elif args.reference == "counts":
        m = reference_counts()
    else:
        m = reference_similarity()
    if isinstance(m, ConfusionMatrix):
        kind, values = "counts", m.counts
    else:
        kind, values = "similarity", m.s
    if args.format == "csv":
        text = to_csv(m.labels, values, integer=kind == "counts")
    else:
        text = to_json(m.labels, values, kind)
    _emit(text, args.output)
    if truth is not None and args.truth:
        Path(args.truth).write_text(render(truth, "json"))
    print(f"n={values.shape[0]} kind={kind}", file=sys.stderr)
    return 0


def _read_tree(path: str):
    try:
        return from_json(Path(path).read_text())
    except TreeError as exc:
        raise TreeError(f"{path}: {exc}") from None


def run_compare(args) -> int:
    report = compare(_read_tree(args.a), _read_tree(args.b))
    print(f"similarity: {report['similarity']:.6f}")
    print(f"canonical_equal: {'true' if report['canonical_equal'] else 'false'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hierarch",
                                description="Derive class hierarchies from confusion matrices.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def matrix_opts(sp):
        sp.add_argument("--input", required=True, help="CSV or JSON matrix file")
        sp.add_argument("--similarity", action="store_true",
                        help="input is already a similarity matrix (skip normalization)")
        sp.add_argument("--mode", choices=("sit", "mit"), default="sit",
                        help="single or multiple inheritance (default: sit)")
        sp.add_argument("--format", choices=FORMATS, default="json")

    b = sub.add_parser("build", help="build one hierarchy")
    matrix_opts(b)
    b.add_argument("--ratio", type=_nonneg_float, default=0.1, help="threshold ratio r (default 0.1)")
    b.add_argument("--output", help="output file (default: stdout)")
    b.set_defaults(func=run_build)

    sw = sub.add_parser("sweep", help="build one hierarchy per threshold ratio")
    matrix_opts(sw)
    sw.add_argument("--ratios", type=_ratio_list, required=True, help="comma-separated ratios")
    sw.add_argument("--outdir", required=True)
    sw.add_argument("--jobs", type=int, default=1, help="ratios evaluated concurrently")
    sw.set_defaults(func=run_sweep)

    bl = sub.add_parser("baseline", help="distance-based agglomerative baseline")
    bl.add_argument("--input", required=True, help="confusion counts (CSV or JSON)")
    bl.add_argument("--method", choices=("ed", "l1"), default="ed")
    bl.add_argument("--linkage", choices=LINKAGES, default="average")
    bl.add_argument("--rates", action="store_true", help="use row-normalized rates, not counts")
    bl.add_argument("--format", choices=FORMATS, default="json")
    bl.add_argument("--output")
    bl.set_defaults(func=run_baseline)

    sy = sub.add_parser("synth", help="generate a synthetic matrix")
    which = sy.add_mutually_exclusive_group(required=True)
    which.add_argument("--islands", help='block partition such as "0,1|2,3|4"')
    which.add_argument("--constant", type=int, metavar="N", help="N classes, constant off-diagonal")
    which.add_argument("--planted", type=int, metavar="N", help="N classes, balanced planted tree")
    which.add_argument("--reference", choices=("similarity", "counts"),
                       help="the six-class reference example")
    sy.add_argument("--seed", type=int, default=0)
    sy.add_argument("--low", type=float, default=0.01)
    sy.add_argument("--high", type=float, default=0.1)
    sy.add_argument("--value", type=float, default=0.05, help="off-diagonal value for --constant")
    sy.add_argument("--diag", type=float, default=0.0, help="diagonal value for --constant")
    sy.add_argument("--arity", type=int, default=2)
    sy.add_argument("--noise", type=float, default=0.1)
    sy.add_argument("--samples", type=int, default=10000)
    sy.add_argument("--truth", help="write the planted tree (JSON) here")
    sy.add_argument("--format", choices=("json", "csv"), default="json")
    sy.add_argument("--output")
    sy.set_defaults(func=run_synth)

    c = sub.add_parser("compare", help="compare two JSON trees")
    c.add_argument("a")
    c.add_argument("b")
    c.set_defaults(func=run_compare)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ClassSetMismatch as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except InvariantError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 1
    except (MatrixError, TreeError, InvalidPartition, UsageError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
