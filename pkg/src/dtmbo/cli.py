"""Command-line entry point.

Subcommands: validate, graph, run, experiment, rs-scores, compare. Output is
machine-first (JSON-lines files) with a one-line human summary on stdout.
Exit codes: 0 success, 1 input error, 2 runtime failure.
"""

import argparse
import json
import sys

import numpy as np

from . import harness
from .dataset import ParseError, load_features, load_labels, make_partition, standardize
from .evaluation import format_rank_diagram, rank_diagram_data, rs_scores
from .graph import KernelSpec, build_knn_graph, write_graph_dump
from .mbo import run_dt_mbo

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_RUNTIME = 2


class _Parser(argparse.ArgumentParser):
    """argparse reports usage problems with exit code 2; remap to 1 so that
    every input error shares one code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_INPUT)


def _fail(message: str, code: int) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _format_flag(parser):
    parser.add_argument("--format", choices=("csv", "tsv"), default=None,
                        help="feature file format (default: by extension)")


def _infer_format(path, explicit):
    return explicit or ("tsv" if str(path).endswith(".tsv") else "csv")


def _add_override_flags(parser):
    parser.add_argument("--config", required=True, help="flat key = value config file")
    parser.add_argument("--features", dest="features_path", help="override features_path")
    parser.add_argument("--labels", dest="labels_path", help="override labels_path")
    parser.add_argument("--kernel", choices=("gaussian", "distance_correlation"))
    parser.add_argument("--sigma", type=float)
    parser.add_argument("--n-neighbors", type=int)
    parser.add_argument("--n-eigs", type=int)
    parser.add_argument("--normalization", choices=("unnormalized", "symmetric"))
    parser.add_argument("--dt", type=float)
    parser.add_argument("--fidelity-strength", type=float)
    parser.add_argument("--n-diffusion-substeps", type=int)
    parser.add_argument("--max-iterations", type=int)
    parser.add_argument("--tau-low", type=float)
    parser.add_argument("--tau-high", type=float)
    parser.add_argument("--tau-step", type=float)
    parser.add_argument("--n-splits", type=int)
    parser.add_argument("--labeled-fraction", type=float)
    parser.add_argument("--base-seed", type=int)
    parser.add_argument("--eigensolver", choices=("exact", "nystrom"))
    parser.add_argument("--n-landmarks", type=int)
    parser.add_argument("--seeds-file", dest="seeds_path", help="override seeds_path")


def _overrides_from_args(args) -> dict:
    keys = (
        "features_path", "labels_path", "kernel", "sigma", "n_neighbors", "n_eigs",
        "normalization", "dt", "fidelity_strength", "n_diffusion_substeps",
        "max_iterations", "tau_low", "tau_high", "tau_step", "n_splits",
        "labeled_fraction", "base_seed", "eigensolver", "n_landmarks", "seeds_path",
    )
    overrides = {}
    for key in keys:
        value = getattr(args, key, None)
        if value is not None:
            overrides[key] = value
    return overrides


def build_parser() -> _Parser:
    parser = _Parser(prog="dtmbo", description=__doc__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p_validate = sub.add_parser("validate", help="check input files, print shape and class stats")
    p_validate.add_argument("--features", required=True)
    p_validate.add_argument("--labels", required=True)
    _format_flag(p_validate)

    p_graph = sub.add_parser("graph", help="build the similarity graph and dump its edge list")
    p_graph.add_argument("--features", required=True)
    _format_flag(p_graph)
    p_graph.add_argument("--kernel", choices=("gaussian", "distance_correlation"),
                         default="gaussian")
    p_graph.add_argument("--sigma", type=float, help="gaussian bandwidth")
    p_graph.add_argument("--n-neighbors", type=int, default=10)
    p_graph.add_argument("--no-standardize", action="store_true",
                         help="build on raw features instead of standardized ones")
    p_graph.add_argument("--output", required=True, help="edge-list output path")

    p_run = sub.add_parser("run", help="one labeled/unlabeled split")
    _add_override_flags(p_run)
    p_run.add_argument("--seed", type=int, help="split seed (default: base_seed)")
    p_run.add_argument("--output", help="JSON-lines output (default: stdout record only)")

    p_exp = sub.add_parser("experiment", help="repeated-split experiment with aggregation")
    _add_override_flags(p_exp)
    p_exp.add_argument("--output", required=True, help="JSON-lines report path")
    p_exp.add_argument("--threads", type=int, default=1, help="split-level parallelism bound")
    p_exp.add_argument("--basis-cache", help="spectral basis cache file (.npz)")
    p_exp.add_argument("--method-name", help="method label for comparisons")
    p_exp.add_argument("--dataset-name", help="data set label for comparisons")

    p_rs = sub.add_parser("rs-scores", help="export residue/similarity scores")
    p_rs.add_argument("--features", required=True)
    p_rs.add_argument("--labels", required=True)
    _format_flag(p_rs)
    p_rs.add_argument("--output", required=True, help="JSON-lines output path")

    p_cmp = sub.add_parser("compare", help="Friedman/Nemenyi ranking across methods")
    p_cmp.add_argument("reports", nargs="+", help="JSON-lines score or report files")
    p_cmp.add_argument("--alpha", type=float, default=0.05)
    p_cmp.add_argument("--output-diagram", help="plain-text rank diagram data file")

    return parser


def cmd_validate(args) -> int:
    try:
        fm = load_features(args.features, _infer_format(args.features, args.format))
        labels, names = load_labels(args.labels)
    except (OSError, ParseError, ValueError) as exc:
        return _fail(str(exc), EXIT_INPUT)
    if labels.size != fm.n_samples:
        return _fail(
            f"feature file has {fm.n_samples} rows but label file has {labels.size}",
            EXIT_INPUT,
        )
    counts = np.bincount(labels)
    if counts.size < 2:
        return _fail("need >= 2 classes", EXIT_INPUT)
    minority = int(np.argmin(counts))
    ratio = counts.max() / counts.min()
    print(f"n_samples={fm.n_samples} n_features={fm.n_features} n_classes={counts.size}")
    for index, count in enumerate(counts):
        print(f"class {index} ({names[index]}): {count}")
    print(f"IR={ratio:.1f} minority_class={minority}")
    return EXIT_OK


def cmd_graph(args) -> int:
    try:
        fm = load_features(args.features, _infer_format(args.features, args.format))
        if not args.no_standardize:
            fm = standardize(fm)
        kernel = KernelSpec(kind=args.kernel,
                            sigma=args.sigma if args.kernel == "gaussian" else None)
        graph = build_knn_graph(fm, args.n_neighbors, kernel)
    except (OSError, ValueError) as exc:
        return _fail(str(exc), EXIT_INPUT)
    write_graph_dump(graph, args.output)
    print(f"n_vertices={graph.n} n_edges={graph.n_edges} output={args.output}")
    return EXIT_OK


def cmd_run(args) -> int:
    try:
        cfg = harness.load_config(args.config, _overrides_from_args(args))
        fm, labels, _ = harness.prepare_inputs(cfg)
        basis = harness.compute_basis(cfg, fm)
    except (OSError, ParseError, ValueError) as exc:
        return _fail(str(exc), EXIT_INPUT)
    seed = args.seed if args.seed is not None else cfg.base_seed
    try:
        partition = make_partition(labels, cfg.labeled_fraction, seed)
        sweep = run_dt_mbo(basis, partition, cfg.mbo, seed)
    except Exception as exc:
        return _fail(f"split with seed {seed} failed: {exc}", EXIT_RUNTIME)
    record = {
        "schema_version": harness.SCHEMA_VERSION,
        "record": "split",
        "seed": seed,
        "best_threshold": sweep.best_threshold,
        "best_score": sweep.best_score,
        "soft_auc": sweep.soft_auc,
        "thresholds": sweep.thresholds.tolist(),
        "scores": sweep.scores.tolist(),
        "predicted_labels": sweep.best_labels().tolist(),
        "degenerate": sweep.degenerate,
    }
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(json.dumps(record) + "\n")
    else:
        print(json.dumps(record))
    print(f"seed={seed} best_tau={sweep.best_threshold:g} "
          f"best_auc={sweep.best_score:.6f} soft_auc={sweep.soft_auc:.6f}")
    return EXIT_OK


def cmd_experiment(args) -> int:
    try:
        cfg = harness.load_config(args.config, _overrides_from_args(args))
    except (OSError, ParseError, ValueError) as exc:
        return _fail(str(exc), EXIT_INPUT)
    try:
        report = harness.run_experiment(cfg, n_threads=args.threads,
                                        basis_cache=args.basis_cache)
    except harness.SplitFailure as exc:
        return _fail(str(exc), EXIT_RUNTIME)
    except (OSError, ParseError, ValueError) as exc:
        return _fail(str(exc), EXIT_INPUT)
    harness.write_report(report, cfg, args.output,
                         method=args.method_name, dataset=args.dataset_name)
    print(f"mean_auc={report.mean_score:.6f} std={report.std_score:.6f} "
          f"median_tau={report.median_best_threshold:g} n_splits={report.n_splits}")
    return EXIT_OK


def cmd_rs_scores(args) -> int:
    try:
        fm = load_features(args.features, _infer_format(args.features, args.format))
        labels, _ = load_labels(args.labels)
        if labels.size != fm.n_samples:
            raise ValueError(
                f"feature file has {fm.n_samples} rows but label file has {labels.size}"
            )
        result = rs_scores(fm, labels)
    except (OSError, ParseError, ValueError) as exc:
        return _fail(str(exc), EXIT_INPUT)
    with open(args.output, "w", encoding="utf-8") as fh:
        for i in range(fm.n_samples):
            fh.write(json.dumps({
                "record": "rs_score",
                "index": i,
                "class": int(result.class_id[i]),
                "residue": result.residue[i],
                "similarity": result.similarity[i],
                "raw_residue": result.raw_residue[i],
                "raw_similarity": result.raw_similarity[i],
            }) + "\n")
    print(f"wrote {fm.n_samples} records to {args.output}")
    return EXIT_OK


def cmd_compare(args) -> int:
    if not 0.0 < args.alpha < 1.0:
        return _fail(f"alpha must lie in (0, 1), got {args.alpha}", EXIT_INPUT)
    try:
        scores = harness.read_method_scores(args.reports)
        table = harness.compare_methods(scores, alpha=args.alpha)
    except (OSError, ValueError) as exc:
        return _fail(str(exc), EXIT_INPUT)
    diagram = rank_diagram_data(table)
    for rank, method in zip(diagram.mean_ranks, diagram.methods):
        print(f"{rank:.6f} {method}")
    print(f"chi_sq={table.chi_sq:.6f} p_value={table.p_value:.6g} "
          f"CD={table.critical_distance:.6f} alpha={args.alpha:g}")
    if args.output_diagram:
        with open(args.output_diagram, "w", encoding="utf-8") as fh:
            fh.write(format_rank_diagram(diagram))
    return EXIT_OK


_HANDLERS = {
    "validate": cmd_validate,
    "graph": cmd_graph,
    "run": cmd_run,
    "experiment": cmd_experiment,
    "rs-scores": cmd_rs_scores,
    "compare": cmd_compare,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exit_request:
        # --help exits 0; usage errors were remapped to 1 by _Parser.error.
        return int(exit_request.code or 0)
    return _HANDLERS[args.subcommand](args)


if __name__ == "__main__":
    sys.exit(main())
