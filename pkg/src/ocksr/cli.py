"""Command-line interface: ``ocksr {fit,score,rank,delta-opt,sweep,gen-data}``.

Exit status is 0 on success, 1 for domain errors (for instance a singular
kernel matrix) and 2 for usage or file errors.
"""

from __future__ import annotations

import argparse
import sys

from . import bench
from .errors import MalformedModelFile, NonBinaryLabel, OCKSRError, ParseError
from .kernel import KernelParams, as_samples, gram_matrix, median_bandwidth, normalize_features
from .linalg import extreme_eigenvalues
from .model import decide, fit_model, load_model, rank_training, save_model, score
from .ridge import delta_opt_general, delta_opt_normalized
from .trainer import StopRule

FILE_ERRORS = (OSError, MalformedModelFile, ParseError, NonBinaryLabel)


class UsageError(Exception):
    pass


def _csv_list(cast):
    def parse(text):
        try:
            return [cast(v) for v in str(text).split(",") if v.strip()]
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from exc

    return parse


def _add_data_flags(p):
    p.add_argument("--header", action="store_true", help="the CSV starts with a header row")
    p.add_argument(
        "--label-column",
        default=None,
        help="column (0-based index, or name with --header) holding 0/1 labels; it is excluded from the features",
    )
    p.add_argument("--normalize", action="store_true", help="scale every sample to unit l2 norm")


def _add_common(p):
    p.add_argument("--config", default=None, help="optional 'key = value' file; command-line flags take precedence")
    p.add_argument("--seed", type=int, default=42, help="seed for every random choice")


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = argparse.ArgumentParser(prog="ocksr", description="Robust one-class kernel spectral regression.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit a model on a training CSV", formatter_class=fmt)
    p.add_argument("train", help="training CSV")
    p.add_argument("-o", "--output", required=True, help="model file to write")
    p.add_argument(
        "--method",
        default="tikhonov",
        choices=["org", "tikhonov", "lasso", "tikhonov-plus", "lasso-plus"],
        help="fitting method",
    )
    p.add_argument("--delta", default="auto", help="Tikhonov weight: 'auto', 'auto-general' or a number")
    p.add_argument("--sigma", default="median", help="RBF bandwidth: 'median' or a number")
    p.add_argument("--sparsity", type=float, default=0.9, help="fraction of zero coefficients (lasso methods)")
    p.add_argument("--n0", type=int, default=None, help="known number of contaminations (plus methods)")
    p.add_argument("--quantile", type=float, default=0.05, help="training-response quantile used as threshold")
    p.add_argument("--tol", type=float, default=1e-6, help="convergence tolerance on the coefficient change")
    p.add_argument("--max-iter", type=int, default=100, help="iteration cap")
    _add_data_flags(p)
    _add_common(p)

    p = sub.add_parser("score", help="score query samples with a model", formatter_class=fmt)
    p.add_argument("model", help="model file")
    p.add_argument("query", help="query CSV")
    p.add_argument("--tau", type=float, default=None, help="decision threshold overriding the stored one")
    p.add_argument("-o", "--output", default=None, help="output CSV (standard output when omitted)")
    _add_data_flags(p)
    _add_common(p)

    p = sub.add_parser("rank", help="rank the training samples of a model", formatter_class=fmt)
    p.add_argument("model", help="model file")
    p.add_argument("-o", "--output", default=None, help="output CSV (standard output when omitted)")
    _add_common(p)

    p = sub.add_parser("delta-opt", help="report the sensitivity-optimal Tikhonov weights", formatter_class=fmt)
    p.add_argument("train", help="training CSV")
    p.add_argument("--sigma", default="median", help="RBF bandwidth: 'median' or a number")
    p.add_argument("--delta-floor", type=float, default=1e-8, help="value substituted for a non-positive optimum")
    _add_data_flags(p)
    _add_common(p)

    p = sub.add_parser("sweep", help="run the contamination sweep", formatter_class=fmt)
    p.add_argument("--levels", type=_csv_list(float), default="0.1,0.2,0.3,0.4,0.5", help="contamination levels")
    p.add_argument("--repeats", type=int, default=10, help="random splits per level")
    p.add_argument(
        "--methods",
        type=_csv_list(str),
        default="org,tikhonov,lasso,tikhonov_plus,lasso_plus,kmeans_baseline",
        help="methods to evaluate",
    )
    p.add_argument("--n-train", type=int, default=100, help="training set size")
    p.add_argument("--n-test", type=int, default=100, help="test set size (half targets, half outliers)")
    p.add_argument("--delta", default="auto", help="Tikhonov weight: 'auto', 'auto-general' or a number")
    p.add_argument("--sigma", default="median", help="RBF bandwidth: 'median' or a number")
    p.add_argument("--sparsity", type=float, default=0.9, help="fraction of zero coefficients (lasso methods)")
    p.add_argument("--kmeans-k", type=int, default=5, help="number of k-means centres")
    p.add_argument("--data", default=None, help="labelled CSV to sample from instead of synthetic data")
    p.add_argument("--d", type=int, default=10, help="synthetic feature dimension")
    p.add_argument("--separation", type=float, default=6.0, help="synthetic outlier-centre distance")
    p.add_argument("--clusters", type=int, default=4, help="number of synthetic outlier clusters")
    p.add_argument("--ranking", action="store_true", help="rank training samples instead of scoring a test set")
    p.add_argument("--timing", action="store_true", help="record wall-clock times (outputs stop being reproducible)")
    p.add_argument("--out-prefix", default="sweep", help="writes PREFIX.csv, PREFIX_summary.csv, PREFIX_plot.dat")
    _add_data_flags(p)
    _add_common(p)

    p = sub.add_parser("gen-data", help="write a synthetic labelled CSV", formatter_class=fmt)
    p.add_argument("-o", "--output", required=True, help="CSV to write (header, label column 'label')")
    p.add_argument("--n-target", type=int, default=100, help="number of targets")
    p.add_argument("--n-outlier", type=int, default=0, help="number of outliers")
    p.add_argument("--d", type=int, default=10, help="feature dimension")
    p.add_argument("--separation", type=float, default=6.0, help="outlier-centre distance")
    p.add_argument("--clusters", type=int, default=4, help="number of outlier clusters")
    _add_common(p)
    return parser


def read_config(path) -> dict:
    """Parse a ``key = value`` file; blank lines and ``#`` comments are ignored."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise UsageError(f"{path}:{lineno}: expected 'key = value'")
            out[key.strip()] = value.strip()
    return out


def _apply_config(parser, argv):
    args = parser.parse_args(argv)
    if not getattr(args, "config", None):
        return args
    try:
        values = read_config(args.config)
    except OSError as exc:
        raise UsageError(f"cannot read config: {exc}") from exc
    sub = parser._subparsers._group_actions[0].choices[args.command]
    actions = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, value in values.items():
        dest = key.lstrip("-").replace("-", "_")
        action = actions.get(dest)
        if action is None or dest in ("help", "config"):
            raise UsageError(f"unknown config key {key!r} for {args.command}")
        if action.nargs == 0:
            defaults[dest] = value.lower() in ("1", "true", "yes", "on")
        elif action.type is not None:
            try:
                defaults[dest] = action.type(value)
            except (ValueError, argparse.ArgumentTypeError) as exc:
                raise UsageError(f"bad value for {key!r}: {exc}") from exc
        else:
            defaults[dest] = value
    sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def _read_samples(args, path):
    label = args.label_column
    data = bench.load_csv(path, label_column=label, header=args.header)
    X = data.samples if isinstance(data, bench.LabeledSet) else data
    X = as_samples(X)
    return normalize_features(X) if args.normalize else X


def _open_out(path):
    return sys.stdout if path is None else open(path, "w", newline="", encoding="ascii")


def cmd_fit(args):
    X = _read_samples(args, args.train)
    method = args.method.replace("-", "_")
    model = fit_model(
        X,
        method,
        sigma=args.sigma,
        delta=args.delta,
        sparsity=args.sparsity,
        n0=args.n0,
        quantile=args.quantile,
        stop=StopRule(args.tol, args.max_iter),
    )
    save_model(model, args.output)
    rep = model.fit_report
    zeros = model.n - model.support.size
    print(f"method: {method}")
    print(f"samples: {model.n}  features: {model.d}  sigma: {model.params.sigma!r}")
    if rep is not None:
        print(f"iterations: {rep.iterations}  converged: {rep.converged}  final_error: {rep.final_error!r}")
        for note in rep.notes:
            print(f"note: {note}")
    else:
        print("iterations: 1  converged: True  final_error: 0.0")
    print(f"delta: {model.delta!r}")
    print(f"sparsity: {zeros}/{model.n} zero coefficients ({zeros / model.n:.4f})")
    print(f"tau: {model.tau!r}")
    if method.endswith("_plus"):
        print(f"identified_outliers ({len(model.identified_outliers)}): "
              + " ".join(str(i) for i in model.identified_outliers))
    print(f"model written to {args.output}")
    return 0


def cmd_score(args):
    model = load_model(args.model)
    Z = _read_samples(args, args.query)
    s = score(model, Z)
    tau = model.tau if args.tau is None else args.tau
    labels = decide(s, tau)
    out = _open_out(args.output)
    try:
        out.write("index,score,decision\n")
        for i, (v, lab) in enumerate(zip(s, labels)):
            out.write(f"{i},{float(v)!r},{int(lab)}\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def cmd_rank(args):
    model = load_model(args.model)
    ranked = rank_training(model)
    out = _open_out(args.output)
    try:
        out.write("rank,index,response\n")
        for r, (i, v) in enumerate(zip(ranked.order, ranked.responses), 1):
            out.write(f"{r},{int(i)},{float(v)!r}\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def cmd_delta_opt(args):
    X = _read_samples(args, args.train)
    params = median_bandwidth(X) if args.sigma == "median" else KernelParams(float(args.sigma))
    G = gram_matrix(X, params)
    es = extreme_eigenvalues(G.matrix)
    general, g_floor = delta_opt_general(es, args.delta_floor)
    print(f"sigma: {params.sigma!r}")
    print(f"lambda_min: {es.lambda_min!r}")
    print(f"lambda_max: {es.lambda_max!r}")
    print(f"condition: {es.condition!r}")
    print(f"delta_opt_general: {general!r}" + ("  [floor substituted]" if g_floor else ""))
    # unit-diagonal reading: the raw RBF Gram matrix already counts as normalised
    diag, d_floor = delta_opt_normalized(min(es.lambda_min, 1.0), args.delta_floor)
    print(f"delta_opt_normalized_unit_diagonal: {diag!r}" + ("  [floor substituted]" if d_floor else ""))
    # unit-spectral-norm reading, used by `fit --delta auto`
    spec, s_floor = delta_opt_normalized(min(es.lambda_min / es.lambda_max, 1.0), args.delta_floor)
    print(f"delta_opt_normalized_spectral: {spec!r}" + ("  [floor substituted]" if s_floor else ""))
    return 0


def cmd_sweep(args):
    cfg = bench.SweepConfig(
        contamination_levels=tuple(args.levels),
        repeats=args.repeats,
        methods=tuple(args.methods),
        master_seed=args.seed,
        n_train=args.n_train,
        n_test=args.n_test,
        sigma=args.sigma,
        delta=args.delta,
        sparsity=args.sparsity,
        kmeans_k=args.kmeans_k,
        normalize=args.normalize,
        record_timing=args.timing,
    )
    if args.data:
        label = args.label_column if args.label_column is not None else -1
        data = bench.load_csv(args.data, label_column=label, header=args.header)
        source = bench.PoolSource(data)
    else:
        source = bench.SyntheticSource(args.d, args.separation, args.clusters)
    runner = bench.run_ranking if args.ranking else bench.run_sweep
    result = runner(cfg, source)
    prefix = args.out_prefix
    bench.write_records_csv(result, f"{prefix}.csv")
    bench.write_summary_csv(result, f"{prefix}_summary.csv")
    bench.write_plot_data(result, f"{prefix}_plot.dat")
    for method in cfg.methods:
        print(f"{method}: grand mean AUC {result.grand_mean(method):.4f}")
    print(f"records: {len(result.records)}  failures: {len(result.failures)}")
    for method, level, repeat, message in result.failures[:20]:
        print(f"failed: {method} level={level} repeat={repeat}: {message}")
    print(f"wrote {prefix}.csv, {prefix}_summary.csv, {prefix}_plot.dat")
    return 0


def cmd_gen_data(args):
    data = bench.make_synthetic(args.n_target, args.n_outlier, args.d, args.separation, args.seed, args.clusters)
    bench.write_csv(args.output, data.samples, data.labels)
    print(f"wrote {len(data)} samples ({data.n_outliers} outliers) to {args.output}")
    return 0


COMMANDS = {
    "fit": cmd_fit,
    "score": cmd_score,
    "rank": cmd_rank,
    "delta-opt": cmd_delta_opt,
    "sweep": cmd_sweep,
    "gen-data": cmd_gen_data,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"ocksr: error: {exc}", file=sys.stderr)
        return 2
    except FILE_ERRORS as exc:
        print(f"ocksr: error: {exc}", file=sys.stderr)
        return 2
    except (OCKSRError, ValueError) as exc:
        print(f"ocksr: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
