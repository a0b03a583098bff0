"""Command-line interface: simulate, fit, predict, eval, hfit, benchmark.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
Every command is deterministic given its flags and seed.
"""

import argparse
import json
import sys
from dataclasses import fields

import numpy as np

from . import baselines, benchmark, hier, metrics, model, serialize, simulate
from .exceptions import CholeskyFailure, DataFormatError, NonFiniteLoglik
from .hyper import PriorConfig
from .util import wrap_angle


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def _fit_config(args):
    prior_kwargs = {}
    fit_kwargs = {
        "iters": args.iters,
        "burnin": args.burnin,
        "thin": args.thin,
    }
    if getattr(args, "config", None):
        with open(args.config) as fh:
            overrides = json.load(fh)
        prior_names = {f.name for f in fields(PriorConfig)}
        fit_names = {f.name for f in fields(model.FitConfig)} - {"priors"}
        for key, val in overrides.items():
            if key in prior_names:
                prior_kwargs[key] = val
            elif key in fit_names:
                fit_kwargs.setdefault(key, val)
            else:
                raise DataFormatError(
                    f"unknown config key {key!r}", path=args.config
                )
    return model.FitConfig(priors=PriorConfig(**prior_kwargs), **fit_kwargs)


def _cmd_simulate(args):
    rng_seed = args.seed
    if args.function == "log":
        x = 2.5 * simulate.gen_lhs(args.n, (0.0, 1.0), rng_seed)
        inst = simulate.gen_log(x, rng_seed + 1, noise_sd=args.noise_sd)
    elif args.function == "log-gap":
        inst = simulate.gen_log_gapped(args.n, rng_seed, noise_sd=args.noise_sd)
    elif args.function == "wgp":
        x = simulate.gen_lhs(args.n, (0.0, 1.0), rng_seed)
        inst = simulate.gen_wgp_instance(
            x, args.alpha, args.beta, args.theta, args.tau2, args.sigma2, args.nu,
            rng_seed + 1,
        )
    else:  # rfid
        distances = simulate.gen_lhs(args.tests, (args.d_lo, args.d_hi), rng_seed)
        rfid = simulate.gen_rfid_like(
            distances, rng_seed + 1, censor_frac=args.censor_frac
        )
        serialize.save_grouped(args.out, rfid.datasets, rfid.distances)
        return 0
    serialize.save_dataset(args.out, inst.data)
    if args.with_truth:
        serialize.save_truth(args.out + ".truth.csv", inst.data.x, inst.z, inst.k)
    return 0


def _cmd_fit(args):
    data = serialize.load_dataset(args.data, degrees=args.degrees, negate=args.negate)
    cfg = _fit_config(args)
    if args.method == "wgp":
        trace = model.fit(data, cfg, args.seed, negate=args.negate)
    elif args.method == "coupled":
        trace = baselines.fit_coupled(
            data, cfg, args.seed, coupled=baselines.CoupledConfig(window=args.window)
        )
        trace.negate = args.negate
    else:
        trace = baselines.fit_ordinary(data, cfg, args.seed)
        trace.negate = args.negate
    serialize.save_trace(args.out, trace)
    return 0


def _load_points(path):
    lines = open(path).read().splitlines()
    if not lines:
        raise DataFormatError("empty points file", path=path, lineno=1)
    header = [c.strip() for c in lines[0].split(",")]
    if "x" not in header:
        raise DataFormatError("missing column 'x'", path=path, lineno=1)
    col = header.index("x")
    xs = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        toks = line.split(",")
        try:
            xs.append(float(toks[col]))
        except (ValueError, IndexError) as err:
            raise DataFormatError(
                f"column 'x': bad value", path=path, lineno=lineno
            ) from err
    return np.asarray(xs)


def _unnegate(result):
    """Map predictions fitted on negated responses back to the original
    orientation (wrapped summaries and retained draws only)."""
    lo = wrap_angle(-result.hi95)
    hi = wrap_angle(-result.lo95)
    result.mean_wrapped = wrap_angle(-result.mean_wrapped)
    result.lo95 = lo
    result.hi95 = hi
    if result.y_samples is not None:
        result.y_samples = -result.y_samples
    return result


def _cmd_predict(args):
    data = serialize.load_dataset(args.data, degrees=args.degrees)
    trace = serialize.load_trace(args.trace, for_data=data)
    if trace.negate:
        data = serialize.load_dataset(args.data, degrees=args.degrees, negate=True)
        trace = serialize.load_trace(args.trace, for_data=data)
    if args.grid is not None:
        xnew = np.linspace(data.x_lo, data.x_hi, args.grid)
    else:
        xnew = _load_points(args.points)
    if trace.method == "wgp":
        result = model.predict(trace, data, xnew, args.seed)
    elif trace.method == "coupled":
        result = baselines.predict_coupled(trace, data, xnew, args.seed)
    else:
        result = baselines.predict_ordinary(trace, data, xnew, args.seed)
    if trace.negate:
        result = _unnegate(result)
    serialize.save_predictions(args.out, result)
    if args.samples_out:
        serialize.save_samples(args.samples_out, result.x, result.y_samples)
    return 0


def _cmd_eval(args):
    pred = serialize.load_predictions(args.pred)
    truth = serialize.load_dataset(args.truth, degrees=args.degrees)
    if truth.n != pred.x.size or not np.allclose(truth.x, pred.x, atol=1e-9):
        raise DataFormatError(
            "prediction and truth files disagree on x", path=args.truth
        )
    xs, samples = serialize.load_samples(args.samples)
    if samples.shape[0] != truth.n or not np.allclose(xs, pred.x, atol=1e-9):
        raise DataFormatError(
            "samples file disagrees with predictions on x", path=args.samples
        )
    resid = metrics.circ_residual(truth.y, pred.mean_wrapped)
    mse = float(np.mean(resid * resid))
    report = metrics.ScoreReport(
        n_test=truth.n,
        rmse_circular=mse,
        rmse_circular_sqrt=float(np.sqrt(mse)),
        crps=metrics.crps(truth.y, samples),
        residuals=resid,
    )
    serialize.save_scores(args.out, report)
    return 0


def _cmd_hfit(args):
    datasets, distances = serialize.load_grouped(
        args.data, degrees=args.degrees, negate=args.negate
    )
    cfg = hier.HierConfig(fit=_fit_config(args), sigma_beta_sq=args.sigma_beta_sq)
    htrace = hier.hier_fit(datasets, distances, cfg, args.seed)
    serialize.save_hier_trace(args.out, htrace)
    return 0


def _cmd_benchmark(args):
    sizes = [int(s) for s in args.sizes.split(",")]
    methods = [m.strip() for m in args.methods.split(",")]
    for m in methods:
        if m not in benchmark.METHODS:
            raise DataFormatError(f"unknown method {m!r}")
    rows = benchmark.run_benchmark(
        args.function,
        sizes,
        args.reps,
        methods,
        args.seed,
        args.iters,
        args.burnin,
        args.thin,
        workers=args.workers,
    )
    benchmark.write_table(args.out, rows)
    stem = args.out[: -len(".csv")] if args.out.endswith(".csv") else args.out
    benchmark.write_boxplot(stem + "_rmse_boxplot.txt", rows, "rmse_circular")
    benchmark.write_boxplot(stem + "_crps_boxplot.txt", rows, "crps")
    return 0


def _add_mcmc_flags(p, iters=10000, burnin=5000, thin=10):
    p.add_argument("--iters", type=int, default=iters)
    p.add_argument("--burnin", type=int, default=burnin)
    p.add_argument("--thin", type=int, default=thin)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config", help="JSON file with prior/step overrides")


def build_parser():
    parser = _Parser(prog="circgp", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate synthetic datasets")
    p.add_argument("--function", required=True, choices=["log", "log-gap", "wgp", "rfid"])
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--with-truth", action="store_true", dest="with_truth")
    p.add_argument("--noise-sd", type=float, default=0.5, dest="noise_sd")
    p.add_argument("--alpha", type=float, default=10.0)
    p.add_argument("--beta", type=float, default=20.0)
    p.add_argument("--theta", type=float, default=0.01)
    p.add_argument("--tau2", type=float, default=1.0)
    p.add_argument("--sigma2", type=float, default=0.05)
    p.add_argument("--nu", type=float, default=5.0)
    p.add_argument("--tests", type=int, default=10)
    p.add_argument("--d-lo", type=float, default=1.0, dest="d_lo")
    p.add_argument("--d-hi", type=float, default=8.0, dest="d_hi")
    p.add_argument("--censor-frac", type=float, default=0.15, dest="censor_frac")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("fit", help="fit a model by MCMC")
    p.add_argument("--data", required=True)
    p.add_argument("--method", default="wgp", choices=["wgp", "coupled", "ordinary"])
    p.add_argument("--out", required=True)
    p.add_argument("--negate", action="store_true")
    p.add_argument("--degrees", action="store_true")
    p.add_argument("--window", type=int, default=3)
    _add_mcmc_flags(p)
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("predict", help="posterior prediction at new inputs")
    p.add_argument("--trace", required=True)
    p.add_argument("--data", required=True, help="the training data file")
    p.add_argument("--out", required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--grid", type=int)
    group.add_argument("--points")
    p.add_argument("--samples-out", dest="samples_out")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--degrees", action="store_true")
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("eval", help="score predictions against observations")
    p.add_argument("--pred", required=True)
    p.add_argument("--truth", required=True, help="x,y file of held-out observations")
    p.add_argument("--samples", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--degrees", action="store_true")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("hfit", help="hierarchical fit over grouped tests")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--sigma-beta-sq", type=float, default=0.1, dest="sigma_beta_sq")
    p.add_argument("--negate", action="store_true")
    p.add_argument("--degrees", action="store_true")
    _add_mcmc_flags(p, iters=2000, burnin=1000, thin=2)
    p.set_defaults(func=_cmd_hfit)

    p = sub.add_parser("benchmark", help="multi-method scoring experiment")
    p.add_argument("--function", required=True, choices=["log", "log-gap"])
    p.add_argument("--sizes", default="50,100,200")
    p.add_argument("--reps", type=int, default=10)
    p.add_argument("--methods", default="wgp,coupled,ordinary")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--iters", type=int, default=4000)
    p.add_argument("--burnin", type=int, default=2000)
    p.add_argument("--thin", type=int, default=5)
    p.add_argument("--workers", type=int, default=None,
                   help="worker processes (default: CIRCGP_WORKERS or 1)")
    p.set_defaults(func=_cmd_benchmark)

    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return err.code if err.code is not None else 1
    try:
        return args.func(args)
    except DataFormatError as err:
        sys.stderr.write(f"data error: {err}\n")
        return 2
    except (CholeskyFailure, NonFiniteLoglik) as err:
        sys.stderr.write(f"numerical failure: {type(err).__name__}: {err}\n")
        return 3


if __name__ == "__main__":
    sys.exit(main())
