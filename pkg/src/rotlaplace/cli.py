"""Command-line front end.

Exit codes: 0 success, 2 input or configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path

import numpy as np

from . import distributions as D
from . import experiments as X
from .exceptions import DegenerateSvd, InvalidResolution, InvalidRotation, NoProgress
from .fit import FitConfig, fit_mle
from .grid import hopf_so3_grid, s3_grid, write_grid_bin, write_grid_csv
from .records import InputError, read_param, read_rotations, write_rotations, write_table
from .so3 import canonical_quat, rotmat_to_quat

EXIT_INPUT = 2
EXIT_NUMERIC = 3


class ConfigError(ValueError):
    pass


def _floats(text):
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _load_config(path):
    if path is None:
        return {}
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"{path}: cannot open ({exc.strerror})") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}, line {exc.lineno}: invalid JSON ({exc.msg})") from exc


def _pick(args, cfg, name, default=None):
    value = getattr(args, name, None)
    if value is not None:
        return value
    return cfg.get(name, default)


def _level(args, cfg=None):
    if args.level is not None:
        return args.level
    return (cfg or {}).get("level", 3)


def _fit_config(args, cfg, kind):
    init = _pick(args, cfg, "init", "spread")
    return FitConfig(
        kind=kind,
        level=_level(args, cfg),
        step=float(_pick(args, cfg, "step", 10.0)),
        max_iter=int(_pick(args, cfg, "max_iter", 300)),
        tol=float(_pick(args, cfg, "tol", 1e-4)),
        init=init,
    )


# --------------------------------------------------------------------------


def cmd_grid(args):
    grid = hopf_so3_grid(_level(args))
    if args.format == "csv":
        write_grid_csv(args.out, grid)
    else:
        write_grid_bin(args.out, grid)
    print(f"wrote {len(grid)} rotations (level {grid.level}) to {args.out}")


def cmd_density(args):
    param = read_param(args.param)
    records = read_rotations(args.query)
    kind = args.dist
    if kind in D.SO3_KINDS:
        if not isinstance(param, D.So3Param):
            raise ConfigError(f"distribution {kind!r} needs an 'A' parameter")
        grid = hopf_so3_grid(_level(args))
        lp = D.log_prob(kind, param, records.rotations, grid)
    else:
        if isinstance(param, D.So3Param):
            param = D.ql_from_rl(param)
        grid = s3_grid(_level(args))
        q = canonical_quat(rotmat_to_quat(records.rotations))
        lp = D.s3_log_prob(kind, param, q, grid)
    lp = np.atleast_1d(lp)
    write_table(args.out, ["id", "log_prob", "prob"], [(i, float(v), float(np.exp(v))) for i, v in zip(records.ids, lp)])
    print(f"wrote {len(lp)} densities to {args.out}")


def cmd_synth(args):
    cfg = _load_config(args.config)
    ec = X.ExperimentConfig(
        seed=int(_pick(args, cfg, "seed", 0)),
        n=int(_pick(args, cfg, "n", 500)),
        s=float(_pick(args, cfg, "s", 10.0)),
        fraction=float(_pick(args, cfg, "fraction", 0.0)),
    )
    data = X.synth_dataset(ec)
    write_rotations(args.out, data.ids, data.rotations, labels=data.truth, outlier=data.outlier, variant=args.format)
    print(f"wrote {len(data)} rows ({int(data.outlier.sum())} outliers) to {args.out}")


def cmd_fit(args):
    cfg = _load_config(args.config)
    records = read_rotations(args.data)
    if len(records) < 2:
        raise ConfigError(f"{args.data}: need at least two observations, found {len(records)}")
    kind = _pick(args, cfg, "dist", "rl")
    config = _fit_config(args, cfg, kind)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateSvd)
        report = fit_mle(records.rotations, config)
    grid = hopf_so3_grid(config.level)
    h = D.entropy(kind, report.param, grid)
    summary = report.to_dict()
    summary.update(kind=kind, level=config.level, entropy=h, mode_wxyz=rotmat_to_quat(report.mode).tolist())
    err = None
    if records.labels is not None:
        err = X.mode_error_deg(report, records.labels[0])
        summary["mode_error_deg"] = err
    if args.out:
        Path(args.out).write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")
    q = summary["mode_wxyz"]
    err_text = f"{err:.3f}" if err is not None else "n/a"
    print(
        f"dist={kind} mode_wxyz=({q[0]:.6f},{q[1]:.6f},{q[2]:.6f},{q[3]:.6f}) "
        f"error_deg={err_text} nll={report.nll[-1]:.6f} entropy={h:.6f} "
        f"iterations={report.iterations} converged={report.converged}"
    )


def cmd_compare(args):
    cfg = _load_config(args.config)
    fractions = tuple(_pick(args, cfg, "fractions", X.OUTLIER_FRACTIONS))
    trials = int(_pick(args, cfg, "trials", 50))
    if trials < 1:
        raise ConfigError("trials must be >= 1")
    for f in fractions:
        X.ExperimentConfig(fraction=f)
    rows = X.compare_trials(
        fractions=fractions,
        trials=trials,
        n=int(_pick(args, cfg, "n", 500)),
        s=float(_pick(args, cfg, "s", 10.0)),
        level=_level(args, cfg),
        jobs=args.jobs,
    )
    table = X.summarize_compare(rows)
    write_table(args.out, ["fraction", "dist", "median_error_deg", "mean_error_deg", "rl_win_rate"], table)
    write_table(args.trials_out, ["fraction", "dist", "seed", "error_deg"], rows)
    for f, kind, med, mean, win in table:
        print(f"f={f:.2f} {kind}: median={med:.3f} mean={mean:.3f} rl_win_rate={win:.2f}")


def cmd_gradprofile(args):
    records = read_rotations(args.data)
    if len(records) < 2:
        raise ConfigError(f"{args.data}: need at least two observations")
    level = _level(args)
    grid = hopf_so3_grid(level)
    if args.param:
        param = read_param(args.param)
        if not isinstance(param, D.So3Param):
            raise ConfigError("gradient profile needs an 'A' parameter")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateSvd)
        if not args.param:
            param = fit_mle(records.rotations, FitConfig(kind=args.dist, level=level)).param
        prof, bins = X.gradient_profile(args.dist, param, records.rotations, grid)
    write_table(args.out, ["id", "error_deg", "grad_norm"], [(i, e, g) for i, (e, g) in zip(records.ids, prof)])
    write_table(
        args.bins_out,
        ["bin_lo_deg", "bin_hi_deg", "count", "population_share", "grad_sum", "grad_share", "grad_mean"],
        bins,
    )
    print(f"dist={args.dist} tail_share_ratio(>=170deg)={X.tail_share_ratio(bins):.3f}")


def cmd_entropy(args):
    concentrations = args.concentrations
    if not concentrations:
        raise ConfigError("need at least one concentration")
    rows = X.entropy_vs_error(
        concentrations=concentrations, trials=args.trials, n=args.n, kind=args.dist, level=_level(args), jobs=args.jobs
    )
    write_table(args.out, ["s", "seed", "entropy", "error_deg"], rows)
    agree = X.paired_entropy_agreement(rows)
    if agree is not None:
        print(f"lowest-entropy fit has lowest error in {agree:.2%} of {args.trials} seeds")
    else:
        print(f"wrote {len(rows)} rows")


# --------------------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(prog="rotlaplace", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out_required=True):
        p.add_argument("--level", type=int, default=None, help="grid level (default 3, 36864 rotations)")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--jobs", type=int, default=1)
        p.add_argument("--out", required=out_required)

    p = sub.add_parser("grid", help="write an SO(3) grid")
    common(p)
    p.add_argument("--format", choices=["bin", "csv"], default="bin")
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("density", help="evaluate log densities at query rotations")
    common(p)
    p.add_argument("--dist", choices=D.SO3_KINDS + D.S3_KINDS, default="rl")
    p.add_argument("--param", required=True)
    p.add_argument("--query", required=True)
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("synth", help="generate a dataset with outlier injection")
    common(p)
    p.add_argument("--config")
    p.add_argument("--n", type=int)
    p.add_argument("--s", type=float)
    p.add_argument("--fraction", type=float)
    p.add_argument("--format", choices=["rotmat9", "quat_wxyz"], default="rotmat9")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("fit", help="maximum-likelihood fit of A")
    common(p, out_required=False)
    p.add_argument("--data", required=True)
    p.add_argument("--config")
    p.add_argument("--dist", choices=D.SO3_KINDS)
    p.add_argument("--step", type=float)
    p.add_argument("--max-iter", dest="max_iter", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--init", choices=["zero", "spread"])
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("compare", help="RL vs MF fitted-mode error across outlier fractions")
    common(p)
    p.add_argument("--config")
    p.add_argument("--fractions", type=_floats)
    p.add_argument("--trials", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--s", type=float)
    p.add_argument("--trials-out", dest="trials_out")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("gradprofile", help="per-observation gradient magnitude vs error")
    common(p)
    p.add_argument("--data", required=True)
    p.add_argument("--dist", choices=D.SO3_KINDS, default="mf")
    p.add_argument("--param", help="JSON parameter; default fits A to the data")
    p.add_argument("--bins-out", dest="bins_out")
    p.set_defaults(func=cmd_gradprofile)

    p = sub.add_parser("entropy", help="entropy of fitted distributions vs mode error")
    common(p)
    p.add_argument("--concentrations", type=_floats, default=(2.0, 20.0))
    p.add_argument("--trials", type=int, default=25)
    p.add_argument("--n", type=int, default=500)
    p.add_argument("--dist", choices=D.SO3_KINDS, default="rl")
    p.set_defaults(func=cmd_entropy)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except NoProgress as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (InputError, ConfigError, InvalidResolution, InvalidRotation, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return 0


if __name__ == "__main__":
    sys.exit(main())
