"""Command line entry point: ``python -m orderflow <command> ...``.

Every command is deterministic for a fixed configuration and seed; JSON
reports carry a schema tag and the resolved configuration.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, load_config

SCHEMA = "orderflow.report/1"


# keys that never change results; left out of the echo so artifacts are
# byte-identical across thread counts and output locations
_NOT_ECHOED = ("threads", "out")


def _report(path, command, cfg, result):
    if isinstance(cfg, RunConfig):
        cfg = {k: v for k, v in cfg.resolved().items() if k not in _NOT_ECHOED}
    doc = {"schema": SCHEMA, "version": __version__, "command": command,
           "config": cfg, "result": result}
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _ensure_dir(path):
    os.makedirs(path, exist_ok=True)
    return path


def _cfg(args, **extra):
    overrides = {"seed": args.seed, "threads": args.threads}
    overrides.update(extra)
    return load_config(getattr(args, "config", None), **overrides)


def build_two_layer(cfg: RunConfig):
    """Finite-horizon parameters and TwoLayerParams implied by a config."""
    from .hawkes import TwoLayerParams
    from .kernels import KernelMatrixSpec, shifted_pareto
    from .scaling import LimitParams, finite_horizon_params

    for key in ("core_kernel", "reaction_kernel"):
        if getattr(cfg, key) != "shifted_pareto":
            raise ConfigError(
                f"{key}={getattr(cfg, key)!r}: the scaling scheme needs the power-law "
                "shifted_pareto family (exp_mixture is available through the Python API)")
    lp = LimitParams(cfg.alpha0, cfg.lambda0, cfg.mu0, cfg.lambda1)
    fh = finite_horizon_params(lp, cfg.T)
    phi = shifted_pareto(lp.alpha1)
    km = KernelMatrixSpec(phi, cfg.phi1_mass, phi, cfg.phi2_mass)
    params = TwoLayerParams(fh.nu_T, fh.a0_T, shifted_pareto(lp.alpha0), fh.a1_T, km)
    return lp, fh, params


# ---------------------------------------------------------------- commands

def cmd_ml(args):
    from .specialfn import mittag_leffler, ml_cdf, ml_density
    if args.what == "eval":
        print(repr(mittag_leffler(args.alpha, args.beta, args.x)))
    elif args.what == "density":
        print(repr(ml_density(args.alpha, args.lam, args.x)))
    else:
        print(repr(ml_cdf(args.alpha, args.lam, args.x)))
    return 0


def cmd_kernel(args):
    from .kernels import resolvent, shifted_pareto
    psi = resolvent(shifted_pareto(args.alpha), args.a, h=args.h, horizon=args.horizon)
    out = args.out or "-"
    data = np.column_stack([psi.t, psi.values])
    if out == "-":
        np.savetxt(sys.stdout, data, delimiter=",", header="t,psi", comments="", fmt="%.12g")
    else:
        np.savetxt(out, data, delimiter=",", header="t,psi", comments="", fmt="%.12g")
    return 0


def _simulate_one(seed, params, T):
    from .hawkes import simulate_two_layer
    return simulate_two_layer(params, T, seed)


def cmd_simulate(args):
    from .rng import map_paths
    cfg = _cfg(args, paths=args.paths, out=args.out)
    _, fh, params = build_two_layer(cfg)
    out = _ensure_dir(cfg.out)
    streams = map_paths(_simulate_one, cfg.paths, cfg.seed, cfg.threads, params=params, T=cfg.T)
    counts = []
    for i, st in enumerate(streams):
        st.to_csv(os.path.join(out, f"events_{i:04d}.csv"))
        counts.append(st.counts())
    _report(os.path.join(out, "report.json"), "simulate", cfg,
            {"nu_T": fh.nu_T, "a0_T": fh.a0_T, "a1_T": fh.a1_T, "counts": counts})
    return 0


def cmd_limit(args):
    from .limits import (MixedFbmParams, simulate_core_limit, simulate_fbm,
                         simulate_mixed_fbm, simulate_reaction_limit, simulate_signed_limit)
    from .paths import PathGrid
    from .rng import child_seed
    from .scaling import LimitParams
    cfg = _cfg(args, paths=args.paths)
    lp = LimitParams(cfg.alpha0, cfg.lambda0, cfg.mu0, cfg.lambda1)
    proc = args.process
    if proc in ("core", "reaction", "signed"):
        F, V = simulate_core_limit(lp.alpha0, lp.lambda0, lp.mu0, cfg.n_steps,
                                   child_seed(cfg.seed, 0), n_paths=cfg.paths)
        t = F.t
        if proc == "core":
            value = F["F"]
            extra = {"F_plus": F["F_plus"][0], "F_minus": F["F_minus"][0], "V": V["V"][0]}
        else:
            X = simulate_reaction_limit(lp.alpha1, lp.lambda1, lp.mu1, F, cfg.n_steps,
                                        child_seed(cfg.seed, 1))
            if proc == "reaction":
                value, extra = X["X"], {"U": X["U"][0]}
            else:
                k2 = cfg.phi1_mass - cfg.phi2_mass
                value, extra = simulate_signed_limit(lp, k2, V, X)["S"], {}
    elif proc == "fbm":
        g = simulate_fbm(cfg.H, cfg.n_points, cfg.dt, cfg.seed, n_paths=cfg.paths)
        t, value, extra = g.t, g["B"], {}
    else:
        g = simulate_mixed_fbm(MixedFbmParams(cfg.H, cfg.sigma_W, cfg.sigma_H),
                               cfg.n_points, cfg.dt, cfg.seed, n_paths=cfg.paths)
        t, value, extra = g.t, g["S"], {}
    value = np.atleast_2d(value)
    series = {"value": value[0]}
    series.update({f"value_{i}": value[i] for i in range(1, value.shape[0])})
    series.update(extra)
    PathGrid(t, series).to_csv(args.out)
    return 0


def cmd_rescale(args):
    from .hawkes import EventStream, aggregate_flows
    from .paths import PathGrid
    from .scaling import rescale_core, rescale_signed, rescale_unsigned
    cfg = _cfg(args)
    _, fh, _ = build_two_layer(cfg)
    stream = EventStream.from_csv(args.input, T=cfg.T)
    grid = np.linspace(0.0, cfg.T, cfg.n_grid + 1)
    U, S, F, V = aggregate_flows(stream, grid)
    if args.kind == "core":
        path = rescale_core(V, fh)
    elif args.kind == "unsigned":
        path = rescale_unsigned(U, fh)
    else:
        path = rescale_signed(S, fh)
    name = path.names()[0]
    PathGrid(path.t, {"value": path[name]}).to_csv(args.out)
    return 0


def _read_series(path, column):
    from .paths import PathGrid
    with open(path) as fh:
        header = fh.readline().strip().split(",")
    if header and header[0] == "date":
        return "bins", _read_bins(path)
    g = PathGrid.from_csv(path)
    name = column or g.names()[0]
    return "path", g[name]


def _read_bins(path):
    rows = {}
    with open(path) as fh:
        fh.readline()
        for line in fh:
            d, _, signed, unsigned, *_ = line.strip().split(",")
            rows.setdefault(d, []).append((float(signed), float(unsigned)))
    dates = sorted(rows)
    arr = np.array([rows[d] for d in dates])
    return dates, arr[:, :, 0], arr[:, :, 1]


def _estimate_one(method, x, args):
    from .estimators import hurst_fbm, hurst_mixed, hurst_volume, truncate_outliers
    if method == "fbm":
        d = args.delta
        return hurst_fbm(x, [d, 2 * d, 4 * d])
    if method == "mixed":
        return hurst_mixed(x, args.delta)
    inc, _ = truncate_outliers(np.diff(x))
    return hurst_volume(inc, args.max_lag)


def cmd_estimate(args):
    from .estimators import deseasonalize
    kind, data = _read_series(args.input, args.column)
    cfg = {"method": args.method, "delta": args.delta, "max_lag": args.max_lag,
           "input": os.path.basename(args.input)}
    if kind == "path":
        x = np.asarray(data, dtype=float)
        if args.method == "volume":
            # a cumulative path is differenced into per-step volumes first
            x = np.diff(x)
        rep = _estimate_one(args.method, x, args).to_dict()
        rep["overnight"] = "single path"
    else:
        dates, signed, unsigned = data
        if args.method == "volume":
            vols = deseasonalize(unsigned)
            per_day = [_estimate_one("volume", v, args) for v in vols]
        else:
            per_day = [_estimate_one(args.method, np.concatenate([[0.0], np.cumsum(s)]), args)
                       for s in signed]
        valid = [r.H_hat for r in per_day if not r.degenerate]
        rep = {"method": per_day[0].estimator, "H_hat": float(np.mean(valid)) if valid else None,
               "degenerate": not valid, "reason": None if valid else "all days degenerate",
               "auxiliary": {"per_day": [r.H_hat for r in per_day], "dates": dates},
               "overnight": "estimated per day, then averaged"}
    _report(args.out, "estimate", cfg, rep)
    return 0


def cmd_impact(args):
    from .impact import metaorder_experiment, mi_curve, two_layer_propagator
    from .paths import PathGrid
    if args.what == "curve":
        t = np.linspace(0.0, args.t_max, args.n_points + 1)[1:]
        curve = mi_curve(args.h0, t)
        curve.to_csv(args.out)
        return 0
    cfg = _cfg(args, paths=args.paths, out=args.out)
    _, _, params = build_two_layer(cfg)
    duration = args.duration
    horizon = 3.0 * duration
    prop = two_layer_propagator(params, min(0.05, horizon / 1e4), horizon, cfg.kappa)
    curve, exponent = metaorder_experiment(params, prop, args.rate, duration, cfg.paths,
                                           cfg.seed, threads=cfg.threads)
    out = _ensure_dir(cfg.out)
    PathGrid(curve.t, {"MI": curve["MI"], "se": curve["se"]}).to_csv(
        os.path.join(out, "metaorder_curve.csv"))
    _report(os.path.join(out, "metaorder.json"), "impact metaorder", cfg,
            {"rate": args.rate, "duration": duration, "fitted_exponent": exponent})
    return 0


def cmd_ingest(args):
    from .ingest import bin_flows, load_many
    log = load_many(args.input, args.session)
    bins = bin_flows(log, args.delta, args.session)
    bins.to_csv(args.out)
    print(f"{len(log)} trades, {log.filtered} outside session, {log.malformed} malformed, "
          f"{len(bins.dates)} days", file=sys.stderr)
    return 0


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="random seed (overrides config)")
    common.add_argument("--threads", type=int, default=None, help="worker processes")
    common.add_argument("--out", default=None, help="output file or directory")

    p = argparse.ArgumentParser(prog="orderflow", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    ml = sub.add_parser("ml", parents=[common], help="Mittag-Leffler function and law")
    ml.add_argument("what", choices=["eval", "density", "cdf"])
    ml.add_argument("--alpha", type=float, required=True)
    ml.add_argument("--beta", type=float, default=1.0)
    ml.add_argument("--lam", type=float, default=1.0)
    ml.add_argument("--x", type=float, required=True)
    ml.set_defaults(func=cmd_ml)

    k = sub.add_parser("kernel", parents=[common], help="resolvent of the default kernel")
    k.add_argument("what", choices=["resolvent"])
    k.add_argument("--alpha", type=float, required=True)
    k.add_argument("--a", type=float, required=True)
    k.add_argument("--h", type=float, required=True)
    k.add_argument("--horizon", type=float, required=True)
    k.set_defaults(func=cmd_kernel)

    s = sub.add_parser("simulate", parents=[common], help="simulate the two-layer model")
    s.add_argument("--config")
    s.add_argument("--paths", type=int, default=None)
    s.set_defaults(func=cmd_simulate)

    lim = sub.add_parser("limit", parents=[common], help="simulate a limit process")
    lim.add_argument("what", choices=["simulate"])
    lim.add_argument("--process", required=True,
                     choices=["core", "reaction", "signed", "fbm", "mixed"])
    lim.add_argument("--config")
    lim.add_argument("--paths", type=int, default=None)
    lim.set_defaults(func=cmd_limit)

    r = sub.add_parser("rescale", parents=[common], help="rescale a simulated event file")
    r.add_argument("--config")
    r.add_argument("--input", required=True)
    r.add_argument("--kind", choices=["core", "unsigned", "signed"], default="unsigned")
    r.set_defaults(func=cmd_rescale)

    e = sub.add_parser("estimate", parents=[common], help="Hurst estimation")
    e.add_argument("--method", choices=["fbm", "mixed", "volume"], required=True)
    e.add_argument("--input", required=True)
    e.add_argument("--delta", type=int, default=1)
    e.add_argument("--max-lag", type=int, default=10)
    e.add_argument("--column", default=None)
    e.set_defaults(func=cmd_estimate)

    im = sub.add_parser("impact", parents=[common], help="impact curves")
    im.add_argument("what", choices=["curve", "metaorder"])
    im.add_argument("--h0", type=float, default=0.75)
    im.add_argument("--t-max", type=float, default=3.0)
    im.add_argument("--n-points", type=int, default=300)
    im.add_argument("--config")
    im.add_argument("--rate", type=float, default=0.02)
    im.add_argument("--duration", type=float, default=1024.0)
    im.add_argument("--paths", type=int, default=None)
    im.set_defaults(func=cmd_impact)

    ing = sub.add_parser("ingest", parents=[common], help="bin trade files")
    ing.add_argument("--input", required=True, help="file or glob pattern")
    ing.add_argument("--session", default="09:30-16:00")
    ing.add_argument("--delta", type=float, default=60.0)
    ing.set_defaults(func=cmd_ingest)
    return p


_NEEDS_OUT = {"kernel": False, "simulate": True, "limit": True, "rescale": True,
              "estimate": False, "impact": True, "ingest": True, "ml": False}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if _NEEDS_OUT.get(args.command) and not args.out:
        parser.error(f"{args.command} needs --out")
    try:
        return int(args.func(args) or 0)
    except (ValueError, TypeError, RuntimeError, MemoryError, OSError) as exc:
        print(f"orderflow {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
