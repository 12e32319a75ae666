"""Command-line interface.

Exit codes: 0 success, 1 analysis error, 2 usage error. Relative output
paths are placed under ``$DELAYMSF_OUTPUT_DIR`` when that variable is set.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from pathlib import Path

import numpy as np

from .blocks import DelayType, block_coefficient_arrays, make_model
from .network import (
    NetworkError,
    build_star,
    build_watts_strogatz,
    network_to_dict,
    read_network,
    write_network,
)
from .roots import frequency_root_arrays, phase_root_array
from .simulation import SimConfig, growth_rate, simulate_network, write_trajectory_csv
from .stability import AnalysisError, assess, critical_delay, linearize, mode_margins, ws_study

OUTPUT_DIR_ENV = "DELAYMSF_OUTPUT_DIR"

# flag defaults, applied after merging a --config file
DEFAULTS = {
    "alpha": 0.1,
    "beta": 0.07,
    "gamma": 0.25,
    "p0": 1.0,
    "k0": 8.0,
    "seed": 0,
    "grid": 2000,
    "refine_tol": 1e-6,
    "tau_min": None,
    "points": 400,
    "realizations": 10,
    "amplitude": 1e-3,
    "decimate": 1,
}


class UsageError(Exception):
    pass


def _add_model(p):
    g = p.add_argument_group("model")
    g.add_argument("--model", choices=["inverter", "dsgc", "custom"])
    g.add_argument("--alpha", type=float, help="damping alpha (inverter: alpha tilde), s^-1")
    g.add_argument("--beta", type=float, help="inverter droop constant beta tilde")
    g.add_argument("--gamma", type=float, help="DSGC delayed damping, s^-1")
    g.add_argument("--jacobians", type=float, nargs=8, metavar="J",
                   help="custom model: F_phi F_omega F_phi_tau F_omega_tau G_phi G_omega G_phi_tau G_omega_tau")


def _add_network(p):
    g = p.add_argument_group("network source (exactly one)")
    g.add_argument("--star", type=int, metavar="LEAVES", help="star with one producer and LEAVES consumers")
    g.add_argument("--ws", nargs=3, metavar=("N", "K", "P"), help="Watts-Strogatz network")
    g.add_argument("--network", metavar="PATH", help="network JSON file")
    g.add_argument("--p0", type=float, help="power magnitude P0, s^-2")
    g.add_argument("--k0", type=float, help="line capacity K0, s^-2")
    g.add_argument("--seed", type=int)


def _add_tau(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--tau", type=float, help="delay in seconds")
    g.add_argument("--tau-ms", type=float, help="delay in milliseconds")


def _add_common(p):
    p.add_argument("--config", metavar="JSON", help="run configuration file; flags override it")
    p.add_argument("--out", metavar="PATH", help="output file (default: stdout)")


def build_parser():
    parser = argparse.ArgumentParser(prog="delaymsf", description="Delay master stability of inertial oscillator networks.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-network", help="generate a network file")
    _add_network(p)
    _add_common(p)

    p = sub.add_parser("analyze", help="stability report for one delay (JSON)")
    _add_model(p)
    _add_network(p)
    _add_tau(p)
    _add_common(p)

    p = sub.add_parser("sweep", help="dMSF curves sigma(tau) as CSV")
    _add_model(p)
    _add_network(p)
    p.add_argument("--tau-min", type=float)
    p.add_argument("--tau-max", type=float, required=False)
    p.add_argument("--points", type=int)
    _add_common(p)

    p = sub.add_parser("critical-delay", help="critical delay and stability windows")
    _add_model(p)
    _add_network(p)
    p.add_argument("--tau-max", type=float)
    p.add_argument("--grid", type=int)
    p.add_argument("--refine-tol", type=float)
    _add_common(p)

    p = sub.add_parser("roots", help="decisive roots per mode over a delay sweep as CSV")
    _add_model(p)
    _add_network(p)
    p.add_argument("--tau-min", type=float)
    p.add_argument("--tau-max", type=float)
    p.add_argument("--points", type=int)
    _add_common(p)

    p = sub.add_parser("ws-study", help="mean critical delay on Watts-Strogatz ensembles (CSV)")
    p.add_argument("--models", nargs="+", choices=["inverter", "dsgc"], default=None)
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--n", type=int, nargs="+", default=None)
    p.add_argument("--k", type=int, nargs="+", default=None)
    p.add_argument("--p", type=float, nargs="+", default=None)
    p.add_argument("--realizations", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--p0", type=float)
    p.add_argument("--k0", type=float)
    p.add_argument("--tau-max", type=float)
    p.add_argument("--grid", type=int)
    _add_common(p)

    p = sub.add_parser("simulate", help="integrate the nonlinear delayed model (trajectory CSV)")
    _add_model(p)
    _add_network(p)
    _add_tau(p)
    p.add_argument("--horizon", type=float)
    p.add_argument("--dt", type=float)
    p.add_argument("--amplitude", type=float)
    p.add_argument("--decimate", type=int)
    _add_common(p)

    p = sub.add_parser("validate", help="analytic verdicts vs simulation at 0.8 and 1.2 tau_c")
    _add_model(p)
    _add_network(p)
    p.add_argument("--tau-max", type=float)
    p.add_argument("--grid", type=int)
    p.add_argument("--horizon", type=float)
    p.add_argument("--factors", type=float, nargs="+", default=None)
    _add_common(p)
    return parser


def _merge_config(args):
    cfg = {}
    if getattr(args, "config", None):
        try:
            cfg = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}")
        if not isinstance(cfg, dict):
            raise UsageError("config file must hold a JSON object")
    for key, value in cfg.items():
        key = key.replace("-", "_")
        if key in ("config", "command"):
            continue
        if not hasattr(args, key):
            raise UsageError(f"unknown config key {key!r} for {args.command}")
        if getattr(args, key) is None:
            setattr(args, key, value)
    for key, value in DEFAULTS.items():
        if hasattr(args, key) and getattr(args, key) is None:
            setattr(args, key, value)
    return args


def _config_echo(args):
    items = {k: v for k, v in sorted(vars(args).items()) if k not in ("config",)}
    return "config: " + json.dumps(items, sort_keys=True)


def _model(args):
    if args.model is None:
        raise UsageError("--model is required")
    try:
        return make_model(args.model, alpha=args.alpha, beta=args.beta, gamma=args.gamma,
                          jacobians=args.jacobians)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"invalid model parameters: {exc}")


def _network(args):
    sources = [s for s in ("star", "ws", "network") if getattr(args, s, None) is not None]
    if len(sources) != 1:
        raise UsageError("specify exactly one of --star, --ws, --network")
    try:
        if args.star is not None:
            return build_star(int(args.star), args.p0, args.k0)
        if args.ws is not None:
            n, k, p = args.ws
            net = build_watts_strogatz(int(n), int(k), float(p), args.p0, args.k0, seed=args.seed)
            if not net.is_connected():
                raise NetworkError(f"Watts-Strogatz network with seed {args.seed} is disconnected")
            return net
        return read_network(args.network)
    except (ValueError, TypeError) as exc:
        if isinstance(exc, NetworkError):
            raise AnalysisError("network", str(exc))
        raise UsageError(str(exc))


def _tau(args):
    if args.tau is not None:
        return float(args.tau)
    if args.tau_ms is not None:
        return float(args.tau_ms) * 1e-3
    raise UsageError("a delay is required (--tau or --tau-ms)")


def _out_path(path):
    path = Path(path)
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not path.is_absolute():
        path = Path(base) / path
        path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _emit(args, text):
    if args.out:
        _out_path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _csv_text(args, header, rows):
    buf = io.StringIO()
    buf.write("# " + _config_echo(args) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if v is None:
        return ""
    return v


def cmd_gen_network(args):
    net = _network(args)
    if args.out:
        write_network(net, _out_path(args.out))
    else:
        sys.stdout.write(json.dumps(network_to_dict(net), indent=1) + "\n")
    return 0


def cmd_analyze(args):
    model = _model(args)
    tau = _tau(args)
    net = _network(args)
    report = assess(net, model, tau)
    _emit(args, json.dumps(report.to_dict(), indent=2) + "\n")
    return 0


def _tau_grid(args, default_max):
    tau_max = args.tau_max if args.tau_max is not None else default_max
    tau_min = args.tau_min if args.tau_min is not None else tau_max / args.points
    if not 0 < tau_min < tau_max:
        raise UsageError("need 0 < tau-min < tau-max")
    return np.linspace(tau_min, tau_max, int(args.points))


def cmd_sweep(args):
    model = _model(args)
    net = _network(args)
    lin = linearize(net)
    modes = lin.transversal_modes(model)
    lams = np.array([lam for _, lam, _ in modes])
    taus = _tau_grid(args, 0.1 if model.delay_type is DelayType.PHASE else 3.0)
    sigma, lower = mode_margins(model, lams, taus)
    rows = []
    for i, tau in enumerate(taus):
        for j, lam in enumerate(lams):
            ok = sigma[i, j] < -1e-12 and lower[i, j] < -1e-12
            rows.append((tau, lam, sigma[i, j], ok))
        ok_all = bool(np.all((sigma[i] < -1e-12) & (lower[i] < -1e-12)))
        rows.append((tau, "max", float(np.max(sigma[i])), ok_all))
    _emit(args, _csv_text(args, ["tau", "lambda_k", "sigma", "stable"], rows))
    return 0


def cmd_critical_delay(args):
    model = _model(args)
    net = _network(args)
    win = critical_delay(net, model, tau_max=args.tau_max, grid=args.grid, refine_tol=args.refine_tol)
    doc = {
        "model": model.name,
        "tau_c": win.tau_c,
        "windows": [list(w) for w in win.windows],
        "tau_max": win.tau_max,
        "grid": win.grid,
        "refine_tol": win.refine_tol,
        "method": win.method,
    }
    if win.tau_c is None:
        sys.stderr.write("stable throughout scanned range\n")
        doc["note"] = "stable throughout scanned range"
    if args.out:
        _out_path(args.out).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    tc = "none" if win.tau_c is None else f"{win.tau_c:.6f} s"
    print(f"tau_c = {tc}")
    for lo, hi in win.windows:
        print(f"window {lo:.6f} .. {hi:.6f} s")
    return 0


def cmd_roots(args):
    model = _model(args)
    net = _network(args)
    lin = linearize(net)
    modes = lin.transversal_modes(model)
    lams = np.array([lam for _, lam, _ in modes])
    taus = _tau_grid(args, 0.1 if model.delay_type is DelayType.PHASE else 3.0)
    a, b, _, _ = block_coefficient_arrays(model, lams)
    rows = []
    if model.delay_type is DelayType.PHASE:
        y1 = phase_root_array(a, b, taus[:, None])
        for i, tau in enumerate(taus):
            for j, (k, lam, _) in enumerate(modes):
                rows.append((tau, k, lam, y1[i, j], "", "", "", ""))
    else:
        r = frequency_root_arrays(a, b, taus[:, None])
        for i, tau in enumerate(taus):
            for j, (k, lam, _) in enumerate(modes):
                rows.append((tau, k, lam, "", r["y_star"][i, j], int(r["m_star"][i, j]),
                             r["y_star_star"][i, j], r["rho"][i, j]))
    header = ["tau", "k", "lambda_k", "y1", "y_star", "m_star", "y_star_star", "rho"]
    _emit(args, _csv_text(args, header, rows))
    return 0


def cmd_ws_study(args):
    names = args.models or ["inverter", "dsgc"]
    models = [make_model(m, alpha=args.alpha, beta=args.beta, gamma=args.gamma) for m in names]
    ns = args.n or [100]
    ks = args.k or [4]
    ps = args.p or [0.5]
    points = [(n, k, p) for n in ns for k in ks for p in ps]
    tau_max = args.tau_max if args.tau_max is not None else 10.0
    rows, summary = ws_study(points, realizations=args.realizations, models=models, seed=args.seed,
                             P0=args.p0, K0=args.k0, tau_max=tau_max, grid=args.grid)
    out = [(r.n, r.k, r.p, r.model, r.realization, r.seed, r.tau_c, r.error) for r in rows]
    for (n, k, p, m), mean in summary.items():
        out.append((n, k, p, m, "mean", "", mean, ""))
    header = ["n", "k", "p", "model", "realization", "seed", "tau_c", "error"]
    _emit(args, _csv_text(args, header, out))
    return 0


def cmd_simulate(args):
    model = _model(args)
    tau = _tau(args)
    net = _network(args)
    lin = linearize(net)
    cfg = SimConfig(dt_target=args.dt, horizon=args.horizon, amplitude=args.amplitude, seed=args.seed)
    try:
        traj = simulate_network(net, model, tau, lin.state, cfg)
    except ValueError as exc:
        raise AnalysisError("simulation", str(exc))
    g = growth_rate(traj)
    if args.out:
        write_trajectory_csv(traj, _out_path(args.out), decimate=args.decimate, comment=_config_echo(args))
    verdict = "growing" if g.growing else "decaying"
    print(f"growth rate {g.rate:.6g} 1/s (+/- {g.band:.2g}, {g.method}, {g.n_peaks} peaks): {verdict}")
    if traj.diverged:
        print(f"diverged at t = {traj.blowup_time:.4g} s")
    return 0


def cmd_validate(args):
    model = _model(args)
    net = _network(args)
    lin = linearize(net)
    win = critical_delay(lin, model, tau_max=args.tau_max, grid=args.grid)
    if win.tau_c is None:
        raise AnalysisError("critical delay", "stable throughout scanned range")
    factors = args.factors or [0.8, 1.2]
    rows = []
    for f in factors:
        tau = f * win.tau_c
        report = assess(lin, model, tau)
        traj = simulate_network(net, model, tau, lin.state, SimConfig(horizon=args.horizon or 600.0, seed=args.seed))
        g = growth_rate(traj)
        rows.append((f, tau, report.sigma_max, report.stable, g.rate, g.band, g.method,
                     report.stable == (not g.growing)))
    header = ["factor", "tau", "sigma_max", "analytic_stable", "growth_rate", "band", "method", "agree"]
    _emit(args, _csv_text(args, header, rows))
    return 0 if all(r[-1] for r in rows) else 1


COMMANDS = {
    "gen-network": cmd_gen_network,
    "analyze": cmd_analyze,
    "sweep": cmd_sweep,
    "critical-delay": cmd_critical_delay,
    "roots": cmd_roots,
    "ws-study": cmd_ws_study,
    "simulate": cmd_simulate,
    "validate": cmd_validate,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _merge_config(args)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        sys.stderr.write(f"delaymsf: error: {exc}\n")
        return 2
    except AnalysisError as exc:
        sys.stderr.write(f"delaymsf: analysis error {exc}\n")
        return 1
    except (ValueError, RuntimeError) as exc:
        sys.stderr.write(f"delaymsf: analysis error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
