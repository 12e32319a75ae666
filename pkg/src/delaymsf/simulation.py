"""Direct integration of the delayed network models and of single blocks.

This module is an independent check on the analytic verdicts: it never
uses eigenvalues or decisive roots. The integrator is classical RK4 with a
step that divides the delay exactly; delayed values at half steps come from
cubic Hermite interpolation of the stored history.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numba
import numpy as np

from .blocks import BlockCoefficients, ModelJacobians
from .network import Network
from .steady_state import SynchronousState, solve_fixed_point

__all__ = [
    "GrowthRate",
    "SimConfig",
    "Trajectory",
    "growth_rate",
    "simulate_block",
    "simulate_network",
    "write_trajectory_csv",
]

BLOWUP = 1e6

_INVERTER, _DSGC, _BLOCK = 0, 1, 2


@dataclass(frozen=True)
class SimConfig:
    """Integration settings; ``None`` fields take delay-dependent defaults.

    The perturbation is added to the fixed point and held constant over the
    whole history interval ``[-tau, 0]``. Explicit per-node offsets
    (``phase_offsets``/``omega_offsets``) take precedence over the random
    ``amplitude``/``seed`` perturbation of the phases.
    """

    dt_target: float | None = None
    horizon: float | None = None
    amplitude: float = 1e-3
    seed: int | None = 0
    phase_offsets: tuple[float, ...] | None = None
    omega_offsets: tuple[float, ...] | None = None
    transient_discard: float | None = None
    record_every: int = 1

    def resolve(self, tau):
        dt_target = self.dt_target if self.dt_target is not None else min(tau / 20, 1e-3)
        horizon = self.horizon if self.horizon is not None else max(100 * tau, 20.0)
        discard = self.transient_discard if self.transient_discard is not None else 0.2 * horizon
        if not dt_target > 0:
            raise ValueError("dt_target must be positive")
        if dt_target > tau:
            raise ValueError(f"dt_target={dt_target} exceeds the delay tau={tau}")
        if not horizon > tau:
            raise ValueError("horizon must exceed the delay")
        steps_per_delay = max(1, round(tau / dt_target))
        return tau / steps_per_delay, steps_per_delay, horizon, discard


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Uniformly sampled solution; ``phi`` and ``omega`` have shape (len(times), n).

    If the run blew up, ``diverged`` is set and the arrays stop at ``blowup_time``.
    """

    times: np.ndarray
    phi: np.ndarray
    omega: np.ndarray
    tau: float
    dt: float
    diverged: bool = False
    blowup_time: float | None = None
    meta: dict = field(default_factory=dict)

    @property
    def envelope(self) -> np.ndarray:
        return np.max(np.abs(self.omega), axis=1)


@numba.njit(cache=True)
def _rhs(kind, K, P, par, phi, om, phi_d, om_d, dphi, dom):
    n = phi.shape[0]
    for i in range(n):
        dphi[i] = om[i]
    if kind == _INVERTER:
        alpha, beta = par[0], par[1]
        for i in range(n):
            s = 0.0
            for j in range(n):
                if K[i, j] != 0.0:
                    s += K[i, j] * math.sin(phi_d[i] - phi_d[j])
            dom[i] = -alpha * om[i] + beta * (P[i] - s)
    elif kind == _DSGC:
        alpha, gamma = par[0], par[1]
        for i in range(n):
            s = 0.0
            for j in range(n):
                if K[i, j] != 0.0:
                    s += K[i, j] * math.sin(phi[j] - phi[i])
            dom[i] = P[i] - alpha * om[i] - gamma * om_d[i] + s
    else:
        a, b, a_tau, b_tau = par[0], par[1], par[2], par[3]
        dom[0] = -a * om[0] - b * phi[0] - a_tau * om_d[0] - b_tau * phi_d[0]


@numba.njit(cache=True)
def _delayed(step, mid, hp, ho, hdp, hdo, L, phi_h, om_h, dt, out_p, out_o):
    # value at step `step` (mid=False) or at step + 1/2 (mid=True)
    n = out_p.shape[0]
    if step < 0 or (mid and step < 0):
        for i in range(n):
            out_p[i] = phi_h[i]
            out_o[i] = om_h[i]
        return
    r0 = step % L
    if not mid:
        for i in range(n):
            out_p[i] = hp[r0, i]
            out_o[i] = ho[r0, i]
        return
    r1 = (step + 1) % L
    for i in range(n):
        out_p[i] = 0.5 * (hp[r0, i] + hp[r1, i]) + dt * 0.125 * (hdp[r0, i] - hdp[r1, i])
        out_o[i] = 0.5 * (ho[r0, i] + ho[r1, i]) + dt * 0.125 * (hdo[r0, i] - hdo[r1, i])


@numba.njit(cache=True)
def _integrate(kind, K, P, par, phi0, om0, phi_h, om_h, dt, M, n_steps, every, blowup):
    n = phi0.shape[0]
    L = M + 4
    hp = np.zeros((L, n))
    ho = np.zeros((L, n))
    hdp = np.zeros((L, n))
    hdo = np.zeros((L, n))
    n_rec = n_steps // every + 1
    rec_p = np.empty((n_rec, n))
    rec_o = np.empty((n_rec, n))
    phi = phi0.copy()
    om = om0.copy()
    pd = np.empty(n)
    od = np.empty(n)
    tp = np.empty(n)
    to = np.empty(n)
    k1p = np.empty(n)
    k1o = np.empty(n)
    k2p = np.empty(n)
    k2o = np.empty(n)
    k3p = np.empty(n)
    k3o = np.empty(n)
    k4p = np.empty(n)
    k4o = np.empty(n)
    rec_p[0] = phi
    rec_o[0] = om
    rec_i = 1
    for s in range(n_steps):
        r = s % L
        hp[r] = phi
        ho[r] = om
        d = s - M
        _delayed(d, False, hp, ho, hdp, hdo, L, phi_h, om_h, dt, pd, od)
        _rhs(kind, K, P, par, phi, om, pd, od, k1p, k1o)
        hdp[r] = k1p
        hdo[r] = k1o
        _delayed(d, True, hp, ho, hdp, hdo, L, phi_h, om_h, dt, pd, od)
        for i in range(n):
            tp[i] = phi[i] + 0.5 * dt * k1p[i]
            to[i] = om[i] + 0.5 * dt * k1o[i]
        _rhs(kind, K, P, par, tp, to, pd, od, k2p, k2o)
        for i in range(n):
            tp[i] = phi[i] + 0.5 * dt * k2p[i]
            to[i] = om[i] + 0.5 * dt * k2o[i]
        _rhs(kind, K, P, par, tp, to, pd, od, k3p, k3o)
        _delayed(d + 1, False, hp, ho, hdp, hdo, L, phi_h, om_h, dt, pd, od)
        for i in range(n):
            tp[i] = phi[i] + dt * k3p[i]
            to[i] = om[i] + dt * k3o[i]
        _rhs(kind, K, P, par, tp, to, pd, od, k4p, k4o)
        big = False
        for i in range(n):
            phi[i] += dt / 6.0 * (k1p[i] + 2.0 * k2p[i] + 2.0 * k3p[i] + k4p[i])
            om[i] += dt / 6.0 * (k1o[i] + 2.0 * k2o[i] + 2.0 * k3o[i] + k4o[i])
            if not (abs(om[i]) <= blowup):
                big = True
        if (s + 1) % every == 0:
            rec_p[rec_i] = phi
            rec_o[rec_i] = om
            rec_i += 1
        if big:
            return rec_p[:rec_i], rec_o[:rec_i], s + 1, True
    return rec_p[:rec_i], rec_o[:rec_i], n_steps, False


def _run(kind, K, P, par, phi0, om0, phi_h, om_h, tau, config, meta):
    dt, M, horizon, discard = config.resolve(tau)
    n_steps = int(round(horizon / dt))
    every = max(1, int(config.record_every))
    rec_p, rec_o, done, diverged = _integrate(
        kind, np.ascontiguousarray(K, dtype=float), np.ascontiguousarray(P, dtype=float),
        np.asarray(par, dtype=float), phi0.astype(float), om0.astype(float),
        phi_h.astype(float), om_h.astype(float), dt, M, n_steps, every, BLOWUP,
    )
    times = dt * every * np.arange(rec_p.shape[0])
    meta = dict(meta, dt=dt, steps_per_delay=M, horizon=horizon, transient_discard=discard,
                history="constant: fixed point + perturbation on [-tau, 0]")
    return Trajectory(times, rec_p, rec_o, float(tau), dt, bool(diverged),
                      done * dt if diverged else None, meta)


def _perturbation(n, config):
    if config.phase_offsets is not None or config.omega_offsets is not None:
        dphi = np.zeros(n) if config.phase_offsets is None else np.asarray(config.phase_offsets, float)
        dom = np.zeros(n) if config.omega_offsets is None else np.asarray(config.omega_offsets, float)
        if dphi.shape != (n,) or dom.shape != (n,):
            raise ValueError(f"perturbation offsets need {n} entries")
        return dphi, dom
    rng = np.random.default_rng(config.seed)
    return config.amplitude * rng.uniform(-1.0, 1.0, n), np.zeros(n)


def simulate_network(
    network: Network,
    model: ModelJacobians,
    tau: float,
    sync_state: SynchronousState | None = None,
    config: SimConfig | None = None,
) -> Trajectory:
    """Integrate the nonlinear inverter or DSGC network model."""
    if not tau > 0:
        raise ValueError("tau must be positive")
    config = config or SimConfig()
    if sync_state is None:
        sync_state = solve_fixed_point(network)
    if model.name == "inverter":
        kind = _INVERTER
        par = [model.params["alpha_tilde"], model.params["beta_tilde"]]
    elif model.name == "dsgc":
        kind = _DSGC
        par = [model.params["alpha"], model.params["gamma"]]
    else:
        raise ValueError(f"cannot simulate model {model.name!r}; only 'inverter' and 'dsgc'")
    n = network.n
    dphi, dom = _perturbation(n, config)
    phi0 = np.asarray(sync_state.phases, float) + dphi
    om0 = dom
    meta = {"model": model.name, "params": dict(model.params), "tau": tau}
    return _run(kind, network.adjacency, network.power, par, phi0, om0, phi0, om0, tau, config, meta)


def simulate_block(coeffs: BlockCoefficients, tau: float, config: SimConfig | None = None) -> Trajectory:
    """Integrate a single linear block started from ``theta = amplitude``."""
    if not tau > 0:
        raise ValueError("tau must be positive")
    config = config or SimConfig()
    if config.phase_offsets is not None or config.omega_offsets is not None:
        theta0, dtheta0 = _perturbation(1, config)
    else:
        theta0, dtheta0 = np.array([config.amplitude]), np.zeros(1)
    par = [coeffs.a, coeffs.b, coeffs.a_tau, coeffs.b_tau]
    meta = {"model": "block", "coefficients": coeffs.__dict__.copy(), "tau": tau}
    return _run(_BLOCK, np.zeros((1, 1)), np.zeros(1), par, theta0, dtheta0, theta0, dtheta0,
                tau, config, meta)


@dataclass(frozen=True)
class GrowthRate:
    """Exponential growth rate of the frequency envelope (s^-1).

    ``band`` is a two-sigma half width of the slope; ``method`` is ``"peaks"``
    or ``"rms"`` (the fallback for too few envelope peaks).
    """

    rate: float
    band: float
    residual: float
    n_peaks: int
    method: str

    @property
    def growing(self) -> bool:
        return self.rate > 0


def _envelope_peaks(t, env):
    inner = (env[1:-1] > env[:-2]) & (env[1:-1] >= env[2:])
    idx = np.nonzero(inner)[0] + 1
    idx = idx[env[idx] > 0]
    return t[idx], env[idx]


def growth_rate(trajectory: Trajectory, transient_discard: float | None = None) -> GrowthRate:
    """Least-squares slope of the log envelope peaks after a transient.

    A diverged run reports its blow-up as a positive rate.
    """
    t = trajectory.times
    env = trajectory.envelope
    if transient_discard is None:
        transient_discard = trajectory.meta.get("transient_discard", 0.0)
    if trajectory.diverged:
        span = max(trajectory.blowup_time or t[-1], trajectory.dt)
        start = max(env[0], 1e-300)
        return GrowthRate(math.log(BLOWUP / start) / span, 0.0, 0.0, 0, "blowup")
    keep = t >= transient_discard
    t, env = t[keep], env[keep]
    pt, pv = _envelope_peaks(t, env)
    if len(pt) >= 10:
        x = pt - pt.mean()
        y = np.log(pv)
        slope, icept = np.polyfit(x, y, 1)
        resid = y - (slope * x + icept)
        dof = max(len(x) - 2, 1)
        s_err = math.sqrt(float(resid @ resid) / dof / float(x @ x))
        return GrowthRate(float(slope), 2.0 * s_err, float(np.sqrt(np.mean(resid**2))), len(pt), "peaks")
    third = len(t) // 3
    if third < 2:
        raise ValueError("trajectory too short for a growth-rate estimate")
    first = np.sqrt(np.mean(env[:third] ** 2))
    last = np.sqrt(np.mean(env[-third:] ** 2))
    span = t[-third:].mean() - t[:third].mean()
    if first == 0 or last == 0:
        rate = 0.0 if first == last else (math.inf if first == 0 else -math.inf)
    else:
        rate = math.log(last / first) / span
    return GrowthRate(float(rate), math.nan, math.nan, len(pt), "rms")


def write_trajectory_csv(trajectory: Trajectory, path, decimate: int = 1, comment: str | None = None):
    """Write ``t, phi_1..phi_n, omega_1..omega_n`` rows."""
    n = trajectory.phi.shape[1]
    step = max(1, int(decimate))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        w = csv.writer(fh)
        w.writerow(["t"] + [f"phi_{i + 1}" for i in range(n)] + [f"omega_{i + 1}" for i in range(n)])
        for idx in range(0, len(trajectory.times), step):
            w.writerow([repr(float(trajectory.times[idx]))]
                       + [repr(float(v)) for v in trajectory.phi[idx]]
                       + [repr(float(v)) for v in trajectory.omega[idx]])
