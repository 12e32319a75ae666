"""Delay master stability conditions, critical delays and stability windows."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .blocks import (
    BlockCoefficients,
    DelayType,
    ModelJacobians,
    block_coefficient_arrays,
    block_coefficients,
    jacobians_dsgc,
    jacobians_inverter,
    transversal_set,
)
from .network import Network, build_watts_strogatz
from .roots import (
    FrequencyRoots,
    PhaseRoots,
    decisive_root_phase,
    decisive_roots_frequency,
    frequency_root_arrays,
    phase_root_array,
)
from .spectral import LaplacianSpectrum, eigen_symmetric
from .steady_state import (
    EffectiveLaplacian,
    SynchronousState,
    effective_laplacian,
    solve_fixed_point,
)

__all__ = [
    "AnalysisError",
    "Linearization",
    "ModeVerdict",
    "StabilityReport",
    "StabilityWindows",
    "R",
    "assess",
    "condition_frequency",
    "condition_phase",
    "critical_delay",
    "dmsf_dsgc",
    "dmsf_inverter",
    "linearize",
    "mode_margins",
    "ws_study",
]

MARGINAL_TOL = 1e-12
DEDUP_RTOL = 1e-9


class AnalysisError(RuntimeError):
    """An analysis stage failed; ``stage`` names the step."""

    def __init__(self, stage, message):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


def R(y, a, b, tau):
    """``sqrt((y^2 - b tau^2)^2 + (a tau y)^2)``."""
    y = np.asarray(y, dtype=float)
    return np.sqrt((y**2 - b * tau**2) ** 2 + (a * tau * y) ** 2)


def _r_over_y(y, a, b, tau):
    # R(y)/y, continued to y = 0 for b = 0 where it tends to a tau
    y = np.asarray(y, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = R(y, a, b, tau) / y
    return np.where((y == 0) & (b == 0), a * tau, out)


@dataclass(frozen=True)
class ModeVerdict:
    """Stability verdict for one distinct eigenvalue.

    ``sigma`` is the upper-inequality margin (s^-2 for phase delay,
    dimensionless for frequency delay); ``lower_margin`` is the analogous
    margin of the lower inequality. Both must be negative for stability.
    """

    k: int
    lam: float
    multiplicity: int
    coefficients: BlockCoefficients
    roots: PhaseRoots | FrequencyRoots
    sigma: float
    lower_margin: float
    lower_ok: bool
    upper_ok: bool
    stable: bool
    marginal: bool


def condition_phase(coeffs: BlockCoefficients, roots: PhaseRoots, k: int = 0, multiplicity: int = 1) -> ModeVerdict:
    """``-b < b_tau < R(y1) / tau^2``."""
    tau = roots.tau
    sigma = coeffs.b_tau - float(R(roots.y1, coeffs.a, coeffs.b, tau)) / tau**2
    lower = -coeffs.b - coeffs.b_tau
    return _verdict(k, multiplicity, coeffs, roots, sigma, lower)


def condition_frequency(coeffs: BlockCoefficients, roots: FrequencyRoots, k: int = 0, multiplicity: int = 1) -> ModeVerdict:
    """``-R(y**)/y** < a_tau tau < R(y*)/y*``."""
    tau = roots.tau
    a, b = coeffs.a, coeffs.b
    sigma = coeffs.a_tau * tau - float(_r_over_y(roots.y_star, a, b, tau))
    lower = -float(_r_over_y(roots.y_star_star, a, b, tau)) - coeffs.a_tau * tau
    return _verdict(k, multiplicity, coeffs, roots, sigma, lower)


def _verdict(k, multiplicity, coeffs, roots, sigma, lower):
    upper_ok = sigma < -MARGINAL_TOL
    lower_ok = lower < -MARGINAL_TOL
    marginal = abs(sigma) <= MARGINAL_TOL or abs(lower) <= MARGINAL_TOL
    return ModeVerdict(
        k=k,
        lam=coeffs.lam,
        multiplicity=multiplicity,
        coefficients=coeffs,
        roots=roots,
        sigma=float(sigma),
        lower_margin=float(lower),
        lower_ok=bool(lower_ok),
        upper_ok=bool(upper_ok),
        stable=bool(upper_ok and lower_ok),
        marginal=bool(marginal),
    )


def dmsf_inverter(lambda_max, tau, alpha_tilde, beta_tilde):
    """Closed-form dMSF of the inverter model (s^-2); negative means stable."""
    if not (alpha_tilde > 0 and beta_tilde > 0):
        raise ValueError("alpha_tilde and beta_tilde must be positive")
    tau = np.asarray(tau, dtype=float)
    y1 = phase_root_array(alpha_tilde, 0.0, tau)
    q = y1 / tau
    out = lambda_max - np.sqrt(q**4 + alpha_tilde**2 * q**2) / beta_tilde
    return float(out) if out.ndim == 0 else out


def dmsf_dsgc(lam, tau, alpha, gamma):
    """dMSF of the DSGC model for one eigenvalue (dimensionless)."""
    if not (alpha > 0 and gamma > 0):
        raise ValueError("alpha and gamma must be positive")
    tau = np.asarray(tau, dtype=float)
    r = frequency_root_arrays(alpha, lam, tau)
    out = gamma * tau - _r_over_y(r["y_star"], alpha, lam, tau)
    return float(out) if out.ndim == 0 else out


def mode_margins(jac: ModelJacobians, lams, taus):
    """Upper and lower margins on a ``(len(taus), len(lams))`` grid.

    Returns ``(sigma, lower)``; a mode is stable where both are negative.
    """
    lams = np.atleast_1d(np.asarray(lams, dtype=float))
    taus = np.atleast_1d(np.asarray(taus, dtype=float))[:, None]
    a, b, a_tau, b_tau = block_coefficient_arrays(jac, lams)
    if jac.delay_type is DelayType.PHASE:
        y1 = phase_root_array(a, b, taus)
        sigma = b_tau - R(y1, a, b, taus) / taus**2
        lower = np.broadcast_to(-b - b_tau, sigma.shape)
    else:
        r = frequency_root_arrays(a, b, taus)
        sigma = a_tau * taus - _r_over_y(r["y_star"], a, b, taus)
        lower = -_r_over_y(r["y_star_star"], a, b, taus) - a_tau * taus
    return sigma, np.array(lower)


@dataclass(frozen=True, eq=False)
class Linearization:
    """Fixed point, effective Laplacian and spectrum of a network.

    ``modes`` holds the distinct eigenvalues as ``(k, lam, multiplicity)``
    with ``k`` the 1-based index of the first occurrence.
    """

    network: Network
    state: SynchronousState
    laplacian: EffectiveLaplacian
    spectrum: LaplacianSpectrum
    modes: tuple[tuple[int, float, int], ...]

    def transversal_modes(self, jac: ModelJacobians):
        keep = set(transversal_set(jac, self.network.n))
        return [m for m in self.modes if m[0] in keep]


def _distinct_modes(eigenvalues):
    lam_max = max(1.0, float(eigenvalues[-1]))
    tol = DEDUP_RTOL * lam_max
    modes = []
    for idx, lam in enumerate(eigenvalues, start=1):
        lam = 0.0 if abs(lam) <= tol else float(lam)
        if modes and abs(lam - modes[-1][1]) <= tol:
            k, first, mult = modes[-1]
            modes[-1] = (k, first, mult + 1)
        else:
            modes.append((idx, lam, 1))
    return tuple(modes)


def linearize(network: Network, tol: float = 1e-10, max_iter: int = 50) -> Linearization:
    try:
        state = solve_fixed_point(network, tol=tol, max_iter=max_iter)
    except Exception as exc:
        raise AnalysisError("fixed point", str(exc)) from exc
    try:
        lap = effective_laplacian(network, state)
    except Exception as exc:
        raise AnalysisError("effective laplacian", str(exc)) from exc
    try:
        spectrum = eigen_symmetric(lap.matrix)
    except Exception as exc:
        raise AnalysisError("spectrum", str(exc)) from exc
    ev = spectrum.eigenvalues
    if ev[0] < -1e-9 * max(1.0, ev[-1]):
        raise AnalysisError("spectrum", f"effective Laplacian is not positive semidefinite (min {ev[0]:.3e})")
    return Linearization(network, state, lap, spectrum, _distinct_modes(ev))


def _as_linearization(network_or_lin) -> Linearization:
    if isinstance(network_or_lin, Linearization):
        return network_or_lin
    return linearize(network_or_lin)


@dataclass(frozen=True)
class StabilityReport:
    model: str
    params: dict
    delay_type: str
    tau: float
    modes: tuple[ModeVerdict, ...]
    sigma_max: float
    stable: bool

    @property
    def binding_mode(self) -> ModeVerdict:
        return max(self.modes, key=lambda m: m.sigma)

    def to_dict(self) -> dict:
        out = {
            "model": self.model,
            "params": dict(self.params),
            "delay_type": self.delay_type,
            "tau": self.tau,
            "sigma_max": self.sigma_max,
            "stable": self.stable,
            "modes": [],
        }
        for m in self.modes:
            entry = {
                "k": m.k,
                "lambda": m.lam,
                "multiplicity": m.multiplicity,
                "coefficients": asdict(m.coefficients),
                "roots": asdict(m.roots),
                "sigma": m.sigma,
                "lower_margin": m.lower_margin,
                "lower_ok": m.lower_ok,
                "upper_ok": m.upper_ok,
                "stable": m.stable,
                "marginal": m.marginal,
            }
            out["modes"].append(entry)
        return out


def assess(network, model: ModelJacobians, tau: float) -> StabilityReport:
    """Verdict for one delay over the transversal modes of ``network``.

    ``network`` may be a :class:`Network` or a precomputed :class:`Linearization`.
    """
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    lin = _as_linearization(network)
    verdicts = []
    for k, lam, mult in lin.transversal_modes(model):
        coeffs = block_coefficients(model, lam)
        try:
            if model.delay_type is DelayType.PHASE:
                roots = decisive_root_phase(coeffs.a, coeffs.b, tau)
                verdicts.append(condition_phase(coeffs, roots, k, mult))
            else:
                roots = decisive_roots_frequency(coeffs.a, coeffs.b, tau)
                verdicts.append(condition_frequency(coeffs, roots, k, mult))
        except ValueError as exc:
            raise AnalysisError("decisive roots", f"mode k={k}: {exc}") from exc
    sigma_max = max(v.sigma for v in verdicts)
    return StabilityReport(
        model=model.name,
        params=dict(model.params),
        delay_type=model.delay_type.value,
        tau=float(tau),
        modes=tuple(verdicts),
        sigma_max=float(sigma_max),
        stable=all(v.stable for v in verdicts),
    )


@dataclass(frozen=True)
class StabilityWindows:
    """Delay intervals with all transversal modes stable.

    ``tau_c`` is the upper end of the window starting at zero delay, or None
    when no loss of stability was found below ``tau_max``.
    """

    windows: tuple[tuple[float, float], ...]
    tau_c: float | None
    tau_max: float
    grid: int
    refine_tol: float
    method: str

    @property
    def stable_throughout(self) -> bool:
        return self.tau_c is None


def _combined_margin(jac, lams, taus):
    sigma, lower = mode_margins(jac, lams, taus)
    # sign-only combination; the two margins carry different units
    worst = np.maximum(sigma, lower)
    return np.max(worst, axis=1)


def _is_stable(margin):
    return margin < -MARGINAL_TOL


def _refine(jac, lams, lo, hi, tol):
    """Bisect the stability boundary between ``lo`` and ``hi`` (opposite verdicts)."""
    s_lo = _is_stable(_combined_margin(jac, lams, [lo])[0])
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _is_stable(_combined_margin(jac, lams, [mid])[0]) == s_lo:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def critical_delay(
    network,
    model: ModelJacobians,
    tau_max: float | None = None,
    grid: int = 2000,
    refine_tol: float = 1e-6,
    first_only: bool = False,
) -> StabilityWindows:
    """Stability windows in ``(0, tau_max]``.

    Phase delay has a single critical delay, located by bracketing and
    bisection. Frequency delay is scanned on a uniform grid of ``grid``
    points and every verdict change is refined by bisection; windows
    narrower than the grid step can be missed. With ``first_only`` the scan
    stops at the end of the first window.
    """
    lin = _as_linearization(network)
    lams = np.array([lam for _, lam, _ in lin.transversal_modes(model)])
    if model.delay_type is DelayType.PHASE:
        return _critical_delay_phase(model, lams, tau_max, refine_tol)
    if tau_max is None:
        tau_max = 3.0
    return _scan_windows(model, lams, tau_max, grid, refine_tol, first_only)


def _critical_delay_phase(model, lams, tau_max, refine_tol):
    if tau_max is None:
        tau_max = 100.0
    tau = min(1e-6, tau_max)
    if not _is_stable(_combined_margin(model, lams, [tau])[0]):
        raise AnalysisError("critical delay", "system is unstable at vanishing delay")
    while True:
        nxt = min(2.0 * tau, tau_max)
        if not _is_stable(_combined_margin(model, lams, [nxt])[0]):
            tau_c = float(_refine(model, lams, tau, nxt, refine_tol))
            return StabilityWindows(((0.0, tau_c),), tau_c, tau_max, 0, refine_tol, "bisection")
        if nxt >= tau_max:
            return StabilityWindows(((0.0, tau_max),), None, tau_max, 0, refine_tol, "bisection")
        tau = nxt


def _scan_windows(model, lams, tau_max, grid, refine_tol, first_only):
    if grid < 2:
        raise ValueError("grid needs at least 2 points")
    taus = tau_max * np.arange(1, grid + 1) / grid
    chunk = 100 if first_only else grid
    stable = np.zeros(0, dtype=bool)
    for start in range(0, grid, chunk):
        part = _is_stable(_combined_margin(model, lams, taus[start:start + chunk]))
        stable = np.concatenate([stable, part])
        if first_only and not part.all():
            break
    if not stable[0]:
        raise AnalysisError(
            "critical delay",
            f"unstable already at the first grid point tau={taus[0]:.3g} s; "
            "the delay-free system is unstable or the grid is too coarse",
        )
    windows = []
    lo = 0.0
    for i in range(1, len(stable)):
        if stable[i] == stable[i - 1]:
            continue
        edge = float(_refine(model, lams, float(taus[i - 1]), float(taus[i]), refine_tol))
        if stable[i]:
            lo = edge
        else:
            windows.append((lo, edge))
            if first_only:
                break
    if stable[-1] and not (first_only and windows):
        windows.append((lo, float(taus[len(stable) - 1])))
    first_closed = windows[0][0] == 0.0 and (len(windows) > 1 or not stable[-1])
    tau_c = windows[0][1] if first_closed else None
    return StabilityWindows(tuple(windows), tau_c, tau_max, grid, refine_tol, "grid")


@dataclass
class StudyRow:
    n: int
    k: int
    p: float
    model: str
    realization: int
    seed: int
    tau_c: float | None
    error: str | None = None


def ws_study(
    points,
    realizations: int = 10,
    models=None,
    seed: int = 0,
    P0: float = 1.0,
    K0: float = 8.0,
    tau_max: float = 10.0,
    grid: int = 2000,
    refine_tol: float = 1e-6,
    max_resample: int = 100,
):
    """Critical delays on Watts-Strogatz ensembles.

    ``points`` is an iterable of ``(n, k, p)``. Realization ``r`` of each
    point starts from seed ``seed + 1000 * r`` and increments it until the
    network is connected and has a normal-operation fixed point. The same
    network is analysed for every model. Returns ``(rows, summary)`` where
    ``summary`` maps ``(n, k, p, model)`` to the mean critical delay.
    """
    if models is None:
        models = [jacobians_inverter(0.1, 0.07), jacobians_dsgc(0.1, 0.25)]
    rows = []
    for n, k, p in points:
        for r in range(realizations):
            s = seed + 1000 * r
            lin = None
            err = None
            for _ in range(max_resample):
                net = build_watts_strogatz(n, k, p, P0, K0, seed=s)
                if net.is_connected():
                    try:
                        lin = linearize(net)
                        break
                    except AnalysisError as exc:
                        err = str(exc)
                s += 1
            for model in models:
                if lin is None:
                    rows.append(StudyRow(n, k, p, model.name, r, s, None, err or "no connected network"))
                    continue
                try:
                    win = critical_delay(lin, model, tau_max=tau_max, grid=grid,
                                         refine_tol=refine_tol, first_only=True)
                    rows.append(StudyRow(n, k, p, model.name, r, s, win.tau_c,
                                         None if win.tau_c is not None else "stable throughout scanned range"))
                except (AnalysisError, ValueError) as exc:
                    rows.append(StudyRow(n, k, p, model.name, r, s, None, str(exc)))
    summary = {}
    for row in rows:
        summary.setdefault((row.n, row.k, row.p, row.model), []).append(row.tau_c)
    summary = {
        key: (float(np.mean([v for v in vals if v is not None]))
              if any(v is not None for v in vals) else math.nan)
        for key, vals in summary.items()
    }
    return rows, summary
