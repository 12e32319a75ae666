"""Decisive roots of the block characteristic function on the imaginary axis.

With ``z = i y`` the characteristic function
``H(z) = (z**2 + a tau z + b tau**2) e**z + a_tau tau z + b_tau tau**2``
splits into real and imaginary parts. The decisive roots are zeros of the
delay-free parts of those, located in known brackets, so plain bisection is
used throughout. All bisection helpers are vectorized over numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "FrequencyRoots",
    "PhaseRoots",
    "RootFindingError",
    "bisect",
    "decisive_root_phase",
    "decisive_roots_frequency",
    "frequency_root_arrays",
    "im_part",
    "interval_index",
    "phase_root_array",
    "re_part",
]

XTOL = 0.0  # bisect to machine resolution, well below 1e-13
MAX_BISECT = 1100  # enough halvings to reach subnormal roots near y = 0
PHASE_START = 1e-12
ENDPOINT_SHRINK = 1e-9
HALF_PI = 0.5 * math.pi


class RootFindingError(ValueError):
    """Parameters outside the regime where the decisive-root brackets hold."""


def _first(mask):
    return np.unravel_index(int(np.argmax(mask)), mask.shape)


def im_part(y, a, b, tau):
    """Imaginary part of ``H(iy)`` for phase delay (``a_tau = 0``)."""
    y = np.asarray(y, dtype=float)
    return (b * tau**2 - y**2) * np.sin(y) + a * tau * y * np.cos(y)


def re_part(y, a, b, tau):
    """Real part of ``H(iy)`` for frequency delay (``b_tau = 0``)."""
    y = np.asarray(y, dtype=float)
    return (b * tau**2 - y**2) * np.cos(y) - a * tau * y * np.sin(y)


def bisect(func, lo, hi, xtol=XTOL, max_iter=MAX_BISECT):
    """Elementwise bisection on brackets with opposite endpoint signs.

    Returns ``(root, converged)``. Entries whose bracket has no sign change
    come back as NaN with ``converged`` False.
    """
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    lo, hi = np.broadcast_arrays(lo, hi)
    lo, hi = lo.copy(), hi.copy()
    f_lo = func(lo)
    f_hi = func(hi)
    exact_lo = f_lo == 0
    exact_hi = f_hi == 0
    valid = (np.sign(f_lo) * np.sign(f_hi) < 0) | exact_lo | exact_hi
    lo_positive = f_lo > 0
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        # run to machine resolution unless every bracket is already below xtol
        if np.all((hi - lo <= xtol) | (mid <= lo) | (mid >= hi)):
            break
        f_mid = func(mid)
        move_lo = (f_mid > 0) == lo_positive
        lo = np.where(move_lo, mid, lo)
        hi = np.where(move_lo, hi, mid)
    root = 0.5 * (lo + hi)
    root = np.where(exact_lo, lo, np.where(exact_hi, hi, root))
    width = hi - lo
    resolved = (width <= max(xtol, 0.0)) | (width <= 4 * np.spacing(np.abs(hi)))
    converged = valid & resolved | exact_lo | exact_hi
    root = np.where(valid, root, np.nan)
    return root, converged


def interval_index(rho):
    """Index ``j`` with ``rho`` in ``(j pi - pi/2, j pi + pi/2]``; 0 covers ``[0, pi/2]``."""
    rho = np.asarray(rho, dtype=float)
    return np.maximum(np.ceil((rho - HALF_PI) / math.pi), 0).astype(int)


@dataclass(frozen=True)
class PhaseRoots:
    y1: float
    tau: float
    residual: float


@dataclass(frozen=True)
class FrequencyRoots:
    """Decisive roots for frequency delay.

    ``candidates`` lists the examined ``(m, y)`` pairs, one per π-interval.
    ``tie`` records whether the odd or even selection had to break a tie.
    """

    y_star: float
    y_star_star: float
    m_star: int
    m_star_star: int
    rho: float
    tau: float
    candidates: tuple[tuple[int, float], ...]
    residual: float
    tie: bool = False


def phase_root_array(a, b, tau):
    """Vectorized decisive root ``y1`` in ``(0, pi]`` of :func:`im_part`.

    Requires ``a > 0`` and ``-a < b tau <= 0`` elementwise.
    """
    a, b, tau = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (a, b, tau)))
    bad = ~((a > 0) & (tau > 0) & (b * tau > -a) & (b * tau <= 0))
    if np.any(bad):
        idx = _first(bad)
        raise RootFindingError(
            "outside Bhatt-Hsu phase-delay regime (need a > 0, -a < b tau <= 0, tau > 0): "
            f"a={a[idx]!r}, b={b[idx]!r}, tau={tau[idx]!r}"
        )
    root, ok = bisect(lambda y: im_part(y, a, b, tau), np.full(a.shape, PHASE_START), np.full(a.shape, math.pi))
    if not np.all(ok):
        raise RootFindingError("no sign change of the imaginary part on (0, pi]")
    return root


def decisive_root_phase(a: float, b: float, tau: float) -> PhaseRoots:
    y1 = float(phase_root_array(a, b, tau))
    return PhaseRoots(y1=y1, tau=float(tau), residual=abs(float(im_part(y1, a, b, tau))))


def _interval_bracket(m):
    m = np.asarray(m)
    lo = np.where(m == 0, 0.0, m * math.pi - HALF_PI + ENDPOINT_SHRINK)
    hi = m * math.pi + HALF_PI - ENDPOINT_SHRINK
    return lo, hi


def _check_frequency_regime(a, b, tau):
    bad = ~((a > 0) & (b >= 0) & (tau > 0))
    if np.any(bad):
        idx = _first(bad)
        raise RootFindingError(
            "outside Bhatt-Hsu frequency-delay regime (need a > 0, b >= 0, tau > 0): "
            f"a={a[idx]!r}, b={b[idx]!r}, tau={tau[idx]!r}"
        )


def _interval_roots(a, b, tau, m):
    """Root of :func:`re_part` in π-interval ``m`` (NaN where ``m < 0``).

    For ``b == 0`` the interval-0 root degenerates to ``y = 0`` (the limit
    ``b -> 0+``) and is returned as exactly zero.
    """
    valid_m = m >= 0
    mm = np.where(valid_m, m, 0)
    lo, hi = _interval_bracket(mm)
    degenerate = (mm == 0) & (b == 0)
    # keep the bisection bracket non-degenerate; the value is overwritten below
    lo = np.where(degenerate, 0.5, lo)
    hi = np.where(degenerate, 1.0, hi)
    root, ok = bisect(lambda y: re_part(y, a, b, tau), lo, hi)
    root = np.where(degenerate, 0.0, root)
    ok = ok | degenerate
    missing = valid_m & ~ok
    if np.any(missing):
        idx = _first(missing)
        raise RootFindingError(
            f"no sign change of the real part in interval m={int(mm[idx])} "
            f"(a={a[idx]!r}, b={b[idx]!r}, tau={tau[idx]!r}, "
            f"bracket=({lo[idx]:.6g}, {hi[idx]:.6g}))"
        )
    return np.where(valid_m, root, np.nan)


def frequency_root_arrays(a, b, tau):
    """Vectorized decisive roots for frequency delay.

    Returns a dict of arrays: ``y_star``, ``y_star_star``, ``m_star``,
    ``m_star_star``, ``rho``, ``tie`` and the raw candidates ``cand_m``,
    ``cand_y`` (last axis of length 3, NaN where an interval was clipped).
    """
    a, b, tau = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (a, b, tau)))
    _check_frequency_regime(a, b, tau)
    rho = tau * np.sqrt(b)
    j = interval_index(rho)
    cand_m = np.stack([j - 1, j, j + 1], axis=-1)
    cand_y = np.stack(
        [_interval_roots(a, b, tau, cand_m[..., c]) for c in range(3)], axis=-1
    )
    dist = np.abs(cand_y - rho[..., None])
    out = {"rho": rho, "cand_m": cand_m, "cand_y": cand_y}
    tie = np.zeros(a.shape, dtype=bool)
    for label, parity in (("star", 1), ("star_star", 0)):
        usable = (cand_m >= 0) & (cand_m % 2 == parity)
        d = np.where(usable, dist, np.inf)
        # candidates are ordered by m, hence by y: argmin picks the smaller y on ties
        pick = np.argmin(d, axis=-1)
        dmin = np.take_along_axis(d, pick[..., None], -1)[..., 0]
        tie |= np.sum(d == dmin[..., None], axis=-1) > 1
        out["y_" + label] = np.take_along_axis(cand_y, pick[..., None], -1)[..., 0]
        out["m_" + label] = np.take_along_axis(cand_m, pick[..., None], -1)[..., 0]
    out["tie"] = tie
    return out


def decisive_roots_frequency(a: float, b: float, tau: float) -> FrequencyRoots:
    r = frequency_root_arrays(a, b, tau)
    cands = tuple(
        (int(m), float(y))
        for m, y in zip(r["cand_m"].ravel(), r["cand_y"].ravel())
        if m >= 0
    )
    residual = max(abs(float(re_part(y, a, b, tau))) for _, y in cands)
    return FrequencyRoots(
        y_star=float(r["y_star"]),
        y_star_star=float(r["y_star_star"]),
        m_star=int(r["m_star"]),
        m_star_star=int(r["m_star_star"]),
        rho=float(r["rho"]),
        tau=float(tau),
        candidates=cands,
        residual=residual,
        tie=bool(r["tie"]),
    )
