"""Dense symmetric eigensolver.

Householder reduction to tridiagonal form followed by implicit-shift QL
iteration. Intended for the modest matrix sizes of network Laplacians
(up to a few hundred nodes).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["LaplacianSpectrum", "eigen_symmetric", "eigvals_symmetric"]

SYMMETRY_RTOL = 1e-12
MAX_QL_ITER = 60


@dataclass(frozen=True, eq=False)
class LaplacianSpectrum:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None = None

    @property
    def lambda_max(self) -> float:
        return float(self.eigenvalues[-1])

    @property
    def algebraic_connectivity(self) -> float:
        return float(self.eigenvalues[1])


def _check_matrix(matrix):
    m = np.array(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    scale = float(np.max(np.abs(m), initial=0.0))
    if np.max(np.abs(m - m.T), initial=0.0) > SYMMETRY_RTOL * max(scale, 1e-300):
        raise ValueError("matrix is not symmetric")
    return 0.5 * (m + m.T)


def _tridiagonalize(a, want_vectors):
    n = a.shape[0]
    q = np.eye(n) if want_vectors else None
    off = np.zeros(n)
    for k in range(n - 2):
        x = a[k + 1:, k]
        norm = math.sqrt(float(x @ x))
        if norm == 0.0:
            continue
        alpha = -math.copysign(norm, x[0])
        v = x.copy()
        v[0] -= alpha
        v /= math.sqrt(float(v @ v))
        sub = a[k + 1:, k + 1:]
        p = sub @ v
        w = 2.0 * p - 2.0 * float(v @ p) * v
        sub -= np.outer(v, w) + np.outer(w, v)
        a[k + 1:, k] = 0.0
        a[k, k + 1:] = 0.0
        a[k + 1, k] = a[k, k + 1] = alpha
        if want_vectors:
            qs = q[:, k + 1:]
            qs -= 2.0 * np.outer(qs @ v, v)
    diag = np.diag(a).copy()
    off[: n - 1] = np.diag(a, 1)
    return diag, off, q


def _tridiagonal_ql(d, e, z):
    # e[i] couples d[i] and d[i+1]; e[n-1] is a zero sentinel
    n = len(d)
    eps = np.finfo(float).eps
    for l in range(n):
        iters = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= eps * dd:
                    break
                m += 1
            if m == l:
                break
            iters += 1
            if iters > MAX_QL_ITER:
                raise np.linalg.LinAlgError("QL iteration did not converge")
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            underflow = False
            for i in range(m - 1, l - 1, -1):
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                if z is not None:
                    zi1 = z[:, i + 1].copy()
                    z[:, i + 1] = s * z[:, i] + c * zi1
                    z[:, i] = c * z[:, i] - s * zi1
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0


def eigen_symmetric(matrix, vectors: bool = False) -> LaplacianSpectrum:
    """Eigenvalues (ascending) and optionally orthonormal eigenvectors.

    Raises ``ValueError`` for non-square, non-finite or asymmetric input.
    """
    a = _check_matrix(matrix)
    n = a.shape[0]
    if n == 0:
        return LaplacianSpectrum(np.zeros(0), np.zeros((0, 0)) if vectors else None)
    d, e, z = _tridiagonalize(a, vectors)
    d = [float(x) for x in d]
    e = [float(x) for x in e]
    _tridiagonal_ql(d, e, z)
    d = np.array(d)
    order = np.argsort(d, kind="stable")
    d = d[order]
    if vectors:
        z = z[:, order]
    return LaplacianSpectrum(d, z)


def eigvals_symmetric(matrix) -> np.ndarray:
    return eigen_symmetric(matrix).eigenvalues
