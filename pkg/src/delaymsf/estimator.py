"""Estimator-style front end: fit a network, then score delays."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .blocks import DelayType, make_model
from .network import Network, NetworkError, read_network
from .stability import (
    StabilityReport,
    StabilityWindows,
    assess,
    critical_delay,
    linearize,
    mode_margins,
)

__all__ = ["DelayStabilityAnalyzer", "check_delays", "check_network"]


def check_network(X) -> Network:
    """Accept a :class:`Network`, a path to a network file, or ``(adjacency, power)``."""
    if isinstance(X, Network):
        net = X
    elif isinstance(X, (str, bytes)) or hasattr(X, "__fspath__"):
        net = read_network(X)
    elif isinstance(X, tuple) and len(X) == 2:
        net = Network(*X)
    else:
        raise TypeError(f"expected a Network, a path or (adjacency, power), got {type(X).__name__}")
    if not net.is_connected():
        raise NetworkError("network is disconnected")
    return net


def check_delays(taus) -> np.ndarray:
    taus = np.atleast_1d(np.asarray(taus, dtype=float))
    if taus.ndim != 1:
        raise ValueError(f"delays must be a scalar or 1-d array, got shape {taus.shape}")
    if not np.all(np.isfinite(taus)) or np.any(taus <= 0):
        raise ValueError("delays must be finite and positive")
    return taus


class DelayStabilityAnalyzer(BaseEstimator):
    """Delay master stability analysis of a phase-locked oscillator network.

    Parameters
    ----------
    model : {"inverter", "dsgc", "custom"}
        Model family. ``"inverter"`` delays the phase coupling, ``"dsgc"``
        adds a delayed frequency damping.
    alpha : float
        Damping (s^-1); the inertia-normalized damping for the inverter model.
    beta : float
        Droop constant of the inverter model.
    gamma : float
        Delayed damping of the DSGC model (s^-1).
    jacobians : dict or sequence of 8 floats, optional
        Raw partials for ``model="custom"``.
    tol, max_iter
        Fixed-point solver settings.

    Attributes
    ----------
    linearization_ : Linearization
        Fixed point, effective Laplacian and spectrum.
    jacobians_ : ModelJacobians
    lambdas_ : ndarray
        Distinct eigenvalues of the transversal modes.
    multiplicities_ : ndarray
    """

    def __init__(self, model="inverter", alpha=0.1, beta=0.07, gamma=0.25,
                 jacobians=None, tol=1e-10, max_iter=50):
        self.model = model
        self.alpha = alpha
        self.beta = beta
        self.gamma = gamma
        self.jacobians = jacobians
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, X, y=None):
        net = check_network(X)
        self.jacobians_ = make_model(self.model, alpha=self.alpha, beta=self.beta,
                                     gamma=self.gamma, jacobians=self.jacobians)
        self.linearization_ = linearize(net, tol=self.tol, max_iter=self.max_iter)
        modes = self.linearization_.transversal_modes(self.jacobians_)
        self.mode_indices_ = np.array([k for k, _, _ in modes])
        self.lambdas_ = np.array([lam for _, lam, _ in modes])
        self.multiplicities_ = np.array([m for _, _, m in modes])
        self.n_features_in_ = net.n
        return self

    @property
    def delay_type_(self) -> DelayType:
        check_is_fitted(self, "jacobians_")
        return self.jacobians_.delay_type

    def transform(self, taus):
        """Per-mode dMSF values, shape ``(len(taus), n_modes)``."""
        check_is_fitted(self, "linearization_")
        sigma, _ = mode_margins(self.jacobians_, self.lambdas_, check_delays(taus))
        return sigma

    def fit_transform(self, X, y=None, taus=None):
        if taus is None:
            raise ValueError("fit_transform needs the delays to evaluate")
        return self.fit(X).transform(taus)

    def decision_function(self, taus):
        """``sigma_max`` for each delay; negative values are stable if the lower bounds hold."""
        return np.max(self.transform(taus), axis=1)

    def predict(self, taus):
        """Boolean stability verdict for each delay."""
        check_is_fitted(self, "linearization_")
        sigma, lower = mode_margins(self.jacobians_, self.lambdas_, check_delays(taus))
        return np.all((sigma < -1e-12) & (lower < -1e-12), axis=1)

    def report(self, tau) -> StabilityReport:
        check_is_fitted(self, "linearization_")
        return assess(self.linearization_, self.jacobians_, float(check_delays(tau)[0]))

    def critical_delay(self, tau_max=None, grid=2000, refine_tol=1e-6, first_only=False) -> StabilityWindows:
        check_is_fitted(self, "linearization_")
        return critical_delay(self.linearization_, self.jacobians_, tau_max=tau_max,
                              grid=grid, refine_tol=refine_tol, first_only=first_only)
