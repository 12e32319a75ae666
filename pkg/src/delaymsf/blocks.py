"""Model linearizations and the per-eigenvalue second-order delay blocks.

Every mode ``k`` of the linearized network obeys

    theta'' = -a theta' - b theta - a_tau theta'(t - tau) - b_tau theta(t - tau)

with coefficients affine in the effective Laplacian eigenvalue ``lam``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "BlockCoefficients",
    "DelayType",
    "ModelJacobians",
    "block_coefficients",
    "block_coefficient_arrays",
    "jacobians_dsgc",
    "jacobians_inverter",
    "make_model",
    "transversal_set",
]


class DelayType(enum.Enum):
    PHASE = "phase"
    FREQUENCY = "frequency"
    NONE = "none"


@dataclass(frozen=True)
class ModelJacobians:
    """Partial derivatives of the local (F) and coupling (G) dynamics.

    The coupling partials have the fixed-point factor ``w_ij`` divided out.
    ``name`` and ``params`` identify the nonlinear model for simulation; a
    ``"custom"`` model can only be analysed, not simulated.
    """

    F_phi: float = 0.0
    F_omega: float = 0.0
    F_phi_tau: float = 0.0
    F_omega_tau: float = 0.0
    G_phi: float = 0.0
    G_omega: float = 0.0
    G_phi_tau: float = 0.0
    G_omega_tau: float = 0.0
    name: str = "custom"
    params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        values = [self.F_phi, self.F_omega, self.F_phi_tau, self.F_omega_tau,
                  self.G_phi, self.G_omega, self.G_phi_tau, self.G_omega_tau]
        if not all(np.isfinite(values)):
            raise ValueError("Jacobian entries must be finite")
        if self.phase_channel and self.frequency_channel:
            raise ValueError(
                "delay acts on both phases and frequencies; only one channel is supported"
            )

    @property
    def phase_channel(self) -> bool:
        return self.F_phi_tau != 0 or self.G_phi_tau != 0

    @property
    def frequency_channel(self) -> bool:
        return self.F_omega_tau != 0 or self.G_omega_tau != 0

    @property
    def delayed_local(self) -> bool:
        return self.F_phi_tau != 0 or self.F_omega_tau != 0

    @property
    def delay_type(self) -> DelayType:
        if self.phase_channel:
            return DelayType.PHASE
        if self.frequency_channel:
            return DelayType.FREQUENCY
        return DelayType.NONE


@dataclass(frozen=True)
class BlockCoefficients:
    lam: float
    a: float
    b: float
    a_tau: float
    b_tau: float


def jacobians_inverter(alpha_tilde: float, beta_tilde: float) -> ModelJacobians:
    """Droop-controlled inverters: delayed sine coupling scaled by ``beta_tilde``."""
    if not (alpha_tilde > 0 and beta_tilde > 0):
        raise ValueError("alpha_tilde and beta_tilde must be positive")
    return ModelJacobians(
        F_omega=-alpha_tilde,
        G_phi_tau=beta_tilde,
        name="inverter",
        params={"alpha_tilde": float(alpha_tilde), "beta_tilde": float(beta_tilde)},
    )


def jacobians_dsgc(alpha: float, gamma: float) -> ModelJacobians:
    """Decentral smart grid control: instantaneous coupling, delayed damping ``gamma``."""
    if not (alpha > 0 and gamma > 0):
        raise ValueError("alpha and gamma must be positive")
    return ModelJacobians(
        F_omega=-alpha,
        F_omega_tau=-gamma,
        G_phi=1.0,
        name="dsgc",
        params={"alpha": float(alpha), "gamma": float(gamma)},
    )


def block_coefficients(jac: ModelJacobians, lam: float) -> BlockCoefficients:
    # Linearizing the right-hand side gives theta'' = (F - lam G) terms; the
    # block equation carries them with a minus sign.
    if lam < 0:
        raise ValueError(f"Laplacian eigenvalue must be non-negative, got {lam}")
    lam = float(lam)
    return BlockCoefficients(
        lam=lam,
        a=-(jac.F_omega - lam * jac.G_omega) + 0.0,
        b=-(jac.F_phi - lam * jac.G_phi) + 0.0,
        a_tau=-(jac.F_omega_tau - lam * jac.G_omega_tau) + 0.0,
        b_tau=-(jac.F_phi_tau - lam * jac.G_phi_tau) + 0.0,
    )


def block_coefficient_arrays(jac: ModelJacobians, lams):
    """Vectorized coefficients ``(a, b, a_tau, b_tau)`` for an array of eigenvalues."""
    lams = np.asarray(lams, dtype=float)
    return (
        -(jac.F_omega - lams * jac.G_omega) + 0.0,
        -(jac.F_phi - lams * jac.G_phi) + 0.0,
        -(jac.F_omega_tau - lams * jac.G_omega_tau) + 0.0,
        -(jac.F_phi_tau - lams * jac.G_phi_tau) + 0.0,
    )


def transversal_set(jac: ModelJacobians, n: int) -> list[int]:
    """1-based indices of the modes that decide stability.

    The longitudinal mode (lambda_1 = 0) only matters when the local dynamics
    carry the delay.
    """
    if n < 2:
        raise ValueError("need at least two nodes")
    start = 1 if jac.delayed_local else 2
    return list(range(start, n + 1))


def make_model(name: str, alpha=None, beta=None, gamma=None, jacobians=None) -> ModelJacobians:
    """Build model Jacobians from a model name and its parameters.

    ``name`` is ``"inverter"`` (uses ``alpha``, ``beta``), ``"dsgc"`` (uses
    ``alpha``, ``gamma``) or ``"custom"`` with ``jacobians`` either a mapping
    of the eight partials or a sequence ordered as ``F_phi, F_omega,
    F_phi_tau, F_omega_tau, G_phi, G_omega, G_phi_tau, G_omega_tau``.
    """
    if name == "inverter":
        return jacobians_inverter(alpha, beta)
    if name == "dsgc":
        return jacobians_dsgc(alpha, gamma)
    if name == "custom":
        if jacobians is None:
            raise ValueError("custom model needs jacobians")
        keys = ["F_phi", "F_omega", "F_phi_tau", "F_omega_tau",
                "G_phi", "G_omega", "G_phi_tau", "G_omega_tau"]
        if isinstance(jacobians, dict):
            unknown = set(jacobians) - set(keys)
            if unknown:
                raise ValueError(f"unknown Jacobian entries {sorted(unknown)}")
            values = {k: float(v) for k, v in jacobians.items()}
        else:
            values = [float(v) for v in jacobians]
            if len(values) != 8:
                raise ValueError("custom model needs exactly 8 Jacobian entries")
            values = dict(zip(keys, values))
        return ModelJacobians(**values, name="custom", params=dict(values))
    raise ValueError(f"unknown model {name!r}")
