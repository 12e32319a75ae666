"""Synchronous fixed point and effective Laplacian of sine-coupled networks."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .network import Network, NetworkError

__all__ = [
    "EffectiveLaplacian",
    "FixedPointError",
    "SynchronousState",
    "effective_laplacian",
    "power_flow_residual",
    "solve_fixed_point",
]

BALANCE_TOL = 1e-12


class FixedPointError(RuntimeError):
    """No admissible synchronous fixed point could be computed."""


@dataclass(frozen=True, eq=False)
class SynchronousState:
    """Phase-locked state in the co-rotating frame, gauge fixed to ``phases[0] == 0``."""

    phases: np.ndarray
    residual_norm: float
    max_edge_angle: float
    iterations: int = 0
    residual_history: tuple[float, ...] = field(default=(), repr=False)


@dataclass(frozen=True, eq=False)
class EffectiveLaplacian:
    """Laplacian of the adjacency reweighted by ``w_ij = cos(phi_j - phi_i)``."""

    matrix: np.ndarray
    edge_weights: np.ndarray


def power_flow_residual(network: Network, phases) -> np.ndarray:
    """``P_i - sum_j K_ij sin(phi_i - phi_j)``."""
    phases = np.asarray(phases, dtype=float)
    diff = phases[:, None] - phases[None, :]
    return network.power - np.sum(network.adjacency * np.sin(diff), axis=1)


def _edge_angles(network, phases):
    diff = phases[:, None] - phases[None, :]
    return np.abs(diff[network.adjacency > 0])


def solve_fixed_point(network: Network, tol: float = 1e-10, max_iter: int = 50) -> SynchronousState:
    """Newton iteration for the lossless power flow, started from ``phi = 0``.

    Node 0 is pinned to zero. Solutions with an edge angle of pi/2 or more are
    rejected since they leave the normal operating branch.
    """
    power = network.power
    scale = max(1.0, float(np.max(np.abs(power))))
    imbalance = abs(float(np.sum(power)))
    if imbalance > BALANCE_TOL * scale:
        raise FixedPointError(f"power is not balanced: sum(P) = {imbalance:.3e}")
    if not network.is_connected():
        raise NetworkError("network is disconnected")

    K = network.adjacency
    phases = np.zeros(network.n)
    residual = power_flow_residual(network, phases)
    history = [float(np.max(np.abs(residual)))]
    iterations = 0
    while history[-1] > tol:
        if iterations >= max_iter:
            raise FixedPointError(
                f"Newton iteration did not converge in {max_iter} steps "
                f"(residual {history[-1]:.3e})"
            )
        coupling = K * np.cos(phases[:, None] - phases[None, :])
        # d r_i / d phi_j for the residual above
        jac = coupling - np.diag(coupling.sum(axis=1))
        try:
            step = np.linalg.solve(jac[1:, 1:], -residual[1:])
        except np.linalg.LinAlgError as exc:
            raise FixedPointError("singular Newton matrix") from exc
        phases[1:] += step
        residual = power_flow_residual(network, phases)
        history.append(float(np.max(np.abs(residual))))
        iterations += 1
        if not np.all(np.isfinite(phases)):
            raise FixedPointError("Newton iteration diverged")

    max_angle = float(np.max(_edge_angles(network, phases), initial=0.0))
    if max_angle >= np.pi / 2:
        raise FixedPointError(
            f"no normal-operation fixed point found (max edge angle {max_angle:.4f} rad)"
        )
    phases.setflags(write=False)
    return SynchronousState(phases, history[-1], max_angle, iterations, tuple(history))


def effective_laplacian(network: Network, state: SynchronousState) -> EffectiveLaplacian:
    phases = np.asarray(state.phases, dtype=float)
    if phases.shape != (network.n,):
        raise ValueError("synchronous state does not match the network size")
    on_edge = network.adjacency > 0
    weights = np.where(on_edge, np.cos(phases[None, :] - phases[:, None]), 0.0)
    if np.any(weights[on_edge] <= 0):
        i, j = np.argwhere(on_edge & (weights <= 0))[0]
        raise FixedPointError(f"non-positive edge factor w[{i},{j}] = {weights[i, j]:.3e}")
    coupled = weights * network.adjacency
    matrix = np.diag(coupled.sum(axis=1)) - coupled
    return EffectiveLaplacian(matrix, weights)
