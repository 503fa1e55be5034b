"""Saint-Venant model definitions.

Conserved variables are the depth h and the discharges q = h*u, p = h*v.
The module provides the nonlinear fluxes and their Jacobians, the
lake-at-rest linearization (which yields the constant advection matrices of
the linearized system), the two viscosity matrices, and both initial
conditions used by the simulator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

H_FLOOR = 1e-8


class DepthFloorError(ValueError):
    """Water depth dropped to or below the configured floor."""


@dataclass(frozen=True)
class SweParams:
    """Gravity, reference depth, and the two viscosity constants."""

    g: float = 10.0
    h0: float = 1.0
    eps: float = 1.0
    delta: float = 5.0

    def __post_init__(self):
        if self.g <= 0 or self.h0 <= 0:
            raise ValueError("g and h0 must be positive")
        if self.eps <= 0:
            raise ValueError("viscosity scale eps must be positive")


@dataclass(frozen=True)
class State:
    """Depth and discharges; fields may be scalars or same-shape arrays."""

    h: np.ndarray
    q: np.ndarray
    p: np.ndarray


def _check_depth(h, floor=H_FLOOR):
    if np.min(h) <= floor:
        raise DepthFloorError(f"depth {np.min(h):.3e} at or below floor {floor:g}")


def flux_x(state: State, g: float, h_floor: float = H_FLOOR):
    """x-flux (q, q^2/h + g h^2/2, p q/h)."""
    h, q, p = state.h, state.q, state.p
    _check_depth(h, h_floor)
    return np.asarray([q * np.ones_like(h), q * q / h + 0.5 * g * h * h, p * q / h])


def flux_y(state: State, g: float, h_floor: float = H_FLOOR):
    """y-flux (p, p q/h, p^2/h + g h^2/2)."""
    h, q, p = state.h, state.q, state.p
    _check_depth(h, h_floor)
    return np.asarray([p * np.ones_like(h), p * q / h, p * p / h + 0.5 * g * h * h])


def jacobian_x(state: State, g: float, h_floor: float = H_FLOOR) -> np.ndarray:
    """d(flux_x)/d(h, q, p); equals the linearized advection matrix A at lake-at-rest."""
    h, q, p = float(state.h), float(state.q), float(state.p)
    _check_depth(h, h_floor)
    u, v = q / h, p / h
    return np.array(
        [
            [0.0, 1.0, 0.0],
            [g * h - u * u, 2.0 * u, 0.0],
            [-u * v, v, u],
        ]
    )


def jacobian_y(state: State, g: float, h_floor: float = H_FLOOR) -> np.ndarray:
    """d(flux_y)/d(h, q, p); equals the linearized advection matrix B at lake-at-rest."""
    h, q, p = float(state.h), float(state.q), float(state.p)
    _check_depth(h, h_floor)
    u, v = q / h, p / h
    return np.array(
        [
            [0.0, 0.0, 1.0],
            [-u * v, v, u],
            [g * h - v * v, 0.0, 2.0 * v],
        ]
    )


def advection_matrices(params: SweParams):
    """Constant matrices of the lake-at-rest linearization."""
    rest = State(h=np.float64(params.h0), q=np.float64(0.0), p=np.float64(0.0))
    return jacobian_x(rest, params.g), jacobian_y(rest, params.g)


def viscosity_matrices(params: SweParams):
    """Scalar x-viscosity and the coupled y-viscosity with the delta entries."""
    c = params.eps * np.eye(3)
    d = params.eps * np.eye(3)
    d[2, 0] = params.delta
    d[2, 1] = params.delta
    return c, d


def initial_linear(x, y) -> State:
    """Perturbation fields for the linearized runs: a Gaussian-like bump of
    relative height 1/40 on a 1e-2 background, supported on the unit disk.

    The bump formula does not reach the outside constant at the disk rim, so
    the field carries a small O(2.5e-4) jump there by construction.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    r2 = x * x + y * y
    bump = np.exp(2.0 * (1.0 - r2)) / 40.0
    h = 1e-2 * np.where(r2 < 1.0, 1.0 + bump, 1.0)
    return State(h=h, q=np.zeros_like(h), p=np.zeros_like(h))


def initial_nonlinear(x, y) -> State:
    """Depth field for the nonlinear runs: unit depth plus a bump of height
    1/4000 on the unit disk (same rim jump caveat as the linear version)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    r2 = x * x + y * y
    bump = np.exp(2.0 * (1.0 - r2)) / 4000.0
    h = np.where(r2 < 1.0, 1.0 + bump, 1.0)
    return State(h=h, q=np.zeros_like(h), p=np.zeros_like(h))
