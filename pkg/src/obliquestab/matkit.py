"""Small dense matrix algebra built on characteristic polynomials.

Everything here targets matrices of dimension 2..8.  Characteristic
polynomials are written in the signed principal-minor convention

    P_n(lam) = sum_{i=0}^{n} (-1)^i r_i lam^(n-i),   r_0 = 1,

so r_1 is the trace, r_n the determinant, and r_i in general the sum of all
i-rowed principal minors.  Eigenvalues are the roots of P_n, found by Aberth
simultaneous iteration; every returned eigenvalue carries a normalized
backward-error residual so callers can detect ill-conditioned inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

MAX_DIM = 8
RESIDUAL_TOL = 1e-10
MAX_ITERATIONS = 200


class DimensionError(ValueError):
    """Matrix is not square or its dimension is outside the supported range."""


class RootConvergenceError(RuntimeError):
    """Root iteration failed to reach the residual tolerance."""

    def __init__(self, message, roots=None, residuals=None):
        super().__init__(message)
        self.roots = roots
        self.residuals = residuals


def as_square(matrix, name="matrix") -> np.ndarray:
    """Validate and return a square 2..8 dimensional float64/complex128 array."""
    a = np.asarray(matrix)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {a.shape}")
    n = a.shape[0]
    if not 2 <= n <= MAX_DIM:
        raise DimensionError(f"{name} dimension {n} outside supported range 2..{MAX_DIM}")
    if np.iscomplexobj(a):
        return np.ascontiguousarray(a, dtype=np.complex128)
    return np.ascontiguousarray(a, dtype=np.float64)


@njit(cache=True)
def _fl_charpoly(m):
    """Faddeev-LeVerrier recursion: monic coefficients of det(lam*I - M).

    Returns c with c[0] = 1 and det(lam*I - M) = sum_j c[j] lam^(n-j).
    """
    n = m.shape[0]
    c = np.zeros(n + 1, m.dtype)
    c[0] = 1.0
    mk = np.zeros((n, n), m.dtype)
    for k in range(1, n + 1):
        mk = m @ mk
        for i in range(n):
            mk[i, i] += c[k - 1]
        t = mk[0, 0] - mk[0, 0]  # zero of the right dtype
        for i in range(n):
            for j in range(n):
                t += m[i, j] * mk[j, i]
        c[k] = -t / k
    return c


@njit(cache=True)
def _poly_and_deriv(coeffs, z):
    """Horner evaluation of a monic polynomial and its derivative at z."""
    n = coeffs.size - 1
    p = coeffs[0] + 0j
    dp = 0.0 + 0j
    for j in range(1, n + 1):
        dp = dp * z + p
        p = p * z + coeffs[j]
    return p, dp


@njit(cache=True)
def _aberth(coeffs, tol, max_iter):
    """All roots of a monic polynomial by Aberth simultaneous iteration.

    Initial guesses sit on a circle of radius 1 + max|coeff|, nudged by fixed
    irrational phases so runs are deterministic and conjugate-symmetric
    stalls cannot occur.  Returns (roots, residuals, converged) where the
    residuals are |P(z)| / (1 + |z|)^n.
    """
    n = coeffs.size - 1
    radius = 0.0
    for j in range(1, n + 1):
        a = abs(coeffs[j])
        if a > radius:
            radius = a
    radius += 1.0

    z = np.empty(n, np.complex128)
    for m in range(n):
        theta = 2.0 * np.pi * m / n + 0.70710678118654752 + 0.017320508075688773 * m
        z[m] = radius * complex(np.cos(theta), np.sin(theta))

    res = np.empty(n, np.float64)
    converged = False
    for _ in range(max_iter):
        worst = 0.0
        for m in range(n):
            p, dp = _poly_and_deriv(coeffs, z[m])
            r = abs(p) / (1.0 + abs(z[m])) ** n
            res[m] = r
            if r > worst:
                worst = r
            # converged roots still take the update: the final sweep acts as
            # a polish pass, pushing simple roots to machine accuracy
            if dp == 0:
                z[m] += 1e-6 * (1.0 + abs(z[m]))
                continue
            w = p / dp
            s = 0.0 + 0j
            for j in range(n):
                if j != m:
                    d = z[m] - z[j]
                    if d != 0:
                        s += 1.0 / d
            denom = 1.0 - w * s
            if denom == 0:
                z[m] -= w
            else:
                z[m] -= w / denom
        if worst <= tol:
            converged = True
            break

    if converged:
        for m in range(n):
            p, _ = _poly_and_deriv(coeffs, z[m])
            res[m] = abs(p) / (1.0 + abs(z[m])) ** n
    return z, res, converged


@njit(cache=True)
def _spectral_abscissa_from_coeffs(coeffs, tol, max_iter):
    roots, res, ok = _aberth(coeffs, tol, max_iter)
    worst = 0.0
    sigma = -np.inf
    for m in range(roots.size):
        if res[m] > worst:
            worst = res[m]
        if roots[m].real > sigma:
            sigma = roots[m].real
    return sigma, worst, ok


@dataclass(frozen=True)
class CharPoly:
    """Characteristic polynomial in principal-minor form.

    ``coeffs[i]`` is r_i, the sum of the i-rowed principal minors, so
    ``coeffs[0] == 1``, ``coeffs[1]`` is the trace and ``coeffs[n]`` the
    determinant.
    """

    coeffs: np.ndarray

    @property
    def n(self) -> int:
        return self.coeffs.size - 1

    def monic(self) -> np.ndarray:
        """Coefficients of det(lam*I - M) in descending powers of lam."""
        signs = (-1.0) ** np.arange(self.coeffs.size)
        return (signs * self.coeffs).astype(np.complex128)

    def __call__(self, lam):
        p, _ = _poly_and_deriv(self.monic(), complex(lam))
        return p

    def deriv(self, lam):
        _, dp = _poly_and_deriv(self.monic(), complex(lam))
        return dp


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues plus per-eigenvalue |P(lam)| backward-error residuals."""

    values: np.ndarray
    residuals: np.ndarray

    def __post_init__(self):
        if self.values.size != self.residuals.size:
            raise ValueError("values and residuals must have equal length")

    @property
    def n(self) -> int:
        return self.values.size


def char_poly(matrix) -> CharPoly:
    """Characteristic polynomial of a 2..8 dimensional square matrix."""
    m = as_square(matrix)
    c = _fl_charpoly(m)
    signs = (-1.0) ** np.arange(c.size)
    r = signs * c
    if not np.iscomplexobj(m):
        r = r.real
    return CharPoly(coeffs=r)


def minor(matrix, i: int, j: int) -> float:
    """Determinant of the matrix with row i and column j deleted (0-based)."""
    m = as_square(matrix)
    n = m.shape[0]
    if not (0 <= i < n and 0 <= j < n):
        raise IndexError(f"minor indices ({i}, {j}) out of range for dimension {n}")
    sub = np.delete(np.delete(m, i, axis=0), j, axis=1)
    if sub.shape[0] == 1:
        return sub[0, 0]
    return np.linalg.det(sub)


def eigenvalues(matrix, tol: float = RESIDUAL_TOL, max_iter: int = MAX_ITERATIONS) -> Spectrum:
    """All eigenvalues as roots of the characteristic polynomial.

    Raises :class:`RootConvergenceError` when any normalized residual stays
    above ``tol`` after ``max_iter`` Aberth sweeps.
    """
    cp = char_poly(matrix)
    monic = cp.monic()
    if not monic[1:].any():
        # P(lam) = lam^n: the roots are exactly zero, which simultaneous
        # iteration would only approach at rate tol^(1/n)
        zeros = np.zeros(cp.n, np.complex128)
        return Spectrum(values=zeros, residuals=zeros.real.copy())
    roots, res, ok = _aberth(monic, tol, max_iter)
    if not ok:
        raise RootConvergenceError(
            f"root iteration did not reach residual {tol:g} in {max_iter} sweeps "
            f"(worst residual {res.max():.3e})",
            roots=roots,
            residuals=res,
        )
    order = np.lexsort((roots.imag, roots.real))
    return Spectrum(values=roots[order], residuals=res[order])


def spectral_abscissa(matrix, tol: float = RESIDUAL_TOL, max_iter: int = MAX_ITERATIONS) -> float:
    """Largest real part among the eigenvalues."""
    return float(eigenvalues(matrix, tol=tol, max_iter=max_iter).values.real.max())
