"""First-order eigenvalue corrections of A + delta*C.

For A with distinct eigenvalues lam_l, the eigenvalues of A + delta*C expand
as lam_l + delta*lam_l1 + O(delta^2).  Writing the characteristic polynomial
of A + delta*C in principal-minor form with coefficients r_i(delta), the
correction is

    lam_l1 = -(1 / P'_n(lam_l)) * sum_{i=1}^{n} (-1)^i r_i1 lam_l^(n-i),

where r_i1 = d r_i / d delta at delta = 0.  The module provides that general
formula, the n=2 and n=3 closed forms, and two independent oracles (finite
differences on the eigenvalues and the classical left/right-eigenvector
quotient) so every path can be cross-checked against the others.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.optimize import linear_sum_assignment

from . import matkit

GAP_RTOL = 1e-6  # refuse when min pairwise eigenvalue gap < GAP_RTOL*(1+spectral radius)
FD_DELTA_MIN = 1e-8
FD_DELTA_MAX = 1e-3


class RepeatedEigenvalueError(ValueError):
    """Base eigenvalues are repeated or too close for first-order theory."""


class AmbiguousMatchError(RuntimeError):
    """Perturbed eigenvalues could not be matched to base eigenvalues."""


@dataclass(frozen=True)
class PerturbedCharPoly:
    """Principal-minor coefficients r_i and their delta-derivatives r_i1."""

    r: np.ndarray
    r1: np.ndarray

    def __post_init__(self):
        if self.r.size != self.r1.size:
            raise ValueError("r and r1 must have equal length")

    @property
    def n(self) -> int:
        return self.r.size - 1


@dataclass(frozen=True)
class PerturbationResult:
    """Base eigenvalues with index-aligned first-order corrections."""

    base_eigenvalues: np.ndarray
    corrections: np.ndarray
    method: str

    def __post_init__(self):
        if self.base_eigenvalues.size != self.corrections.size:
            raise ValueError("base_eigenvalues and corrections must have equal length")


def _pair(a, c):
    a = matkit.as_square(a, name="A")
    c = matkit.as_square(c, name="C")
    if a.shape != c.shape:
        raise matkit.DimensionError(f"A and C dimensions differ: {a.shape} vs {c.shape}")
    return a, c


def _require_distinct(values, monic=None):
    """Refuse repeated or near-repeated eigenvalues.

    Besides the relative gap threshold, a genuinely repeated root that the
    polynomial solver split apart must be caught: each root carries a Newton
    correction |P/P'| as an error estimate, and two roots whose estimate
    balls overlap are treated as one repeated eigenvalue.
    """
    n = values.size
    scale = 1.0 + np.abs(values).max()
    if monic is not None:
        err = np.empty(n)
        for i, lam in enumerate(values):
            p, dp = matkit._poly_and_deriv(monic, lam)
            err[i] = np.inf if dp == 0 else abs(p / dp)
    else:
        err = np.zeros(n)
    for i in range(n):
        for j in range(i + 1, n):
            gap = abs(values[i] - values[j])
            if gap < GAP_RTOL * scale or gap < 4.0 * (err[i] + err[j]):
                raise RepeatedEigenvalueError(
                    f"eigenvalues {values[i]} and {values[j]} are repeated or too close "
                    f"(gap {gap:.3e}, refusal floor {max(GAP_RTOL * scale, 4.0 * (err[i] + err[j])):.3e})"
                )


def _sorted_result(lams, corrections, method):
    order = np.lexsort((lams.imag, lams.real))
    return PerturbationResult(
        base_eigenvalues=lams[order], corrections=corrections[order], method=method
    )


def align_to(result: PerturbationResult, reference: np.ndarray) -> PerturbationResult:
    """Permute a result so its base eigenvalues match ``reference`` by proximity.

    Useful when comparing methods whose eigenvalue solvers introduce
    different rounding; requires an unambiguous nearest-neighbor assignment.
    """
    ref = np.asarray(reference, dtype=np.complex128)
    if ref.size != result.base_eigenvalues.size:
        raise ValueError("reference length mismatch")
    cost = np.abs(result.base_eigenvalues[None, :] - ref[:, None])
    rows, cols = linear_sum_assignment(cost)
    perm = np.empty_like(cols)
    perm[rows] = cols
    return PerturbationResult(
        base_eigenvalues=result.base_eigenvalues[perm],
        corrections=result.corrections[perm],
        method=result.method,
    )


def perturbed_minor_derivatives(a, c) -> PerturbedCharPoly:
    """d/d delta of every principal-minor sum of A + delta*C at delta = 0.

    r_i(delta) is a polynomial of degree <= i in delta, so sampling it at the
    integer nodes delta = 0..i and differentiating the interpolant at 0 is
    exact up to rounding.
    """
    a, c = _pair(a, c)
    n = a.shape[0]
    # r_i at delta = 0..n, computed in one sweep of characteristic polynomials
    samples = np.empty((n + 1, n + 1), dtype=np.result_type(a, c))
    for d in range(n + 1):
        samples[d] = matkit.char_poly(a + d * c).coeffs
    r1 = np.zeros(n + 1, dtype=samples.dtype)
    for i in range(1, n + 1):
        nodes = np.arange(i + 1, dtype=np.float64)
        vander = np.vander(nodes, increasing=True)
        coeffs = np.linalg.solve(vander, samples[: i + 1, i])
        r1[i] = coeffs[1]
    return PerturbedCharPoly(r=samples[0], r1=r1)


def corrections_general(a, c) -> PerturbationResult:
    """First-order corrections from the perturbed characteristic polynomial."""
    a, c = _pair(a, c)
    n = a.shape[0]
    spectrum = matkit.eigenvalues(a)
    pcp = perturbed_minor_derivatives(a, c)
    cp = matkit.CharPoly(coeffs=pcp.r)
    _require_distinct(spectrum.values, cp.monic())
    lams = spectrum.values
    corr = np.empty(n, dtype=np.complex128)
    signs = (-1.0) ** np.arange(1, n + 1)
    for l, lam in enumerate(lams):
        powers = lam ** np.arange(n - 1, -1, -1)
        corr[l] = -np.sum(signs * pcp.r1[1:] * powers) / cp.deriv(lam)
    return _sorted_result(lams, corr, "general")


def closed_form_n2(a, c) -> PerturbationResult:
    """Two-by-two closed form for the first-order corrections."""
    a, c = _pair(a, c)
    if a.shape[0] != 2:
        raise matkit.DimensionError("closed_form_n2 requires 2x2 matrices")
    spectrum = matkit.eigenvalues(a)
    _require_distinct(spectrum.values, matkit.char_poly(a).monic())
    lams = spectrum.values
    num_const = a[0, 1] * c[1, 0] - a[1, 1] * c[0, 0] + a[1, 0] * c[0, 1] - a[0, 0] * c[1, 1]
    tr_c = c[0, 0] + c[1, 1]
    tr_a = a[0, 0] + a[1, 1]
    corr = (tr_c * lams + num_const) / (2.0 * lams - tr_a)
    return _sorted_result(lams, corr, "closed_n2")


def closed_form_n3(a, c) -> PerturbationResult:
    """Three-by-three closed form built from minors of A."""
    a, c = _pair(a, c)
    if a.shape[0] != 3:
        raise matkit.DimensionError("closed_form_n3 requires 3x3 matrices")
    spectrum = matkit.eigenvalues(a)
    _require_distinct(spectrum.values, matkit.char_poly(a).monic())
    lams = spectrum.values

    r21 = (
        a[1, 1] * c[2, 2] + a[2, 2] * c[1, 1] - a[1, 2] * c[2, 1] - a[2, 1] * c[1, 2]
        + a[0, 0] * c[2, 2] + a[2, 2] * c[0, 0] - a[0, 2] * c[2, 0] - a[2, 0] * c[0, 2]
        + a[0, 0] * c[1, 1] + a[1, 1] * c[0, 0] - a[0, 1] * c[1, 0] - a[1, 0] * c[0, 1]
    )
    minor_ii = sum(matkit.minor(a, i, i) for i in range(3))
    cofactor_sum = sum(
        (-1) ** (i + j) * c[i, j] * matkit.minor(a, i, j) for i in range(3) for j in range(3)
    )
    tr_c = np.trace(c)
    tr_a = np.trace(a)
    corr = (tr_c * lams**2 - r21 * lams + cofactor_sum) / (
        3.0 * lams**2 - 2.0 * tr_a * lams + minor_ii
    )
    return _sorted_result(lams, corr, "closed_n3")


def match_nearest(base, shifted):
    """Assign each base eigenvalue its nearest perturbed partner.

    Returns the permutation p with shifted[p[i]] matched to base[i].  A
    near-tie (two perturbed eigenvalues equally close to one base value)
    raises :class:`AmbiguousMatchError` instead of guessing.
    """
    base = np.asarray(base, dtype=np.complex128)
    shifted = np.asarray(shifted, dtype=np.complex128)
    cost = np.abs(shifted[None, :] - base[:, None])
    rows, cols = linear_sum_assignment(cost)
    for i in rows:
        d = np.sort(cost[i])
        if d[1] - d[0] <= 1e-9 * (1.0 + d[1]):
            raise AmbiguousMatchError(
                f"two perturbed eigenvalues are equally near base eigenvalue {base[i]}"
            )
    perm = np.empty_like(cols)
    perm[rows] = cols
    return perm


def fd_oracle(a, c, delta: float = 1e-5) -> PerturbationResult:
    """Finite-difference oracle: (lam_l(delta) - lam_l) / delta.

    Perturbed eigenvalues are matched to base eigenvalues by nearest
    distance via :func:`match_nearest`.
    """
    a, c = _pair(a, c)
    if not FD_DELTA_MIN <= delta <= FD_DELTA_MAX:
        raise ValueError(f"delta {delta:g} outside [{FD_DELTA_MIN:g}, {FD_DELTA_MAX:g}]")
    base = matkit.eigenvalues(a).values
    _require_distinct(base, matkit.char_poly(a).monic())
    shifted = matkit.eigenvalues(a + delta * c).values
    perm = match_nearest(base, shifted)
    corr = (shifted[perm] - base) / delta
    return _sorted_result(base, corr, "fd_oracle")


def eigvec_oracle(a, c) -> PerturbationResult:
    """Classical first-order correction (l . C r) / (l . r) per eigenvalue."""
    a, c = _pair(a, c)
    lams, vl, vr = scipy.linalg.eig(a, left=True, right=True)
    lams = lams.astype(np.complex128)
    _require_distinct(lams, matkit.char_poly(a).monic())
    n = lams.size
    corr = np.empty(n, dtype=np.complex128)
    for i in range(n):
        left = vl[:, i].conj()
        right = vr[:, i]
        denom = left @ right
        if denom == 0:
            raise RuntimeError(f"degenerate left/right eigenvector pairing at {lams[i]}")
        corr[i] = (left @ c @ right) / denom
    return _sorted_result(lams, corr, "eigvec_oracle")
