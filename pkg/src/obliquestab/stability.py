"""Plane-wave stability operators, growth-rate scans, and conjecture harnesses.

A plane wave exp(omega*t + i*k*(gamma*x + sqrt(1-gamma^2)*y)) turns the
constant-coefficient system

    u_t + A u_x + B u_y = C u_xx + D u_yy

into the eigenvalue problem omega in spectrum(Omega(k, gamma)) with

    Omega = -i*k*(gamma*A + s*B) - k^2*(gamma^2*C + s^2*D),  s = sqrt(1-gamma^2).

The growth rate sigma(k) is the spectral abscissa of Omega.  Scans are
compiled with numba; grid points are independent eigenvalue solves and the
results are merged in grid order, so scans are deterministic.

Two conjecture harnesses classify evidence without asserting the conjectures:

* axis-combination conjecture: stability of the four one-directional
  operators -ik*(A|B) - k^2*(C|D) is checked against stability of the full
  oblique family; the verdict is ``consistent``, ``vacuous`` (hypothesis
  fails) or ``COUNTEREXAMPLE`` (hypothesis holds, conclusion fails).
* long-wave sign conjecture: the signs of the first-order eigenvalue
  corrections of the pair (A, C) are checked against full-scan stability of
  -ik*A - k^2*C, under BOTH candidate sign orientations, so the intended
  orientation can be identified empirically.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

from . import matkit, perturb
from .swe import SweParams

MARGINAL_TOL = 1e-12  # |sigma| <= tol counts as marginal, not unstable


class ScanError(RuntimeError):
    """Eigenvalue solve failed at some grid point."""


class AdmissibilityError(ValueError):
    """Input matrices violate the harness preconditions."""


class SamplingBudgetError(RuntimeError):
    """Rejection sampling exhausted its retry budget."""


def default_k_grid(k_max: float = 10.0, n: int = 1000) -> np.ndarray:
    """Uniform wavenumber grid on (0, k_max]."""
    return np.linspace(k_max / n, k_max, n)


def default_gamma_grid(n: int = 101) -> np.ndarray:
    """Uniform direction grid on [0, 1]."""
    return np.linspace(0.0, 1.0, n)


@dataclass(frozen=True, eq=False)
class ObliqueSpec:
    """Advection pair (a, b), viscosity pair (c, d), and a direction gamma."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray
    gamma: float = 0.5

    def __post_init__(self):
        mats = {}
        for name in ("a", "b", "c", "d"):
            mats[name] = matkit.as_square(getattr(self, name), name=name.upper())
            object.__setattr__(self, name, mats[name])
        shapes = {m.shape for m in mats.values()}
        if len(shapes) > 1:
            raise matkit.DimensionError(f"matrices must share dimension, got {shapes}")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma {self.gamma} outside [0, 1]")

    @property
    def n(self) -> int:
        return self.a.shape[0]

    def reflect_y(self) -> "ObliqueSpec":
        """Same system under y -> -y (B -> -B); covers the other half-circle
        of directions."""
        return ObliqueSpec(a=self.a, b=-self.b, c=self.c, d=self.d, gamma=self.gamma)

    def with_gamma(self, gamma: float) -> "ObliqueSpec":
        return ObliqueSpec(a=self.a, b=self.b, c=self.c, d=self.d, gamma=gamma)


def swe_oblique_spec(params: SweParams, gamma: float = 0.5) -> ObliqueSpec:
    """Paper-regime spec: lake-at-rest advection plus the two viscosity matrices."""
    from . import swe

    a, b = swe.advection_matrices(params)
    c, d = swe.viscosity_matrices(params)
    return ObliqueSpec(a=a, b=b, c=c, d=d, gamma=gamma)


def omega_1d(a, c, k: float) -> np.ndarray:
    """One-directional stability operator -i*k*A - k^2*C."""
    a = matkit.as_square(a, name="A")
    c = matkit.as_square(c, name="C")
    if a.shape != c.shape:
        raise matkit.DimensionError(f"A and C dimensions differ: {a.shape} vs {c.shape}")
    return (-1j * k) * a.astype(np.complex128) - (k * k) * c.astype(np.complex128)


def omega_oblique(spec: ObliqueSpec, k: float) -> np.ndarray:
    """Oblique stability operator for direction (gamma, sqrt(1-gamma^2))."""
    g = spec.gamma
    s = np.sqrt(max(0.0, 1.0 - g * g))
    m1 = g * spec.a + s * spec.b
    m2 = (g * g) * spec.c + (s * s) * spec.d
    return (-1j * k) * m1.astype(np.complex128) - (k * k) * m2.astype(np.complex128)


@njit(cache=True)
def _scan_sigma(m1, m2, ks, tol, max_iter):
    """sigma(k) = spectral abscissa of -ik*m1 - k^2*m2 per grid point.

    Also returns the max |Im(eigenvalue)| per point (for the literal
    negative-real-eigenvalue check) and a convergence flag.
    """
    nk = ks.size
    n = m1.shape[0]
    sigma = np.empty(nk)
    max_im = np.empty(nk)
    ok = np.ones(nk, np.bool_)
    omega = np.empty((n, n), np.complex128)
    for idx in range(nk):
        k = ks[idx]
        if k == 0.0:
            sigma[idx] = 0.0
            max_im[idx] = 0.0
            continue
        for i in range(n):
            for j in range(n):
                omega[i, j] = -1j * k * m1[i, j] - k * k * m2[i, j]
        coeffs = matkit._fl_charpoly(omega)
        allzero = True
        for j in range(1, n + 1):
            if coeffs[j] != 0:
                allzero = False
                break
        if allzero:
            sigma[idx] = 0.0
            max_im[idx] = 0.0
            continue
        roots, res, conv = matkit._aberth(coeffs, tol, max_iter)
        s = -np.inf
        mi = 0.0
        for m in range(n):
            if roots[m].real > s:
                s = roots[m].real
            a = abs(roots[m].imag)
            if a > mi:
                mi = a
        sigma[idx] = s
        max_im[idx] = mi
        ok[idx] = conv
    return sigma, max_im, ok


def _direction_combos(spec: ObliqueSpec, gamma: float):
    s = np.sqrt(max(0.0, 1.0 - gamma * gamma))
    m1 = np.ascontiguousarray(gamma * spec.a + s * spec.b)
    m2 = np.ascontiguousarray(gamma * gamma * spec.c + s * s * spec.d)
    return m1, m2


def _checked_scan(m1, m2, ks, tol, max_iter):
    sigma, max_im, ok = _scan_sigma(m1, m2, ks, tol, max_iter)
    if not ok.all():
        bad = ks[~ok]
        raise ScanError(f"eigenvalue solve failed at k = {bad[:5]}{'...' if bad.size > 5 else ''}")
    return sigma, max_im


@dataclass(frozen=True)
class GrowthCurve:
    """sigma(k) over a wavenumber grid for one direction."""

    k_grid: np.ndarray
    sigma: np.ndarray
    gamma: float
    argmax_k: float
    max_sigma: float

    def positive_interval(self, tol: float = MARGINAL_TOL):
        """(k_lo, k_hi) bracketing the grid points with sigma > tol, or None."""
        mask = self.sigma > tol
        if not mask.any():
            return None
        ks = self.k_grid[mask]
        return float(ks.min()), float(ks.max())


def growth_curve(
    spec: ObliqueSpec,
    k_grid=None,
    tol: float = matkit.RESIDUAL_TOL,
    max_iter: int = matkit.MAX_ITERATIONS,
) -> GrowthCurve:
    """Scan the oblique operator over a wavenumber grid."""
    ks = default_k_grid() if k_grid is None else np.asarray(k_grid, dtype=np.float64)
    if ks.ndim != 1 or ks.size == 0:
        raise ValueError("k_grid must be a nonempty 1-D array")
    if (ks < 0).any() or not np.isfinite(ks).all():
        raise ValueError("k_grid must be finite and nonnegative")
    m1, m2 = _direction_combos(spec, spec.gamma)
    sigma, _ = _checked_scan(m1, m2, ks, tol, max_iter)
    imax = int(sigma.argmax())
    return GrowthCurve(
        k_grid=ks,
        sigma=sigma,
        gamma=spec.gamma,
        argmax_k=float(ks[imax]),
        max_sigma=float(sigma[imax]),
    )


def growth_curve_1d(a, c, k_grid=None, **kw) -> GrowthCurve:
    """Scan the one-directional operator -ik*A - k^2*C (gamma = 1 path)."""
    a = matkit.as_square(a, name="A")
    zero = np.zeros_like(a)
    spec = ObliqueSpec(a=a, b=zero, c=matkit.as_square(c, name="C"), d=zero, gamma=1.0)
    return growth_curve(spec, k_grid, **kw)


# --- audit of the shallow-water characteristic equation ---------------------


def swe_characteristic_residual(omega, k: float, gamma: float, params: SweParams):
    """Evaluate the displayed plane-wave characteristic cubic at (omega, k).

    This is a consistency probe only; det(omega*I - Omega) is the ground
    truth and `characteristic_comparison` documents how the two relate.
    """
    gh = params.g * params.h0
    e = params.eps
    de = params.delta
    s3 = (1.0 - gamma * gamma) ** 1.5
    om = complex(omega)
    return (
        e**3 * k**6
        - de * k**3 * s3 * (gh * k * gamma + 1j * om)
        + e * k**2 * (gh * k**2 - 1j * de * k**3 * s3 + 3.0 * om**2)
        + 3.0 * e**2 * k**4 * om
        + (gh * k**2 + om**2) * om
    )


def _displayed_cubic_coeffs(k: float, gamma: float, params: SweParams) -> np.ndarray:
    """Coefficients of the displayed cubic in descending powers of omega."""
    gh = params.g * params.h0
    e = params.eps
    de = params.delta
    s3 = (1.0 - gamma * gamma) ** 1.5
    return np.array(
        [
            1.0,
            3.0 * e * k**2,
            3.0 * e**2 * k**4 + gh * k**2 - 1j * de * k**3 * s3,
            e**3 * k**6 - de * gh * k**4 * gamma * s3 + e * gh * k**4 - 1j * e * de * k**5 * s3,
        ],
        dtype=np.complex128,
    )


@dataclass(frozen=True)
class CharacteristicComparison:
    """Coefficient-level comparison of det(omega*I - Omega) vs the displayed cubic."""

    k: float
    gamma: float
    det_coeffs: np.ndarray
    displayed_coeffs: np.ndarray
    max_abs_discrepancy: float
    max_rel_discrepancy: float


def characteristic_comparison(k: float, gamma: float, params: SweParams) -> CharacteristicComparison:
    """Expand det(omega*I - Omega) in powers of omega and compare term-by-term."""
    spec = swe_oblique_spec(params, gamma)
    det_coeffs = matkit.char_poly(omega_oblique(spec, k)).monic()
    disp = _displayed_cubic_coeffs(k, gamma, params)
    diff = np.abs(det_coeffs - disp)
    scale = np.maximum(np.abs(det_coeffs), np.abs(disp))
    rel = diff / np.where(scale > 0, scale, 1.0)
    return CharacteristicComparison(
        k=k,
        gamma=gamma,
        det_coeffs=det_coeffs,
        displayed_coeffs=disp,
        max_abs_discrepancy=float(diff.max()),
        max_rel_discrepancy=float(rel.max()),
    )


def dispersion_root_residuals(spec: ObliqueSpec, k_grid) -> float:
    """Worst normalized |det(omega*I - Omega)| residual over all scan roots."""
    worst = 0.0
    for k in np.asarray(k_grid, dtype=np.float64):
        sp = matkit.eigenvalues(omega_oblique(spec, k))
        worst = max(worst, float(sp.residuals.max()))
    return worst


# --- conjecture harnesses ----------------------------------------------------


@dataclass(frozen=True)
class ConjectureReport:
    """Evidence record for the axis-combination conjecture on one case."""

    label: str
    hypothesis_holds: bool
    conclusion_holds: bool
    verdict: str
    witness: tuple | None
    hypothesis_holds_strict: bool
    hypothesis_literal_negative_reals: bool
    conclusion_holds_strict: bool
    operator_max_sigma: dict = field(default_factory=dict)
    axis_max_sigma: dict = field(default_factory=dict)
    oblique_max_sigma: float = np.nan
    oblique_argmax: tuple | None = None

    def __post_init__(self):
        expected = (
            "COUNTEREXAMPLE"
            if self.hypothesis_holds and not self.conclusion_holds
            else ("consistent" if self.hypothesis_holds else "vacuous")
        )
        if self.verdict != expected:
            raise ValueError(f"verdict {self.verdict!r} inconsistent with flags ({expected!r})")


def check_axis_combination_conjecture(
    spec: ObliqueSpec,
    k_grid=None,
    gamma_grid=None,
    label: str = "axis_combinations_imply_oblique_stability",
    tol: float = matkit.RESIDUAL_TOL,
    max_iter: int = matkit.MAX_ITERATIONS,
) -> ConjectureReport:
    """Classify one case of: stability of the four one-directional operators
    implies stability of the whole oblique family.

    "Eigenvalues negative" is ambiguous for complex spectra, so the report
    carries both the literal check (eigenvalues are negative real numbers)
    and the interpreted check (real parts < 0 for k != 0, with the
    MARGINAL_TOL band); the verdict uses the interpreted reading.
    """
    ks = default_k_grid() if k_grid is None else np.asarray(k_grid, dtype=np.float64)
    gammas = default_gamma_grid() if gamma_grid is None else np.asarray(gamma_grid, dtype=np.float64)
    if (ks <= 0).any():
        raise ValueError("k_grid must exclude 0 for strict-negativity checks")

    operators = {
        "adv_x_visc_x": (spec.a, spec.c),
        "adv_x_visc_y": (spec.a, spec.d),
        "adv_y_visc_x": (spec.b, spec.c),
        "adv_y_visc_y": (spec.b, spec.d),
    }
    op_max = {}
    hyp_tolerant = True
    hyp_strict = True
    hyp_literal = True
    for name, (adv, visc) in operators.items():
        sigma, max_im = _checked_scan(
            np.ascontiguousarray(adv), np.ascontiguousarray(visc), ks, tol, max_iter
        )
        op_max[name] = float(sigma.max())
        if sigma.max() > MARGINAL_TOL:
            hyp_tolerant = False
        if sigma.max() >= -MARGINAL_TOL:
            hyp_strict = False
        if (max_im > 1e-9 * (1.0 + np.abs(sigma).max())).any() or sigma.max() >= -MARGINAL_TOL:
            hyp_literal = False

    axis_max = {}
    worst_sigma = -np.inf
    worst_point = None
    concl_tolerant = True
    concl_strict = True
    for gamma in gammas:
        m1, m2 = _direction_combos(spec, float(gamma))
        sigma, _ = _checked_scan(m1, m2, ks, tol, max_iter)
        smax = float(sigma.max())
        if gamma in (0.0, 1.0):
            axis_max[float(gamma)] = smax
        if smax > worst_sigma:
            worst_sigma = smax
            worst_point = (float(ks[sigma.argmax()]), float(gamma), smax)
        if smax > MARGINAL_TOL:
            concl_tolerant = False
        if smax >= -MARGINAL_TOL:
            concl_strict = False

    verdict = (
        "COUNTEREXAMPLE"
        if hyp_tolerant and not concl_tolerant
        else ("consistent" if hyp_tolerant else "vacuous")
    )
    witness = worst_point if worst_sigma > MARGINAL_TOL else None
    return ConjectureReport(
        label=label,
        hypothesis_holds=hyp_tolerant,
        conclusion_holds=concl_tolerant,
        verdict=verdict,
        witness=witness,
        hypothesis_holds_strict=hyp_strict,
        hypothesis_literal_negative_reals=hyp_literal,
        conclusion_holds_strict=concl_strict,
        operator_max_sigma=op_max,
        axis_max_sigma=axis_max,
        oblique_max_sigma=float(worst_sigma),
        oblique_argmax=worst_point,
    )


@dataclass(frozen=True)
class LongwaveSignReport:
    """Evidence record for the long-wave correction-sign conjecture."""

    base_eigenvalues: np.ndarray
    corrections: np.ndarray
    all_corrections_positive: bool
    all_corrections_negative: bool
    scan_stable: bool
    max_sigma: float
    argmax_k: float
    agrees_positive_orientation: bool  # "all corrections positive <=> stable"
    agrees_negative_orientation: bool  # "all corrections negative <=> stable"


def check_longwave_sign_conjecture(
    a,
    c,
    k_grid=None,
    tol: float = matkit.RESIDUAL_TOL,
    max_iter: int = matkit.MAX_ITERATIONS,
) -> LongwaveSignReport:
    """Compare correction signs for the pair (A, C) against scan stability.

    Preconditions (verified, refused otherwise): A has distinct real
    eigenvalues and C has real positive eigenvalues.  The corrections are
    computed exactly from the perturbed characteristic polynomial; no sign
    convention is imposed, and agreement is reported under both candidate
    orientations.
    """
    a = matkit.as_square(a, name="A")
    c = matkit.as_square(c, name="C")
    # precondition verification wants exactness on repeated eigenvalues
    # (e.g. C = eps*I), which the polynomial root path cannot provide
    eig_a = np.linalg.eigvals(a)
    if np.abs(eig_a.imag).max() > 1e-9 * (1.0 + np.abs(eig_a).max()):
        raise AdmissibilityError("A must have real eigenvalues")
    eig_c = np.linalg.eigvals(c)
    if np.abs(eig_c.imag).max() > 1e-9 * (1.0 + np.abs(eig_c).max()):
        raise AdmissibilityError("C must have real eigenvalues")
    if eig_c.real.min() <= 0.0:
        raise AdmissibilityError("C must have positive eigenvalues")

    result = perturb.corrections_general(a, c)  # raises on repeated eigenvalues
    curve = growth_curve_1d(a, c, k_grid, tol=tol, max_iter=max_iter)
    stable = curve.max_sigma <= MARGINAL_TOL
    re = result.corrections.real
    all_pos = bool((re > MARGINAL_TOL).all())
    all_neg = bool((re < -MARGINAL_TOL).all())
    return LongwaveSignReport(
        base_eigenvalues=result.base_eigenvalues,
        corrections=result.corrections,
        all_corrections_positive=all_pos,
        all_corrections_negative=all_neg,
        scan_stable=stable,
        max_sigma=curve.max_sigma,
        argmax_k=curve.argmax_k,
        agrees_positive_orientation=all_pos == stable,
        agrees_negative_orientation=all_neg == stable,
    )


# --- admissible random samples -----------------------------------------------


def _well_conditioned(rng, n, cond_max=25.0, max_tries=1000):
    for _ in range(max_tries):
        s = rng.standard_normal((n, n))
        if np.linalg.cond(s) < cond_max:
            return s
    raise SamplingBudgetError("could not draw a well-conditioned basis")


def _distinct_real_spectrum_matrix(rng, n, gap, max_tries):
    for _ in range(max_tries):
        eigs = np.sort(rng.uniform(-3.0, 3.0, n))
        if n > 1 and np.diff(eigs).min() <= gap:
            continue
        s = _well_conditioned(rng, n)
        m = s @ np.diag(eigs) @ np.linalg.inv(s)
        got = np.linalg.eigvals(m)
        if np.abs(got.imag).max() > 1e-9:
            continue
        got = np.sort(got.real)
        if np.abs(got - eigs).max() > 1e-8 * (1.0 + np.abs(eigs).max()):
            continue
        return m
    raise SamplingBudgetError("could not sample a matrix with distinct real eigenvalues")


def _admissible_viscosity(rng, n, mode, max_tries):
    for _ in range(max_tries):
        if mode == "spd_viscosity":
            g = rng.standard_normal((n, n))
            c = g @ g.T / n + 0.3 * np.eye(n)
            try:
                np.linalg.cholesky(c)
            except np.linalg.LinAlgError:
                continue
            return c
        if mode == "positive_spectrum_viscosity":
            eigs = rng.uniform(0.2, 3.0, n)
            t = _well_conditioned(rng, n)
            c = t @ np.diag(eigs) @ np.linalg.inv(t)
            got = np.linalg.eigvals(c)
            if np.abs(got.imag).max() > 1e-9 or got.real.min() <= 0.0:
                continue
            return c
        raise ValueError(f"unknown viscosity mode {mode!r}")
    raise SamplingBudgetError("could not sample an admissible viscosity matrix")


def sample_admissible(
    seed: int,
    n: int,
    mode: str = "spd_viscosity",
    kind: str = "pair",
    gap: float = 0.1,
    max_tries: int = 1000,
):
    """Seeded random matrices satisfying the stability-theory preconditions.

    ``kind="pair"`` returns (A, C); ``kind="quadruple"`` returns
    (A, B, C, D).  Advection matrices have distinct real eigenvalues with
    pairwise gap > ``gap``; viscosity matrices are symmetric positive
    definite or have a positive (possibly complex-basis) spectrum depending
    on ``mode``.  Every matrix is verified against its defining property
    before being returned, and output is deterministic per seed.
    """
    if n not in (2, 3, 4):
        raise ValueError(f"dimension {n} not in (2, 3, 4)")
    rng = np.random.default_rng(seed)
    if kind == "pair":
        return (
            _distinct_real_spectrum_matrix(rng, n, gap, max_tries),
            _admissible_viscosity(rng, n, mode, max_tries),
        )
    if kind == "quadruple":
        return (
            _distinct_real_spectrum_matrix(rng, n, gap, max_tries),
            _distinct_real_spectrum_matrix(rng, n, gap, max_tries),
            _admissible_viscosity(rng, n, mode, max_tries),
            _admissible_viscosity(rng, n, mode, max_tries),
        )
    raise ValueError(f"unknown kind {kind!r}")
