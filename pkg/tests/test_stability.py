"""Stability operators, growth scans, audits, harnesses, and the sampler."""

import numpy as np
import pytest

from obliquestab import matkit, perturb, stability, swe
from obliquestab.swe import SweParams


def reference_spec(eps, gamma=0.5):
    return stability.swe_oblique_spec(SweParams(eps=eps), gamma=gamma)


class TestOmega1d:
    def test_k_zero_vanishes(self):
        a, b = swe.advection_matrices(SweParams())
        om = stability.omega_1d(a, np.eye(3), 0.0)
        np.testing.assert_array_equal(om, np.zeros((3, 3)))

    def test_commuting_scalar_viscosity(self):
        # A and eps*I commute: eigenvalues are -eps k^2 - i k {0, +-sqrt(g h0)}
        a, _ = swe.advection_matrices(SweParams())
        eps, k = 0.7, 1.3
        sp = matkit.eigenvalues(stability.omega_1d(a, eps * np.eye(3), k))
        s = np.sqrt(10.0)
        # real parts are all equal here, so order by imaginary part alone
        expected = sorted([-eps * k * k - 1j * k * lam for lam in (-s, 0.0, s)], key=lambda z: z.imag)
        got = sorted(sp.values, key=lambda z: z.imag)
        np.testing.assert_allclose(got, expected, atol=1e-8)

    def test_symmetric_two_by_two(self):
        a = np.array([[0.0, 1.0], [1.0, 0.0]])
        om = stability.omega_1d(a, np.eye(2), 1.0)
        sp = matkit.eigenvalues(om)
        expected = sorted([-1.0 - 1j, -1.0 + 1j], key=lambda z: z.imag)
        got = sorted(sp.values, key=lambda z: z.imag)
        np.testing.assert_allclose(got, expected, atol=1e-9)
        assert matkit.spectral_abscissa(om) == pytest.approx(-1.0, abs=1e-9)


class TestOmegaOblique:
    def test_reduction_gamma_one(self):
        spec = reference_spec(1.0).with_gamma(1.0)
        for k in (0.3, 1.5, 4.0):
            np.testing.assert_array_equal(
                stability.omega_oblique(spec, k), stability.omega_1d(spec.a, spec.c, k)
            )

    def test_reduction_gamma_zero(self):
        spec = reference_spec(1.0).with_gamma(0.0)
        for k in (0.3, 1.5, 4.0):
            np.testing.assert_array_equal(
                stability.omega_oblique(spec, k), stability.omega_1d(spec.b, spec.d, k)
            )

    def test_reduction_random_quadruples(self):
        rng = np.random.default_rng(31)
        ks = np.linspace(0.05, 5.0, 100)
        for trial in range(100):
            mats = rng.standard_normal((4, 3, 3))
            spec1 = stability.ObliqueSpec(*mats, gamma=1.0)
            spec0 = stability.ObliqueSpec(*mats, gamma=0.0)
            for k in ks[:: 20 if trial else 1]:
                np.testing.assert_array_equal(
                    stability.omega_oblique(spec1, k),
                    stability.omega_1d(mats[0], mats[2], k),
                )
                np.testing.assert_array_equal(
                    stability.omega_oblique(spec0, k),
                    stability.omega_1d(mats[1], mats[3], k),
                )

    def test_reference_unstable_point(self):
        om = stability.omega_oblique(reference_spec(1.0), 1.5)
        assert 0.35 <= matkit.spectral_abscissa(om) <= 0.45

    def test_conjugate_spectrum_under_k_flip(self):
        spec = reference_spec(1.0)
        sp_pos = matkit.eigenvalues(stability.omega_oblique(spec, 1.2)).values
        sp_neg = matkit.eigenvalues(stability.omega_oblique(spec, -1.2)).values
        got = sorted(np.conj(sp_neg), key=lambda z: (z.real, z.imag))
        expected = sorted(sp_pos, key=lambda z: (z.real, z.imag))
        np.testing.assert_allclose(got, expected, atol=1e-8)

    def test_gamma_range_validated(self):
        with pytest.raises(ValueError):
            reference_spec(1.0).with_gamma(1.5)


class TestGrowthCurve:
    def test_reference_unstable_regime(self):
        gc = stability.growth_curve(reference_spec(1.0))
        assert 0.35 <= gc.max_sigma <= 0.45
        assert 1.3 <= gc.argmax_k <= 1.7
        lo, hi = gc.positive_interval()
        assert 2.1 <= hi <= 2.5
        assert lo == gc.k_grid[0]

    def test_reference_stable_regime(self):
        gc = stability.growth_curve(reference_spec(5.0))
        assert gc.max_sigma <= 1e-12
        assert gc.positive_interval() is None

    def test_zero_advection_quadratic_decay(self):
        # pure diffusion: sigma(k) = -k^2 * (smallest eigenvalue of the
        # direction-weighted viscosity combination)
        rng = np.random.default_rng(5)
        g1 = rng.standard_normal((3, 3))
        g2 = rng.standard_normal((3, 3))
        c = g1 @ g1.T / 3 + 0.4 * np.eye(3)
        d = g2 @ g2.T / 3 + 0.4 * np.eye(3)
        gamma = 0.6
        zero = np.zeros((3, 3))
        spec = stability.ObliqueSpec(a=zero, b=zero, c=c, d=d, gamma=gamma)
        combo = gamma**2 * c + (1 - gamma**2) * d
        lam_min = np.linalg.eigvalsh(0.5 * (combo + combo.T)).min()  # symmetric here
        ks = np.linspace(0.1, 3.0, 30)
        gc = stability.growth_curve(spec, ks)
        assert (gc.sigma < 0).all()
        # tolerance reflects the 1e-10 root-residual contract, not exactness
        np.testing.assert_allclose(gc.sigma, -(ks**2) * lam_min, rtol=1e-4, atol=2e-6)

    def test_scan_failure_reports_offending_k(self):
        spec = reference_spec(1.0)
        with pytest.raises(stability.ScanError) as err:
            stability.growth_curve(spec, np.linspace(0.5, 2.0, 5), max_iter=1)
        assert "k =" in str(err.value)

    def test_sigma_zero_at_k_zero(self):
        ks = np.linspace(0.0, 2.0, 11)
        gc = stability.growth_curve(reference_spec(1.0), ks)
        assert gc.sigma[0] == 0.0

    def test_continuity_on_grid(self):
        # smoothness via second differences: sigma ~ -eps k^2 at large k has
        # unbounded slope but tiny curvature on a uniform grid
        gc = stability.growth_curve(reference_spec(1.0))
        dk = gc.k_grid[1] - gc.k_grid[0]
        second = np.abs(np.diff(gc.sigma, 2))
        assert second.max() < 50.0 * dk**2 + 1e-8

    def test_normal_family_always_stable(self):
        # symmetric advection with SPD viscosity: sigma(k) < 0 for k > 0
        rng = np.random.default_rng(77)
        a = rng.standard_normal((3, 3))
        a = a + a.T
        b = rng.standard_normal((3, 3))
        b = b + b.T
        g1 = rng.standard_normal((3, 3))
        g2 = rng.standard_normal((3, 3))
        c = g1 @ g1.T / 3 + 0.3 * np.eye(3)
        d = g2 @ g2.T / 3 + 0.3 * np.eye(3)
        for gamma in (0.0, 0.3, 0.7, 1.0):
            spec = stability.ObliqueSpec(a=a, b=b, c=c, d=d, gamma=gamma)
            gc = stability.growth_curve(spec, np.linspace(0.05, 8.0, 200))
            assert gc.max_sigma < 0.0


class TestCharacteristicAudit:
    def test_root_residual_near_zero(self):
        # omega extracted from the spectrum satisfies the displayed cubic
        spec = reference_spec(5.0)
        params = SweParams(eps=5.0)
        for k in (0.5, 1.5, 3.0):
            for om in matkit.eigenvalues(stability.omega_oblique(spec, k)).values:
                assert abs(stability.swe_characteristic_residual(om, k, 0.5, params)) <= 1e-8

    def test_zero_point(self):
        assert stability.swe_characteristic_residual(0.0, 0.0, 0.3, SweParams()) == 0.0

    def test_coefficient_comparison(self):
        rng = np.random.default_rng(2)
        worst = 0.0
        for _ in range(20):
            k = rng.uniform(0.1, 4.0)
            gamma = rng.uniform(0.0, 1.0)
            cmp = stability.characteristic_comparison(k, gamma, SweParams(eps=1.0))
            worst = max(worst, cmp.max_rel_discrepancy)
        # the displayed cubic agrees with det(omega I - Omega) to rounding
        assert worst < 1e-10

    def test_dispersion_root_residuals(self):
        spec = reference_spec(1.0)
        assert stability.dispersion_root_residuals(spec, np.linspace(0.1, 5.0, 50)) <= 1e-9


class TestAxisCombinationHarness:
    def test_reference_unstable_case_is_honest_counterexample(self):
        # all four one-directional operators are provably stable here while
        # the oblique family is not; the report must say exactly that
        rep = stability.check_axis_combination_conjecture(reference_spec(1.0))
        assert all(v < -1e-12 for v in rep.operator_max_sigma.values())
        assert rep.hypothesis_holds
        assert not rep.conclusion_holds
        assert rep.verdict == "COUNTEREXAMPLE"
        assert not rep.hypothesis_literal_negative_reals  # spectra are complex
        # axis directions stable, oblique witness near the documented peak
        assert all(v < 0 for v in rep.axis_max_sigma.values())
        k_w, gamma_w, sigma_w = rep.witness
        assert 1.3 <= k_w <= 1.7
        assert 0.4 <= gamma_w <= 0.6
        assert 0.35 <= sigma_w <= 0.45

    def test_reference_stable_case_consistent(self):
        rep = stability.check_axis_combination_conjecture(reference_spec(5.0))
        assert rep.hypothesis_holds and rep.conclusion_holds
        assert rep.verdict == "consistent"
        assert rep.witness is None

    def test_commuting_family_consistent(self):
        # A = B symmetric with equal diagonal SPD viscosities: the whole
        # family is simultaneously normal, hypothesis and conclusion hold
        a = np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.5]])
        c = np.diag([0.5, 1.0, 1.5])
        spec = stability.ObliqueSpec(a=a, b=a, c=c, d=c, gamma=0.5)
        rep = stability.check_axis_combination_conjecture(
            spec, np.linspace(0.05, 6.0, 200), np.linspace(0.0, 1.0, 21)
        )
        assert rep.verdict == "consistent"

    def test_verdict_invariant_enforced(self):
        with pytest.raises(ValueError):
            stability.ConjectureReport(
                label="x",
                hypothesis_holds=True,
                conclusion_holds=False,
                verdict="consistent",
                witness=None,
                hypothesis_holds_strict=True,
                hypothesis_literal_negative_reals=False,
                conclusion_holds_strict=False,
            )

    def test_rejects_zero_in_k_grid(self):
        with pytest.raises(ValueError):
            stability.check_axis_combination_conjecture(
                reference_spec(1.0), np.linspace(0.0, 5.0, 10)
            )


class TestLongwaveSignHarness:
    def test_scalar_viscosity_supports_positive_orientation(self):
        a, _ = swe.advection_matrices(SweParams())
        rep = stability.check_longwave_sign_conjecture(a, np.eye(3))
        np.testing.assert_allclose(rep.corrections.real, 1.0, atol=1e-8)
        assert rep.scan_stable
        assert rep.agrees_positive_orientation
        assert not rep.agrees_negative_orientation

    def test_reference_pair_recorded(self):
        a, _ = swe.advection_matrices(SweParams())
        _, d = swe.viscosity_matrices(SweParams(eps=1.0, delta=5.0))
        rep = stability.check_longwave_sign_conjecture(
            a, d, stability.default_k_grid(20.0, 2000)
        )
        np.testing.assert_allclose(rep.corrections.real, 1.0, atol=1e-8)
        assert rep.all_corrections_positive
        assert rep.scan_stable
        # finite differences independently confirm the harness corrections
        fd = perturb.align_to(perturb.fd_oracle(a, d, 1e-6), rep.base_eigenvalues)
        np.testing.assert_allclose(fd.corrections, rep.corrections, atol=1e-4)

    def test_negative_correction_sample_is_unstable(self):
        # one negative correction: instability at small k, growth ~ |corr| k^2
        a = np.array([[0.0, 1.0], [1.0, 0.0]])
        c = np.array([[1.0, 4.0], [0.1, 1.0]])
        rep = stability.check_longwave_sign_conjecture(a, c, np.linspace(0.01, 2.0, 400))
        assert not rep.all_corrections_positive
        assert not rep.scan_stable
        assert rep.max_sigma > 0.3
        assert rep.agrees_positive_orientation

    def test_preconditions_refused(self):
        rot = np.array([[0.0, -1.0], [1.0, 0.0]])  # complex eigenvalues
        with pytest.raises(stability.AdmissibilityError):
            stability.check_longwave_sign_conjecture(rot, np.eye(2))
        a = np.array([[0.0, 1.0], [1.0, 0.0]])
        with pytest.raises(stability.AdmissibilityError):
            stability.check_longwave_sign_conjecture(a, -np.eye(2))


class TestSampler:
    def test_deterministic_per_seed(self):
        a1, c1 = stability.sample_admissible(123, 3)
        a2, c2 = stability.sample_admissible(123, 3)
        np.testing.assert_array_equal(a1, a2)
        np.testing.assert_array_equal(c1, c2)

    def test_gap_and_realness(self):
        for seed in range(20):
            a, _ = stability.sample_admissible(seed, 3)
            eigs = np.sort(np.linalg.eigvals(a).real)
            assert np.diff(eigs).min() > 0.1

    def test_spd_mode_cholesky(self):
        for seed in range(10):
            _, c = stability.sample_admissible(seed, 2, mode="spd_viscosity")
            np.linalg.cholesky(c)  # raises if not SPD

    def test_positive_spectrum_mode(self):
        for seed in range(10):
            _, c = stability.sample_admissible(seed, 3, mode="positive_spectrum_viscosity")
            eigs = np.linalg.eigvals(c)
            assert np.abs(eigs.imag).max() < 1e-8
            assert eigs.real.min() > 0

    def test_quadruple(self):
        a, b, c, d = stability.sample_admissible(7, 2, kind="quadruple")
        assert a.shape == b.shape == c.shape == d.shape == (2, 2)

    def test_batch_feeds_harness_without_rejections(self):
        ks = np.linspace(0.05, 5.0, 60)
        for seed in range(50):
            a, c = stability.sample_admissible(seed, 2, mode="spd_viscosity")
            stability.check_longwave_sign_conjecture(a, c, ks)

    def test_bad_dimension(self):
        with pytest.raises(ValueError):
            stability.sample_admissible(0, 5)
