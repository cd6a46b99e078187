import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fiarma_lab import (
    ArmaModel,
    FracIntegrationSpec,
    HilbertGrid,
    LinearOperator,
    NotNormalError,
    OperatorPolynomial,
    SingularTransferError,
    check_conditions,
    check_duker_conditions,
    existence_integral,
    identity,
    normal_decompose,
    sigma_w,
)

from conftest import make_grid, op, random_unitary


def scalar_grid():
    return HilbertGrid(np.array([0.0]), np.array([1.0]))


def white_model(grid, sigma=None):
    sigma = identity(grid) if sigma is None else sigma
    return ArmaModel(OperatorPolynomial(grid), OperatorPolynomial(grid), sigma)


def ar1_model(grid, a=0.5):
    return ArmaModel(
        OperatorPolynomial.scalar(grid, a), OperatorPolynomial(grid), identity(grid)
    )


def scalar_spec(grid, d):
    return FracIntegrationSpec.scalar(grid, d)


def constant_function_projector(grid):
    """Rank-one covariance onto the constant function of unit weighted norm."""
    coords = np.sqrt(grid.weights).astype(complex)
    return LinearOperator(np.outer(coords, coords.conj()), grid)


class TestSigmaW:
    def test_rank_one_gives_function_modulus(self, rng):
        g = make_grid(5, uniform=False)
        f = rng.normal(size=5) + 1j * rng.normal(size=5)
        f /= np.sqrt(np.sum(np.abs(f) ** 2 * g.weights))
        coords = f * np.sqrt(g.weights)
        sigma = LinearOperator(np.outer(coords, coords.conj()), g)
        dec = normal_decompose(identity(g))
        got = sigma_w(white_model(g, sigma), dec)
        assert np.allclose(got, np.abs(f), atol=1e-12)

    def test_differencing_ma_kills_it(self):
        g = make_grid(3)
        model = ArmaModel(
            OperatorPolynomial(g), OperatorPolynomial.scalar(g, -1.0), identity(g)
        )
        got = sigma_w(model, normal_decompose(identity(g)))
        assert np.allclose(got, 0.0, atol=1e-14)

    def test_null_noise(self):
        g = make_grid(2)
        model = white_model(g, LinearOperator(np.zeros((2, 2)), g))
        got = sigma_w(model, normal_decompose(identity(g)))
        assert np.all(got == 0.0)

    def test_ar_root_at_zero_rejected(self):
        g = scalar_grid()
        # phi(1) = 0 cannot arise from a valid model; build the polynomial directly
        model = white_model(g)
        model.phi = OperatorPolynomial.scalar(g, 1.0)
        with pytest.raises(SingularTransferError, match="frequency 0"):
            sigma_w(model, normal_decompose(identity(g)))


class TestCheckConditions:
    def test_scalar_below_half_holds(self):
        g = scalar_grid()
        for model in (white_model(g), ar1_model(g)):
            report = check_conditions(model, scalar_spec(g, 0.3))
            assert report.verdict == "holds"
            assert report.cond_ii and report.cond_iii and report.cond_iv

    def test_scalar_above_half_fails_on_support(self):
        g = scalar_grid()
        report = check_conditions(white_model(g), scalar_spec(g, 0.6))
        assert not report.cond_ii
        assert report.verdict == "fails"
        assert report.failed_condition() == "ii"

    def test_vacuous_support_with_d_below_one_holds(self):
        g = scalar_grid()
        model = ArmaModel(
            OperatorPolynomial(g), OperatorPolynomial.scalar(g, -1.0), identity(g)
        )
        report = check_conditions(model, scalar_spec(g, 0.75))
        assert report.cond_ii  # vacuously: sigma_w is identically zero
        assert report.cond_iv
        assert report.verdict == "holds"

    def test_gap_case_is_undetermined(self):
        g = make_grid(2)
        # noise supported on the first point only; memory exponent 1.5 off-support
        sigma = LinearOperator(np.diag([1.0, 0.0]), g)
        model = ArmaModel(
            OperatorPolynomial.scalar(g, 0.5), OperatorPolynomial(g), sigma
        )
        spec = FracIntegrationSpec(LinearOperator(np.diag([0.3, 1.5]), g))
        report = check_conditions(model, spec)
        assert report.cond_ii and report.cond_iii
        assert not report.cond_iv and not report.cond_v
        assert report.verdict == "undetermined"

    def test_rejects_non_normal_memory(self):
        g = make_grid(2)
        spec = FracIntegrationSpec(op([[0.2, 1.0], [0.0, 0.2]], g))
        with pytest.raises(NotNormalError):
            check_conditions(white_model(g), spec)

    @settings(max_examples=30, deadline=None)
    @given(
        st.lists(st.floats(-1.0, 1.5), min_size=2, max_size=4),
        st.floats(0.0, 0.8),
    )
    def test_monotone_in_memory_exponent(self, d_vals, bump):
        n = len(d_vals)
        g = make_grid(n)
        model = white_model(g)
        lo = FracIntegrationSpec(LinearOperator(np.diag(d_vals), g))
        hi = FracIntegrationSpec(LinearOperator(np.diag(np.array(d_vals) + bump), g))
        v_lo = check_conditions(model, lo).verdict
        v_hi = check_conditions(model, hi).verdict
        assert not (v_lo == "fails" and v_hi == "holds")


class TestExistenceIntegral:
    def test_constant_case_value(self):
        g = make_grid(1)
        report = existence_integral(white_model(g), scalar_spec(g, 0.0), eta=1.0)
        assert not report.diverges
        assert report.value == pytest.approx(1.0 / np.pi, rel=1e-6)

    def test_shell_scaling_matches_exponent(self):
        g = scalar_grid()
        report = existence_integral(white_model(g), scalar_spec(g, 0.3), eta=1.0)
        ratios = report.shells[1:] / report.shells[:-1]
        assert ratios[-1] == pytest.approx(2.0 ** (2 * 0.3 - 1), rel=1e-3)
        assert not report.diverges

    def test_log_divergence_flagged(self):
        g = scalar_grid()
        report = existence_integral(white_model(g), scalar_spec(g, 0.5), eta=1.0)
        assert report.diverges

    def test_finite_value_matches_analytic_oracle(self):
        # white noise, exponent d: integral of |lam|^{-2d} d lam/(2 pi) over (-eta, eta)
        g = scalar_grid()
        d, eta = 0.3, 1.0
        report = existence_integral(white_model(g), scalar_spec(g, d), eta=eta, n_freq=256)
        oracle = 2 * eta ** (1 - 2 * d) / (1 - 2 * d) / (2 * np.pi)
        assert report.value == pytest.approx(oracle, rel=1e-4)

    def test_eta_range_checked(self):
        g = scalar_grid()
        with pytest.raises(ValueError):
            existence_integral(white_model(g), scalar_spec(g, 0.3), eta=4.0)


class TestDukerConditions:
    def test_constant_above_half_passes(self):
        g = make_grid(3)
        report = check_duker_conditions(op(0.7 * np.eye(3), g), identity(g))
        assert report.condition_exponent and report.passes
        assert not report.grid_sensitive

    def test_boundary_fails(self):
        g = make_grid(3)
        report = check_duker_conditions(op(0.5 * np.eye(3), g), identity(g))
        assert not report.condition_exponent and not report.passes

    @pytest.mark.parametrize("n", [32, 128, 512])
    def test_harmonic_divergence_flagged_as_grid_sensitive(self, n):
        g = HilbertGrid.uniform(n)
        exponents = 0.5 + g.points  # h(v) = 0.5 + v on (0, 1]
        n_op = LinearOperator(np.diag(exponents), g)
        sigma = constant_function_projector(g)
        report = check_duker_conditions(n_op, sigma, boundary_margin=0.05)
        # harmonic-sum oracle: sum w / (2 v) = H_n / 2
        oracle = np.sum(1.0 / (2 * np.arange(1, n + 1)))
        assert report.integral_value == pytest.approx(oracle, rel=1e-10)
        assert report.grid_sensitive
        assert report.passes  # finite on any fixed grid; the flag carries the warning

    def test_bridge_to_fractional_conditions(self, rng):
        # exponents of the power-law weights above 1/2 make the shifted
        # fractional model admissible: d = 1 - n maps across the boundary
        for trial in range(10):
            n = int(rng.integers(1, 5))
            g = make_grid(n)
            u = random_unitary(rng, n)
            h_vals = rng.uniform(0.55, 1.4, n) + 1j * rng.uniform(-0.2, 0.2, n)
            n_mat = u.conj().T @ (h_vals[:, None] * u)
            m = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
            sigma = LinearOperator(m @ m.conj().T / n, g)
            duker = check_duker_conditions(LinearOperator(n_mat, g), sigma)
            assert duker.passes
            spec = FracIntegrationSpec(
                LinearOperator(np.eye(n, dtype=complex) - n_mat, g)
            )
            report = check_conditions(white_model(g, sigma), spec)
            assert report.verdict == "holds"
