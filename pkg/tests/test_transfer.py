import numpy as np
import pytest
import scipy.special

from fiarma_lab import (
    CoefficientSequence,
    FracIntegrationSpec,
    HilbertGrid,
    LinearOperator,
    NotNormalError,
    OperatorPolynomial,
    SingularTransferError,
    ar_inverse_laurent,
    arma_transfer,
    check_invertible_on_circle,
    duker_decomposition,
    envelope_bounds,
    eval_poly_ar,
    eval_poly_ma,
    frac_ma_coeffs,
    frac_transfer,
    operator_norm,
    operator_power_one_minus_z,
    power_law_weights,
)

from conftest import make_grid, op, random_unitary


def scalar_frac_coeffs(d: float, order: int) -> np.ndarray:
    """Log-gamma oracle for the expansion coefficients of (1-z)^(-d)."""
    k = np.arange(order + 1, dtype=float)
    with np.errstate(divide="ignore"):
        logs = scipy.special.gammaln(k + d) - scipy.special.gammaln(k + 1)
    out = np.exp(logs) / scipy.special.gamma(d)
    out[0] = 1.0
    return out


class TestPolyEvaluation:
    def test_degree_zero_is_identity(self):
        p = OperatorPolynomial(make_grid(2))
        for z in (0.0, 1.0, -1j, 0.3 + 0.7j):
            assert np.array_equal(eval_poly_ar(p, z).entries, np.eye(2))
            assert np.array_equal(eval_poly_ma(p, z).entries, np.eye(2))

    def test_ar_sign(self):
        g = make_grid(2)
        p = OperatorPolynomial.scalar(g, 0.5)
        assert np.allclose(eval_poly_ar(p, 1.0).entries, 0.5 * np.eye(2))

    def test_ar_direct_matrix(self):
        g = make_grid(2)
        a1 = np.array([[0.2, 0.1], [0.0, 0.3]], dtype=complex)
        p = OperatorPolynomial(g, (LinearOperator(a1, g),))
        out = eval_poly_ar(p, 1j)
        assert np.allclose(out.entries, np.eye(2) - 1j * a1)

    def test_ma_differencing_vanishes_at_one(self):
        g = make_grid(3)
        theta = OperatorPolynomial.scalar(g, -1.0)
        assert operator_norm(eval_poly_ma(theta, 1.0).entries) == 0.0

    def test_ma_sign(self):
        g = make_grid(2)
        theta = OperatorPolynomial.scalar(g, 0.5)
        assert np.allclose(eval_poly_ma(theta, -1.0).entries, 0.5 * np.eye(2))


class TestCircleInvertibility:
    def test_stable_scalar_margin(self):
        phi = OperatorPolynomial.scalar(make_grid(1), 0.5)
        ok, margin = check_invertible_on_circle(phi, 4096)
        assert ok
        # oracle: |1 - 0.5 e^{-i lam}| is minimized at lam = 0
        assert margin == pytest.approx(0.5, abs=1e-12)

    def test_unit_root_detected(self):
        phi = OperatorPolynomial.scalar(make_grid(1), 1.0)
        ok, margin = check_invertible_on_circle(phi, 4096)
        assert not ok
        assert margin < 1e-10

    def test_degree_zero(self):
        ok, margin = check_invertible_on_circle(OperatorPolynomial(make_grid(2)), 64)
        assert ok and margin == pytest.approx(1.0)


class TestArmaTransfer:
    def test_identity_model(self):
        g = make_grid(2)
        eye_poly = OperatorPolynomial(g)
        out = arma_transfer(eye_poly, eye_poly, 0.7)
        assert np.allclose(out.entries, np.eye(2))

    def test_scalar_ar1_at_zero(self):
        g = make_grid(1)
        out = arma_transfer(OperatorPolynomial.scalar(g, 0.5), OperatorPolynomial(g), 0.0)
        assert out.entries[0, 0] == pytest.approx(2.0)

    def test_scalar_ar1_at_pi(self):
        g = make_grid(1)
        out = arma_transfer(OperatorPolynomial.scalar(g, 0.9), OperatorPolynomial(g), np.pi)
        assert out.entries[0, 0] == pytest.approx(1.0 / (1.0 - 0.9 * np.exp(-1j * np.pi)))
        assert out.entries[0, 0].real == pytest.approx(1.0 / 1.9)

    def test_singular_frequency_reported(self):
        g = make_grid(1)
        phi = OperatorPolynomial.scalar(g, 1.0)
        with pytest.raises(SingularTransferError) as err:
            arma_transfer(phi, OperatorPolynomial(g), 0.0)
        assert err.value.lam == pytest.approx(0.0)


class TestFracTransfer:
    def test_zero_frequency_is_zero_operator(self):
        spec = FracIntegrationSpec.scalar(make_grid(2), 0.4)
        for lam in (0.0, 2 * np.pi, -2 * np.pi):
            assert operator_norm(frac_transfer(spec, lam).entries) == 0.0

    def test_zero_exponent(self):
        spec = FracIntegrationSpec.scalar(make_grid(2), 0.0)
        assert np.allclose(frac_transfer(spec, 1.0).entries, np.eye(2), atol=1e-14)

    def test_scalar_at_pi(self):
        spec = FracIntegrationSpec.scalar(make_grid(1), 0.5)
        out = frac_transfer(spec, np.pi)
        assert out.entries[0, 0] == pytest.approx(2.0**-0.5)


class TestFracCoeffs:
    def test_zero_exponent(self):
        seq = frac_ma_coeffs(FracIntegrationSpec.scalar(make_grid(2), 0.0), 4)
        assert np.allclose(seq[0], np.eye(2))
        for k in range(1, 5):
            assert operator_norm(seq[k]) == 0.0

    def test_geometric_series(self):
        seq = frac_ma_coeffs(FracIntegrationSpec.scalar(make_grid(2), 1.0), 6)
        for k in range(7):
            assert np.allclose(seq[k], np.eye(2), atol=1e-14)

    def test_small_orders(self):
        seq = frac_ma_coeffs(FracIntegrationSpec.scalar(make_grid(1), 0.3), 2)
        assert seq[1][0, 0].real == pytest.approx(0.3)
        assert seq[2][0, 0].real == pytest.approx(0.195)

    @pytest.mark.parametrize("d", [-0.4, 0.3, 0.45])
    def test_scalar_reduction_gamma_oracle(self, d):
        order = 1000
        seq = frac_ma_coeffs(FracIntegrationSpec.scalar(make_grid(1), d), order)
        got = np.array([seq[k][0, 0].real for k in range(order + 1)])
        want = scalar_frac_coeffs(d, order)
        assert np.max(np.abs(got - want) / np.abs(want)) < 1e-10

    def test_normal_conjugation(self, rng):
        n = 3
        u = random_unitary(rng, n)
        d = np.array([0.1, -0.3 + 0.2j, 0.45])
        mat = u.conj().T @ (d[:, None] * u)
        seq = frac_ma_coeffs(FracIntegrationSpec(op(mat)), 40)
        for k in (1, 7, 40):
            scalars = scalar_frac_coeffs_complex(d, k)
            expected = u.conj().T @ (scalars[:, None] * u)
            assert operator_norm(seq[k] - expected) < 1e-10

    def test_partial_sums_approach_transfer(self, rng):
        g = make_grid(3)
        m = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        m *= 0.9 / operator_norm(m)
        d_op = LinearOperator(m, g)
        z = 0.5
        target = operator_power_one_minus_z(d_op, z).entries
        seq = frac_ma_coeffs(FracIntegrationSpec(LinearOperator(-m, g)), 200)
        partial = sum(seq[k] * z**k for k in range(201))
        assert operator_norm(partial - target) < 1e-8


def scalar_frac_coeffs_complex(d: np.ndarray, k: int) -> np.ndarray:
    """Coefficient k of (1-z)^(-d) per complex exponent, by direct recursion."""
    out = np.ones_like(d, dtype=complex)
    for j in range(1, k + 1):
        out *= (d + j - 1) / j
    return out


class TestArInverseLaurent:
    def test_causal_geometric(self):
        g = make_grid(1)
        phi = OperatorPolynomial.scalar(g, 0.5)
        seq = ar_inverse_laurent(phi, 50, 4096)
        for k in range(51):
            assert abs(seq[k][0, 0] - 0.5**k) < 1e-9
        for k in range(1, 51):
            assert abs(seq[-k][0, 0]) < 1e-9
        assert seq.tail_mass < 1e-8

    def test_degree_zero(self):
        seq = ar_inverse_laurent(OperatorPolynomial(make_grid(2)), 8, 64)
        assert np.allclose(seq[0], np.eye(2), atol=1e-12)
        for k in range(1, 9):
            assert operator_norm(seq[k]) < 1e-12
            assert operator_norm(seq[-k]) < 1e-12

    def test_anticausal_expansion_at_infinity(self):
        # 1/(1 - 2z) = -sum_{m>=1} 2^{-m} z^{-m}: support on k <= 0, P_0 = 0
        g = make_grid(1)
        phi = OperatorPolynomial.scalar(g, 2.0)
        seq = ar_inverse_laurent(phi, 30, 4096)
        assert abs(seq[0][0, 0]) < 1e-9
        for m in range(1, 20):
            assert abs(seq[-m][0, 0] + 2.0**-m) < 1e-9
            assert abs(seq[m][0, 0]) < 1e-9

    def test_recursion_property(self, rng):
        g = make_grid(3)
        a1 = rng.normal(size=(3, 3)) * 0.15
        a2 = rng.normal(size=(3, 3)) * 0.1
        phi = OperatorPolynomial(g, (op(a1, g), op(a2, g)))
        seq = ar_inverse_laurent(phi, 40, 1024)
        for k in range(1, 41):
            expected = a1 @ seq[k - 1] + a2 @ seq[k - 2]
            assert operator_norm(seq[k] - expected) < 1e-8

    def test_rejects_bad_sizes(self):
        phi = OperatorPolynomial.scalar(make_grid(1), 0.5)
        with pytest.raises(ValueError):
            ar_inverse_laurent(phi, 100, 128)
        with pytest.raises(ValueError):
            ar_inverse_laurent(phi, 4, 100)  # not a power of two

    def test_rejects_unit_root(self):
        phi = OperatorPolynomial.scalar(make_grid(1), 1.0)
        with pytest.raises(SingularTransferError):
            ar_inverse_laurent(phi, 4, 64)


class TestDukerDecomposition:
    def test_identity_exponent_degenerates(self):
        g = make_grid(2)
        c_mat, deltas, rho = duker_decomposition(op(np.eye(2), g), 20)
        assert rho == pytest.approx(1.0)
        assert operator_norm(c_mat.entries) < 1e-12
        assert np.allclose(deltas[0], np.eye(2), atol=1e-8)
        for k in range(1, 21):
            assert operator_norm(deltas[k]) < 1e-8

    def test_scalar_constant_matches_gamma_oracle(self):
        for n_val in (0.3, 0.7, 1.4, 0.6 + 0.2j):
            g = make_grid(1)
            c_mat, _, _ = duker_decomposition(op(np.array([[n_val]]), g), 2)
            oracle = 1.0 / scipy.special.gamma(1.0 - n_val)
            assert abs(c_mat.entries[0, 0] - oracle) < 1e-12 * max(1.0, abs(oracle))

    def test_remainder_decay_bounded(self):
        g = make_grid(1)
        _, deltas, rho = duker_decomposition(op(0.7 * np.eye(1), g), 10_000)
        assert rho == pytest.approx(0.7)
        norms = deltas.norms()
        ks = np.arange(100, 10_001)
        scaled = norms[100:] * ks**1.7
        assert np.max(scaled) < 10 * scaled[0]

    def test_remainder_negligible_against_binomials(self):
        n_val = 0.4
        g = make_grid(1)
        c_mat, deltas, _ = duker_decomposition(op(n_val * np.eye(1), g), 5000)
        # the binomial coefficients behave like k^{-n}/gamma(1-n); remainder is o(that)
        b_k = np.exp(
            scipy.special.gammaln(np.arange(1, 5001) + 1 - n_val)
            - scipy.special.gammaln(1 - n_val)
            - scipy.special.gammaln(np.arange(1, 5001) + 1.0)
        )
        ratio = deltas.norms()[1:] / b_k
        assert ratio[-1] < 1e-3
        assert ratio[-1] < ratio[100] < ratio[10]

    def test_reconstruction_binomial_oracle(self):
        n_val = 0.65
        g = make_grid(1)
        c_mat, deltas, _ = duker_decomposition(op(n_val * np.eye(1), g), 500)
        ks = np.arange(1, 501, dtype=float)
        oracle = np.exp(
            scipy.special.gammaln(ks + 1 - n_val)
            - scipy.special.gammaln(1 - n_val)
            - scipy.special.gammaln(ks + 1.0)
        )
        recon = np.array(
            [c_mat.entries[0, 0] * (k + 1.0) ** -n_val + deltas[int(k)][0, 0] for k in ks]
        )
        assert np.max(np.abs(recon.real - oracle)) < 1e-8

    def test_partial_sums_cauchy(self):
        g = make_grid(2)
        u = random_unitary(np.random.default_rng(3), 2)
        mat = u.conj().T @ (np.array([0.6, 0.8])[:, None] * u)
        _, deltas, rho = duker_decomposition(op(mat, g), 4000)
        sums = np.cumsum(deltas.norms())
        tail_1 = sums[-1] - sums[1999]
        tail_2 = sums[1999] - sums[999]
        # geometric-ish decay of dyadic tail blocks, consistent with k^{-1-rho}
        assert tail_1 < tail_2 < 0.05 * sums[-1]

    def test_rejects_non_normal(self):
        with pytest.raises(NotNormalError):
            duker_decomposition(op([[0.5, 1.0], [0.0, 0.5]]), 4)


class TestPowerLawWeights:
    def test_harmonic_scalar(self):
        g = make_grid(1)
        seq = power_law_weights(op(np.eye(1), g), 16)
        for k in range(17):
            assert seq[k][0, 0].real == pytest.approx(1.0 / (k + 1))


class TestEnvelopeBounds:
    def test_zero_exponent(self):
        lo, hi = envelope_bounds(0.0, 1.3)
        assert lo == pytest.approx(1.0)
        assert hi == pytest.approx(1.0)
        assert abs((1 - np.exp(-1.3j)) ** 0) ** 2 == pytest.approx(1.0)

    def test_equality_case(self):
        lo, hi = envelope_bounds(1.0, np.pi)
        mid = abs((1 - np.exp(-1j * np.pi)) ** 1.0) ** 2
        assert lo == pytest.approx(4.0)
        assert mid == pytest.approx(4.0)
        assert lo <= mid <= hi

    def test_complex_sample(self):
        z = 0.5 + 0.5j
        lam = 0.1
        lo, hi = envelope_bounds(z, lam)
        mid = abs((1 - np.exp(-1j * lam)) ** z) ** 2
        assert lo <= mid <= hi

    def test_rejects_zero_frequency(self):
        with pytest.raises(ValueError):
            envelope_bounds(1.0, 0.0)

    def test_random_box(self, rng):
        zs = rng.uniform(-2, 2, size=(2000, 2))
        lams = rng.uniform(-np.pi, np.pi, size=2000)
        lams[lams == 0.0] = 0.1
        for (re, im), lam in zip(zs, lams):
            z = complex(re, im)
            lo, hi = envelope_bounds(z, lam)
            mid = abs((1 - np.exp(-1j * lam)) ** z) ** 2
            assert lo <= mid * (1 + 1e-12) and mid <= hi * (1 + 1e-12)


class TestCoefficientSequence:
    def test_index_bounds(self):
        seq = frac_ma_coeffs(FracIntegrationSpec.scalar(make_grid(1), 0.3), 3)
        with pytest.raises(IndexError):
            seq[4]
        with pytest.raises(IndexError):
            seq[-1]
        assert seq.k_max == 3
        assert len(seq) == 4
        assert isinstance(seq.operator(2), LinearOperator)
