import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cheblcu.chebyshev import monomial_cheb_coeffs, truncation_order
from cheblcu.errors import CapabilityError, DegenerateOutcomeError, DomainError
from cheblcu.functions import (
    FunctionSpec,
    builtin,
    exp_repeated,
    homogeneous_rescale,
    parse_function,
    polynomial_spec,
)
from cheblcu.hermitian import SparseHermitian, exact_matrix_function
from cheblcu.lcu import run_lcu_operator

X = np.linspace(-1.0, 1.0, 1001)


class TestCatalog:
    def test_exp_coefficients(self):
        t = builtin("exp").taylor(1e-6)
        assert t.order == 22
        assert t.derivative_bound == pytest.approx(math.e)
        assert t.coefficients[:5] == (1.0, 1.0, 0.5, 1 / 6, 1 / 24)

    def test_exp_neg_alternates(self):
        t = builtin("exp_neg").taylor(1e-3)
        assert t.coefficients[:4] == (1.0, -1.0, 0.5, -1 / 6)

    @pytest.mark.parametrize("name", ["exp", "exp_neg"])
    @pytest.mark.parametrize("eps", [1e-3, 1e-6, 1e-9])
    def test_truncated_series_meets_eps(self, name, eps):
        spec = builtin(name)
        assert np.max(np.abs(spec.taylor(eps)(X) - spec.evaluate(X))) <= eps

    def test_larger_norm_bound_adds_terms(self):
        spec = builtin("exp")
        t = spec.taylor(1e-6, norm_bound=2.0)
        assert t.order > truncation_order(math.exp(2.0), 1e-6) - 1
        x = np.linspace(-2, 2, 1001)
        assert np.max(np.abs(t(x) - np.exp(x))) <= 1e-6

    def test_monomial_plan(self):
        plan = builtin("monomial", 3).plan(None, 1.0, 2)
        np.testing.assert_allclose(plan.coefficients, 8 * monomial_cheb_coeffs(3))
        assert plan.exact

    def test_identity_plan(self):
        np.testing.assert_allclose(builtin("identity").plan(None, 1.0, 3).coefficients, [0.0, 3.0])

    def test_polynomial_degree_is_highest_chebyshev_degree(self):
        plan = builtin("polynomial", 0.5, 0.0, -1.0, 0.0).plan(None, 1.0, 2)
        assert plan.series.degree == 2
        assert plan.n_terms == 3

    @settings(max_examples=40)
    @given(st.lists(st.floats(-2, 2).filter(lambda c: abs(c) > 1e-3), min_size=1, max_size=8), st.integers(1, 3))
    def test_polynomial_plan_reproduces_polynomial(self, coeffs, d):
        spec = polynomial_spec(coeffs)
        plan = spec.plan(None, 1.0, d)
        assert plan.series.degree == len(coeffs) - 1
        np.testing.assert_allclose(plan.approximant(X), spec.evaluate(X), atol=1e-10 * plan.weight)

    def test_derivative_bound_is_valid_for_polynomials(self):
        spec = polynomial_spec([0.5, -2.0, 0.0, 1.5])
        C = spec.derivative_bound(1.0)
        p = np.polynomial.Polynomial([0.5, -2.0, 0.0, 1.5])
        for m in range(4):
            assert np.max(np.abs(p.deriv(m)(X))) <= C

    def test_unknown_and_bad_params(self):
        with pytest.raises(DomainError, match="unknown"):
            builtin("sine")
        with pytest.raises(DomainError):
            builtin("exp", 2)
        with pytest.raises(DomainError):
            builtin("monomial")
        with pytest.raises(DomainError):
            builtin("monomial", -1)
        with pytest.raises(DomainError):
            builtin("polynomial")
        with pytest.raises(DomainError):
            polynomial_spec([0.0, 0.0])

    def test_eps_required_for_series(self):
        with pytest.raises(DomainError):
            builtin("exp").taylor(None)

    def test_no_series(self):
        inverse = FunctionSpec("inverse", None, evaluate=lambda x: 1 / x, homogeneity=-1)
        with pytest.raises(CapabilityError):
            inverse.taylor(1e-3)


class TestParse:
    @pytest.mark.parametrize(
        "text, name, degree",
        [
            ("exp", "exp", None),
            (" exp_neg ", "exp_neg", None),
            ("identity", "identity", 1),
            ("monomial:3", "monomial:3", 3),
            ("monomial(5)", "monomial:5", 5),
            ("polynomial:0.5,0,1", "polynomial:0.5,0.0,1.0", 2),
            ("polynomial(1,2)", "polynomial:1.0,2.0", 1),
        ],
    )
    def test_valid(self, text, name, degree):
        spec = parse_function(text)
        assert spec.name == name
        assert spec.degree == degree

    @pytest.mark.parametrize("text", ["", "monomial:x", "polynomial:1,,2", "Exp", "monomial:1.5"])
    def test_invalid(self, text):
        with pytest.raises(DomainError):
            parse_function(text)


class TestHomogeneous:
    @pytest.mark.parametrize("k, d, g", [(3, 2, 8.0), (-1, 4, 0.25), (0, 7, 1.0)])
    def test_examples(self, k, d, g):
        assert homogeneous_rescale(k, d) == g

    def test_from_spec(self):
        assert homogeneous_rescale(builtin("monomial", 3), 2) == 8.0
        assert homogeneous_rescale(builtin("identity"), 5) == 5.0

    def test_not_homogeneous(self):
        with pytest.raises(DomainError, match="not homogeneous"):
            homogeneous_rescale(builtin("exp"), 2)
        with pytest.raises(DomainError):
            homogeneous_rescale(builtin("polynomial", 1.0, 1.0), 2)

    def test_inverse_identity_on_matrix(self, rng):
        lam = rng.uniform(0.3, 0.9, size=4) * rng.choice([-1, 1], size=4)
        A = SparseHermitian.from_dense(np.diag(lam))
        inverse = FunctionSpec("inverse", None, evaluate=lambda x: 1 / x, homogeneity=-1)
        d = 4
        lhs = homogeneous_rescale(inverse, d) * exact_matrix_function(A.scaled(1 / d), inverse.evaluate)
        np.testing.assert_allclose(lhs, exact_matrix_function(A, inverse.evaluate), rtol=1e-14)

    def test_scaled_lcu_output(self, instance):
        A, psi = instance(4, 2)
        spec = builtin("monomial", 3)
        d = 2
        small = A.scaled(1 / d)
        out = run_lcu_operator(small, spec.plan(None, 1.0, 2), psi)
        magnitude = homogeneous_rescale(spec, d) * np.linalg.norm(out.unnormalized)
        ref = exact_matrix_function(A, spec.evaluate) @ psi
        assert magnitude == pytest.approx(np.linalg.norm(ref), rel=1e-12)
        np.testing.assert_allclose(out.state, ref / np.linalg.norm(ref), atol=1e-10)


class TestExpRepeated:
    def test_single_stage_matches_direct_run(self):
        A = SparseHermitian.from_dense(np.diag([0.4, -0.7, 0.1]))
        psi = np.array([0.6, 0.0, 0.8], dtype=complex)
        res = exp_repeated(A, 1, psi, 1e-6)
        direct = run_lcu_operator(A, builtin("exp").plan(1e-6, 1.0, 1), psi)
        np.testing.assert_allclose(res.state, direct.state, atol=1e-15)
        assert res.cumulative_probability == pytest.approx(direct.success_probability, rel=1e-14)
        assert res.stage_count == 1

    def test_diagonal_two_stages(self):
        A = SparseHermitian.from_dense(np.diag([0.5, -0.5]), sparsity=2)
        psi = np.array([1.0, 1.0], dtype=complex) / math.sqrt(2)
        res = exp_repeated(A, 2, psi, 2e-8)
        expected = np.exp([0.5, -0.5]) * psi
        np.testing.assert_allclose(res.state, expected / np.linalg.norm(expected), atol=1e-12)
        assert res.fidelity >= 1 - 1e-6

    @pytest.mark.parametrize("d", [2, 3])
    def test_probability_product_and_weights(self, instance, d):
        A, psi = instance(4, d)
        res = exp_repeated(A, d, psi, d * 1e-8)
        assert res.cumulative_probability == pytest.approx(np.prod(res.stage_probabilities), abs=1e-12)
        assert len(res.stage_probabilities) == d
        assert res.cumulative_probability < min(res.stage_probabilities)
        assert res.single_shot_weight == pytest.approx(math.exp(d), rel=1e-3)
        assert res.stage_weight == pytest.approx(math.e, rel=1e-6)
        assert res.weight_ratio == pytest.approx(1.0, rel=1e-6)
        assert res.fidelity >= 1 - 1e-6

    def test_single_shot_weight_partial_sum(self, instance):
        A, psi = instance(4, 3)
        res = exp_repeated(A, 3, psi, 1e-6)
        L = truncation_order(math.e, 1e-6)
        assert res.single_shot_weight == pytest.approx(sum(3**i / math.factorial(i) for i in range(L)), rel=1e-12)

    def test_validation(self, instance):
        A, psi = instance(4, 2)
        with pytest.raises(DomainError):
            exp_repeated(A, 0, psi, 1e-6)
        with pytest.raises(DomainError):
            exp_repeated(A.scaled(1.2 / A.norm), 2, psi, 1e-6)

    def test_degenerate_stage_reports_index(self, monkeypatch, instance):
        A, psi = instance(4, 2)
        import cheblcu.functions as functions

        calls = {"n": 0}
        real = functions.run_lcu_operator

        def flaky(*args, **kwargs):
            calls["n"] += 1
            if calls["n"] == 2:
                raise DegenerateOutcomeError("vanished", norm=0.0)
            return real(*args, **kwargs)

        monkeypatch.setattr(functions, "run_lcu_operator", flaky)
        with pytest.raises(DegenerateOutcomeError) as err:
            exp_repeated(A, 2, psi, 1e-6)
        assert err.value.stage == 1
