import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cheblcu.amplify import (
    REPETITION_CONSTANT,
    amplified_probability,
    amplify,
    amplify_explicit,
    grover_angle,
    grover_iterate,
    optimal_rounds,
    reflections,
    state_preparation,
)
from cheblcu.errors import DomainError
from cheblcu.functions import builtin
from cheblcu.instances import random_sparse_hermitian, random_state
from cheblcu.lcu import build_lcu_circuit, run_lcu_operator
from cheblcu.suites import synthetic_amplification_instance


class TestClosedForm:
    def test_quarter(self):
        assert grover_angle(0.25) == pytest.approx(math.pi / 6)
        run = amplify(0.25)
        assert run.rounds == 1
        assert run.amplified_probability == pytest.approx(1.0, abs=1e-15)

    def test_certain_success(self):
        run = amplify(1.0)
        assert run.rounds == 0
        assert run.amplified_probability == 1.0

    def test_zero_probability(self):
        with pytest.raises(DomainError):
            amplify(0.0)
        with pytest.raises(DomainError):
            grover_angle(1.5)

    def test_explicit_round_override(self):
        assert amplify(0.25, rounds=0).amplified_probability == pytest.approx(0.25)
        with pytest.raises(DomainError):
            amplify(0.25, rounds=-1)

    @given(st.floats(1e-6, 1.0))
    def test_floor_rule_does_not_overshoot(self, p):
        r = optimal_rounds(p)
        theta = grover_angle(p)
        assert (2 * r + 1) * theta <= math.pi / 2 + 1e-8
        assert (2 * r + 3) * theta > math.pi / 2 - 1e-8
        run = amplify(p)
        assert run.within_repetition_bound
        assert run.repetitions <= REPETITION_CONSTANT / math.sqrt(p) + 1e-9

    def test_inverse_sqrt_scaling(self):
        for p in (0.5, 0.05, 0.005):
            run = amplify(p)
            assert abs(run.repetitions - math.pi / (2 * grover_angle(p))) < 2


class TestReflections:
    def test_involutions(self, rng):
        W, P = synthetic_amplification_instance(rng, 0.3, n=3)
        R_t, R_i = reflections(W, P, 2)
        eye = np.eye(6)
        for R in (R_t, R_i):
            np.testing.assert_allclose(R @ R, eye, atol=1e-10)
            np.testing.assert_allclose(R.conj().T @ R, eye, atol=1e-10)

    def test_flag_reflection_fixes_bad_subspace(self, rng):
        W, P = synthetic_amplification_instance(rng, 0.3)
        R_t, _ = reflections(W, P, 2)
        bad = np.concatenate([np.zeros(2), rng.normal(size=2)])
        np.testing.assert_allclose(R_t @ bad, bad)
        good = np.concatenate([rng.normal(size=2), np.zeros(2)])
        np.testing.assert_allclose(R_t @ good, -good)

    def test_dimension_mismatch(self, rng):
        W, P = synthetic_amplification_instance(rng, 0.3)
        with pytest.raises(DomainError):
            reflections(W, P, 3)
        with pytest.raises(DomainError):
            reflections(W[:3], P, 2)

    def test_two_dimensional_closure(self, rng):
        W, P = synthetic_amplification_instance(rng, 0.2, n=3)
        start = np.zeros(6, dtype=complex)
        start[:3] = P[:, 0]
        psi_i = W @ start
        good = np.where(np.arange(6) < 3, psi_i, 0)
        basis = np.linalg.qr(np.stack([psi_i, good], axis=1))[0]
        G = grover_iterate(W, P, 2)
        GB = G @ basis
        assert np.linalg.norm(GB - basis @ (basis.conj().T @ GB)) <= 1e-10


class TestExplicit:
    @pytest.mark.parametrize("p", [0.5, 0.25, 0.05, 0.01])
    def test_matches_closed_form(self, rng, p):
        W, P = synthetic_amplification_instance(rng, p, n=2)
        run = amplify_explicit(W, P, 2)
        assert run.initial_probability == pytest.approx(p, abs=1e-12)
        assert run.amplified_probability == pytest.approx(amplified_probability(p, run.rounds), abs=1e-10)
        np.testing.assert_allclose(run.amplified_state, run.initial_state, atol=1e-9)

    def test_every_round_count(self, rng):
        W, P = synthetic_amplification_instance(rng, 0.05)
        for r in range(6):
            run = amplify_explicit(W, P, 2, rounds=r)
            assert run.amplified_probability == pytest.approx(run.predicted_probability, abs=1e-10)

    def test_on_lcu_circuit(self, rng):
        A = random_sparse_hermitian(rng, 2, 1)
        psi = random_state(rng, 2)
        plan = builtin("exp").plan(0.3, 1.0, 1)
        circuit = build_lcu_circuit(A, plan, rng)
        run = amplify_explicit(circuit.matrix(), state_preparation(psi, rng), circuit.ancilla_dim)
        ref = run_lcu_operator(A, plan, psi)
        assert run.initial_probability == pytest.approx(ref.success_probability, abs=1e-12)
        assert run.amplified_probability == pytest.approx(run.predicted_probability, abs=1e-10)
        assert run.amplified_probability > ref.success_probability
        np.testing.assert_allclose(run.amplified_state, ref.state, atol=1e-9)

    def test_no_overlap(self):
        W = np.kron(np.array([[0.0, 1.0], [1.0, 0.0]]), np.eye(2))
        with pytest.raises(DomainError):
            amplify_explicit(W, np.eye(2), 2)

    def test_state_preparation(self, rng):
        psi = np.array([0.6, 0.8j])
        P = state_preparation(psi, rng)
        np.testing.assert_allclose(P[:, 0], psi)
        np.testing.assert_allclose(P.conj().T @ P, np.eye(2), atol=1e-12)
