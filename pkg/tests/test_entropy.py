"""Environment spectrum, entropies and the heat inversion."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lambda_adapt.dynamics import field_amplitudes, integrate_psi
from lambda_adapt.entropy import (EnvSpectrum, classical_entropy,
                                  entropy_curve, env_eigenvalues, heat_to_pab,
                                  overlap_asymptotic, overlap_finite_time,
                                  quantum_branch_entropy, von_neumann)
from lambda_adapt.errors import ParameterError
from lambda_adapt.model import (Gaussian, InitialMixture, LambdaSystem,
                                SimGrid, make_pulse)


def dense_eigenvalues(mixture, psi_sq, n_a, n_b, overlap_sq):
    """Same spectrum from an explicit matrix, basis {vac, 1_b, free, perp}.

    Tracing the system out of the a-started branch leaves the mixture
    psi_sq |vac><vac| + n_b |1_b><1_b| + n_a |u><u| with the scattered
    photon u = o |free> + sqrt(1 - o^2) |perp>; the b-started branch
    contributes the free pulse itself.
    """
    o = math.sqrt(overlap_sq)
    u = np.array([0.0, 0.0, o, math.sqrt(max(1.0 - o * o, 0.0))])
    vac = np.array([1.0, 0.0, 0.0, 0.0])
    one_b = np.array([0.0, 1.0, 0.0, 0.0])
    free = np.array([0.0, 0.0, 1.0, 0.0])
    rho = mixture.p_a0 * (psi_sq * np.outer(vac, vac)
                          + n_b * np.outer(one_b, one_b)
                          + n_a * np.outer(u, u)) \
        + mixture.p_b0 * np.outer(free, free)
    return np.sort(np.linalg.eigvalsh(rho))[::-1]


class TestEigenvalues:
    @pytest.mark.parametrize("args", [
        (0.5, 0.0, 0.7, 0.3, 0.4),
        (0.25, 0.1, 0.5, 0.4, 0.9),
        (1.0, 0.0, 0.2, 0.8, 0.0),
        (0.0, 0.05, 0.55, 0.4, 1.0),
    ])
    def test_matches_dense_diagonalization(self, args):
        p_a0, psi_sq, n_a, n_b, overlap_sq = args
        mix = InitialMixture(p_a0, 1.0 - p_a0)
        lams = env_eigenvalues(mix, psi_sq, n_a, n_b, overlap_sq)
        want = dense_eigenvalues(mix, psi_sq, n_a, n_b, overlap_sq)
        assert np.max(np.abs(lams - want)) < 1e-12
        assert lams.sum() == pytest.approx(1.0, abs=1e-12)
        assert np.all(np.diff(lams) <= 0.0)

    def test_rejects_bad_weights(self):
        mix = InitialMixture(0.5, 0.5)
        with pytest.raises(ParameterError):
            env_eigenvalues(mix, 0.5, 0.5, 0.5, 0.0)
        with pytest.raises(ParameterError):
            env_eigenvalues(mix, -0.1, 0.6, 0.5, 0.0)
        with pytest.raises(ParameterError):
            env_eigenvalues(mix, 0.0, 0.5, 0.5, 1.5)


class TestVonNeumann:
    def test_basic_values(self):
        assert von_neumann([1.0, 0.0, 0.0]) == 0.0
        assert von_neumann([0.5, 0.5]) == pytest.approx(math.log(2.0))
        assert von_neumann(np.full(4, 0.25)) == pytest.approx(math.log(4.0))

    def test_zero_times_log_zero(self):
        assert von_neumann([0.3, 0.7, 0.0, 0.0]) == \
            pytest.approx(-(0.3 * math.log(0.3) + 0.7 * math.log(0.7)))

    def test_rejects_invalid_spectra(self):
        with pytest.raises(ParameterError):
            von_neumann([-0.2, 1.2])
        with pytest.raises(ParameterError):
            von_neumann([0.9, 0.9])

    def test_branch_entropy_alias(self):
        assert quantum_branch_entropy(0.5, 0.5, 0.0) == \
            pytest.approx(math.log(2.0))


class TestAsymptoticOverlap:
    def test_no_transfer_is_pure(self):
        s = LambdaSystem(omega_a=1.0, gamma_a=1.0, gamma_b=1.0)
        ov = overlap_asymptotic(s, 0.0)
        assert ov.value == 1.0
        assert ov.n_a == 1.0
        assert ov.overlap_sq == 1.0

    def test_full_transfer_orthogonal(self):
        s = LambdaSystem(omega_a=1.0, gamma_a=1.0, gamma_b=1.0)
        ov = overlap_asymptotic(s, 1.0)
        assert ov.value == pytest.approx(0.0, abs=1e-15)
        assert ov.overlap_sq == 0.0

    def test_range_depends_on_rates(self):
        s = LambdaSystem(omega_a=1.0, gamma_a=1.0, gamma_b=3.0)
        p_max = 4.0 * 3.0 / 16.0
        overlap_asymptotic(s, p_max)  # boundary is allowed
        with pytest.raises(ParameterError):
            overlap_asymptotic(s, p_max + 1e-6)
        with pytest.raises(ParameterError):
            overlap_asymptotic(s, -0.01)

    def test_finite_time_limit_matches(self):
        s = LambdaSystem(omega_a=1.0, gamma_a=1.0, gamma_b=1.0)
        pulse = make_pulse(Gaussian(1.0), 1.0, s)
        grid = SimGrid.auto(s, pulse, dt=0.002)
        traj = integrate_psi(s, pulse, grid)
        state = field_amplitudes(traj, s, pulse, grid, traj.t_max)
        fin = overlap_finite_time(state, pulse, s)
        asym = overlap_asymptotic(s, traj.p_ab_final())
        assert not fin.degenerate
        assert fin.value.real * math.sqrt(fin.n_a) == \
            pytest.approx(asym.value, abs=1e-6)
        assert abs(fin.value.imag) < 1e-9


class TestEntropyCurve:
    def test_endpoints_and_shape(self):
        s = LambdaSystem(omega_a=1.0, gamma_a=1.0, gamma_b=1.0)
        curve = entropy_curve(s, InitialMixture(0.5, 0.5), n_points=200)
        assert curve.p_ab[0] == 0.0
        assert curve.p_ab[-1] == pytest.approx(1.0)
        assert curve.s_e[0] == pytest.approx(0.0, abs=1e-15)
        assert curve.s_e_c[0] == pytest.approx(0.0, abs=1e-15)
        assert curve.s_e_c[-1] == pytest.approx(math.log(2.0), abs=1e-12)
        # classical entropy grows monotonically with the transfer
        assert np.all(np.diff(curve.s_e_c) >= -1e-12)
        # total entropy peaks strictly inside the sweep
        k = int(np.argmax(curve.s_e))
        assert 0 < k < curve.s_e.size - 1

    def test_pinned_midpoint(self):
        s = LambdaSystem(omega_a=1.0, gamma_a=1.0, gamma_b=1.0)
        mix = InitialMixture(0.5, 0.5)
        ov = overlap_asymptotic(s, 0.5)
        spec = EnvSpectrum.from_branches(mix, 0.0, ov.n_a, 0.5, ov.overlap_sq)
        assert spec.s_e == pytest.approx(0.8482831849148855, abs=1e-12)
        assert spec.s_e_c == pytest.approx(0.5017095946349128, abs=1e-12)

    def test_pure_a_start_has_no_classical_part(self):
        s = LambdaSystem(omega_a=1.0, gamma_a=1.0, gamma_b=1.0)
        curve = entropy_curve(s, InitialMixture.pure_a(), n_points=50)
        assert np.max(np.abs(curve.s_e_c)) < 1e-12

    def test_asymmetric_rates_cap_the_sweep(self):
        s = LambdaSystem(omega_a=1.0, gamma_a=3.0, gamma_b=1.0)
        curve = entropy_curve(s, InitialMixture(0.5, 0.5), n_points=40)
        assert curve.p_ab[-1] == pytest.approx(12.0 / 16.0)

    def test_rejects_tiny_grid(self):
        s = LambdaSystem(omega_a=1.0)
        with pytest.raises(ParameterError):
            entropy_curve(s, InitialMixture(0.5, 0.5), n_points=1)

    @settings(max_examples=40, deadline=None)
    @given(p_a0=st.floats(0.0, 1.0), p=st.floats(0.0, 1.0))
    def test_entropy_dominates_quantum_part(self, p_a0, p):
        # concavity: S_E >= p_a0 S_q, so S_E^c never goes negative
        s = LambdaSystem(omega_a=1.0, gamma_a=1.0, gamma_b=1.0)
        mix = InitialMixture(p_a0, 1.0 - p_a0)
        ov = overlap_asymptotic(s, p)
        spec = EnvSpectrum.from_branches(mix, 0.0, ov.n_a, p, ov.overlap_sq)
        assert spec.s_e >= p_a0 * spec.s_q - 1e-12
        assert spec.s_e_c >= 0.0

    def test_as_dict_keys(self):
        s = LambdaSystem(omega_a=1.0)
        ov = overlap_asymptotic(s, 0.3)
        spec = EnvSpectrum.from_branches(InitialMixture(0.5, 0.5), 0.0,
                                         ov.n_a, 0.3, ov.overlap_sq)
        d = spec.as_dict()
        assert set(d) == {"lambdas", "psi_sq", "n_a", "n_b", "overlap_sq",
                          "s_e", "s_q", "s_e_c"}
        assert d["lambdas"] == sorted(d["lambdas"], reverse=True)


class TestClassicalEntropy:
    def test_subtraction(self):
        assert classical_entropy(1.0, InitialMixture(0.5, 0.5), 0.4) == \
            pytest.approx(0.8)

    def test_clips_rounding_noise(self):
        assert classical_entropy(0.4, InitialMixture.pure_a(),
                                 0.4 + 1e-15) == 0.0


class TestHeatInversion:
    @pytest.mark.parametrize("delta_ab", [0.0, 0.2])
    def test_round_trip(self, delta_ab):
        s = LambdaSystem(omega_a=1.0, delta_ab=delta_ab,
                         gamma_a=1.0, gamma_b=2.0)
        for p in (0.0, 0.3, 0.88):
            q = p * (s.omega_a * s.gamma_total / s.gamma_b - s.delta_ab)
            assert heat_to_pab(s, q) == pytest.approx(p, abs=1e-15)
