import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from thermaltime.errors import AliasingError, DimensionMismatchError, EmptyShellError
from thermaltime.spectra import build_exponential_clock, harmonic_clock
from thermaltime.thermo import (
    DensityMatrix,
    dense_partial_trace,
    fit_beta,
    gibbs_state,
    reduced_density_matrix,
    shell_entropy_beta,
    shell_mixed_reduced,
    time_average_density_matrix,
    trace_distance,
    typicality_census,
)
from thermaltime.timegrid import TimeGrid
from thermaltime.universe import EnergyShell, sample_universe, sharp_universe, support_sets

from conftest import random_universe


@pytest.fixture(scope="module")
def exp_clock():
    return build_exponential_clock(1.0, 50.0, 3999, 2e5)


def density(values):
    return DensityMatrix(np.diag(values).astype(complex))


class TestDensityMatrix:
    def test_valid(self):
        assert density([0.3, 0.7]).is_valid()

    def test_problems_reported(self):
        bad = DensityMatrix(np.array([[0.5, 1.0], [0.0, 0.7]]))
        msgs = " ".join(bad.problems())
        assert "Hermitian" in msgs and "trace" in msgs
        assert "negative" in " ".join(density([1.5, -0.5]).problems())

    def test_shape(self):
        with pytest.raises(DimensionMismatchError):
            DensityMatrix(np.zeros((2, 3)))


class TestReduced:
    def test_single_level_support(self):
        u = sharp_universe(harmonic_clock(6), [0.0, 1.0], 4.0, {0: 1.0})
        np.testing.assert_allclose(np.asarray(reduced_density_matrix(u)), np.diag([1.0, 0.0]))

    def test_sharp_qubit(self):
        u = sharp_universe(harmonic_clock(6), [0.0, 1.0], 4.0, [1, 1])
        np.testing.assert_allclose(np.asarray(reduced_density_matrix(u)), np.diag([0.5, 0.5]), atol=1e-15)

    def test_dense_oracle(self, small_universes):
        for u in small_universes:
            assert u.shell.clock.d_C * u.d_S <= 2000
            rho = reduced_density_matrix(u)
            assert np.max(np.abs(np.asarray(dense_partial_trace(u)) - np.asarray(rho))) <= 1e-12
            assert rho.is_valid()


class TestTimeAverage:
    def test_random(self, small_universes):
        for u in small_universes:
            avg = time_average_density_matrix(u, TimeGrid.for_clock(u.shell.clock, t0=1.7))
            assert np.max(np.abs(np.asarray(avg) - np.asarray(reduced_density_matrix(u)))) <= 1e-12
            assert avg.is_valid()

    def test_sharp_dephased(self):
        u = sharp_universe(harmonic_clock(9, 0.5), [0.0, 0.5, 1.5], 4.0, [0.3, 0.5j, 0.6])
        avg = np.asarray(time_average_density_matrix(u, TimeGrid.for_clock(u.shell.clock)))
        np.testing.assert_allclose(avg, np.diag(u.populations), atol=1e-14)

    def test_borderline_grid_mismatch(self):
        # occupied clock levels r = 0 and r = r_p fold together when s+1 = r_p
        u = sharp_universe(harmonic_clock(4), [0.0, 4.0], 4.0, [1, 1])
        grid = TimeGrid.for_clock(u.shell.clock, s=u.shell.clock.r_p - 1)
        with pytest.raises(AliasingError):
            time_average_density_matrix(u, grid)
        avg = np.asarray(time_average_density_matrix(u, grid, strict=False))
        assert np.max(np.abs(avg - np.asarray(reduced_density_matrix(u)))) > 1e-6

    def test_oversampled(self, small_universes):
        u = small_universes[0]
        grid = TimeGrid.for_clock(u.shell.clock, s=2 * u.shell.clock.r_p + 5)
        avg = np.asarray(time_average_density_matrix(u, grid))
        assert np.max(np.abs(avg - np.asarray(reduced_density_matrix(u)))) <= 1e-12


class TestGibbs:
    def test_infinite_temperature(self):
        np.testing.assert_allclose(gibbs_state([0.0, 1.0, 3.0], 0.0).populations, 1 / 3)

    def test_qubit(self):
        b, w = 0.7, 1.3
        x = math.exp(-b * w)
        np.testing.assert_allclose(gibbs_state([0.0, w], b).populations, [1 / (1 + x), x / (1 + x)])

    def test_ground_state_limit(self):
        np.testing.assert_allclose(gibbs_state([0.0, 1.0], 800.0).populations, [1.0, 0.0])
        assert gibbs_state([0.0, 1.0], 1e6).is_valid()

    def test_non_finite_beta(self):
        with pytest.raises(ValueError):
            gibbs_state([0.0, 1.0], math.inf)


class TestShellMixed:
    def test_equal_windows(self):
        shell = support_sets(harmonic_clock(40, 0.1), [0.0, 1.0], 3.0, 0.45)
        assert shell.sizes[0] == shell.sizes[1]
        np.testing.assert_allclose(shell_mixed_reduced(shell).populations, [0.5, 0.5])

    def test_exponential_ratio(self, exp_clock):
        shell = support_sets(exp_clock, [0.0, 1.0], 2.126, 0.5)
        P = shell_mixed_reduced(shell).populations
        assert abs(P[1] / P[0] / math.exp(-1) - 1) <= 0.1

    def test_single_window_pure(self):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            shell = support_sets(harmonic_clock(5), [0.0, 10.0], 3.0, 0.5)
        np.testing.assert_allclose(shell_mixed_reduced(shell).populations, [1.0, 0.0])

    def test_empty(self):
        shell = EnergyShell(harmonic_clock(3), sharp_universe(harmonic_clock(3), [0.0], 1.0, [1]).shell.system,
                            1.0, 0.1, (np.zeros(0, dtype=np.int64),), (np.zeros(0),))
        with pytest.raises(EmptyShellError):
            shell_mixed_reduced(shell)

    def test_gibbs_convergence(self, exp_clock):
        shell = support_sets(exp_clock, [0.0, 1.0], 3.5, 0.5)
        assert trace_distance(shell_mixed_reduced(shell), gibbs_state([0.0, 1.0], 1.0)) <= 0.01


class TestTraceDistance:
    def test_equal(self):
        assert trace_distance(density([0.2, 0.8]), density([0.2, 0.8])) == 0.0

    def test_orthogonal_pure(self):
        a = np.outer([1, 1j], [1, -1j]) / 2
        b = np.outer([1, -1j], [1, 1j]) / 2
        assert trace_distance(a, b) == pytest.approx(1.0)

    def test_diagonal(self):
        assert trace_distance(density([0.6, 0.4]), density([0.5, 0.5])) == pytest.approx(0.1)

    def test_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            trace_distance(density([1.0]), density([0.5, 0.5]))

    @given(st.integers(0, 2**32 - 1), st.integers(2, 5))
    def test_metric_properties(self, seed, d):
        rng = np.random.default_rng(seed)

        def rand_rho():
            A = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
            R = A @ A.conj().T
            return R / np.trace(R).real

        a, b = rand_rho(), rand_rho()
        dab = trace_distance(a, b)
        assert 0.0 <= dab <= 1.0 + 1e-12
        assert dab == pytest.approx(trace_distance(b, a), abs=1e-12)


class TestCensus:
    def test_sharp_qubit_distance_zero(self):
        u = sharp_universe(harmonic_clock(6), [0.0, 1.0], 4.0, [1, 1])
        assert trace_distance(reduced_density_matrix(u), shell_mixed_reduced(u.shell)) <= 1e-15

    def test_report(self, exp_clock):
        shell = support_sets(exp_clock, [0.0, 1.0], 2.126, 0.5)
        rep = typicality_census(shell, n=20, seed0=5)
        assert rep.n_samples == 20 and rep.N == shell.N
        assert np.all((rep.dist_omega >= 0) & (rep.dist_omega <= 1))
        assert np.all((rep.dist_gibbs >= 0) & (rep.dist_gibbs <= 1))
        np.testing.assert_allclose(rep.norm_check, 1.0, atol=1e-12)
        assert math.isfinite(rep.beta_entropy) and rep.beta_ref == rep.beta_entropy
        s = rep.summary()
        assert set(s["quantiles_dist_omega"]) == {"0.5", "0.9", "0.99"}
        assert len(list(rep.rows())) == 20

    def test_deterministic(self, exp_clock):
        shell = support_sets(exp_clock, [0.0, 1.0], 2.126, 0.5)
        a = typicality_census(shell, n=5, seed0=3)
        b = typicality_census(shell, n=5, seed0=3)
        assert list(a.rows()) == list(b.rows())

    def test_explicit_beta_ref(self, exp_clock):
        shell = support_sets(exp_clock, [0.0, 1.0], 2.126, 0.5)
        rep = typicality_census(shell, n=3, beta_ref=0.0)
        u = sample_universe(shell, 0)
        assert rep.dist_gibbs[0] == pytest.approx(trace_distance(reduced_density_matrix(u), density([0.5, 0.5])))

    def test_scaling_with_window_size(self, exp_clock):
        sizes, dists = [], []
        # four doublings, 50 -> 399 levels in the smaller window
        for k in range(4):
            shell = support_sets(exp_clock, [0.0, 1.0], 1.43 + k * math.log(2), 0.5)
            rep = typicality_census(shell, n=2000)
            sizes.append(shell.sizes.min())
            dists.append(np.mean(rep.dist_omega))
        slope = np.polyfit(np.log(sizes), np.log(dists), 1)[0]
        assert abs(slope + 0.5) <= 0.1

    def test_bad_args(self, exp_clock):
        shell = support_sets(exp_clock, [0.0, 1.0], 2.126, 0.5)
        with pytest.raises(ValueError):
            typicality_census(shell, n=0)
        with pytest.raises(DimensionMismatchError):
            typicality_census(shell, system=[0.0, 2.0], n=1)


class TestBetaRoutes:
    def test_fit_beta(self):
        E = np.array([0.0, 1.0, 2.0])
        assert fit_beta(E, np.exp(-0.8 * E)) == pytest.approx(0.8)
        assert math.isnan(fit_beta(E, [1.0, 0.0, 0.0]))

    def test_entropy_route(self, exp_clock):
        shell = support_sets(exp_clock, [0.0, 1.0], 2.626, 0.5)
        assert abs(shell_entropy_beta(shell) - 1.0) <= 0.1
        sharp = sharp_universe(harmonic_clock(6), [0.0, 1.0], 4.0, [1, 1])
        assert math.isnan(shell_entropy_beta(sharp.shell))

    def test_random_universes_valid(self):
        for k in range(3):
            assert reduced_density_matrix(random_universe(k)).is_valid()
