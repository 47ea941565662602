import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from thermaltime.errors import AliasingError
from thermaltime.spectra import ClockSpectrum, harmonic_clock
from thermaltime.timegrid import (
    TimeGrid,
    check_anti_aliased,
    clock_phases,
    fourier_samples,
    frame_operator,
    grid_phases,
    identity_residual,
    orthogonality_integral,
    overlap,
    time_state,
)

clocks = st.lists(st.integers(1, 200), min_size=1, max_size=20, unique=True).map(
    lambda rs: ClockSpectrum([0] + sorted(rs), 2 * math.pi))


def explicit_frame(r, n, T=2 * math.pi):
    # naive float evaluation, independent of the integer phase reduction
    E = 2 * math.pi / T * np.asarray(r, dtype=float)
    F = np.zeros((len(r), len(r)), dtype=complex)
    for m in range(n):
        v = np.exp(-1j * E * (m * T / n))
        F += np.outer(v, v.conj())
    return F / n


class TestTimeState:
    def test_zero_phase(self):
        np.testing.assert_array_equal(time_state(ClockSpectrum([0, 1, 2], 2 * math.pi), 0.0).amplitudes, 1)

    def test_half_period(self):
        ts = time_state(ClockSpectrum([0, 1, 2], 2 * math.pi), math.pi)
        np.testing.assert_allclose(ts.amplitudes, [1, -1, 1], atol=1e-15)

    @given(clocks, st.floats(-1e4, 1e4))
    def test_unit_modulus_and_norm(self, clock, t):
        ts = time_state(clock, t)
        np.testing.assert_allclose(np.abs(ts.amplitudes), 1.0, atol=1e-15)
        assert ts.norm2 == pytest.approx(clock.d_C)

    @given(clocks, st.floats(-1, 1))
    def test_periodic(self, clock, t):
        a = time_state(clock, t).amplitudes
        b = time_state(clock, t + clock.T).amplitudes
        assert np.max(np.abs(a - b)) <= 1e-12

    @given(clocks, st.floats(-1e4, 1e4))
    def test_periodic_far_from_origin(self, clock, t):
        # t + T itself is rounded, so the bound scales with E_max * ulp(t + T)
        a = time_state(clock, t).amplitudes
        b = time_state(clock, t + clock.T).amplitudes
        tol = 4 * clock.energies[-1] * np.spacing(abs(t) + clock.T) + 1e-14
        assert np.max(np.abs(a - b)) <= tol

    def test_phases_match_naive(self):
        c = ClockSpectrum([0, 3, 7, 20], 5.0)
        t = 1.2345
        np.testing.assert_allclose(np.exp(-1j * clock_phases(c, t)), np.exp(-1j * c.energies * t), atol=1e-13)


class TestIdentity:
    def test_three_levels_four_samples(self):
        c = ClockSpectrum([0, 1, 2], 2 * math.pi)
        g = TimeGrid.for_clock(c, s=3)
        assert identity_residual(c, g) <= 1e-12
        np.testing.assert_allclose(frame_operator(c, g), explicit_frame([0, 1, 2], 4), atol=1e-14)

    def test_qubit_dft(self):
        c = ClockSpectrum([0, 1], 2 * math.pi)
        assert identity_residual(c, TimeGrid.for_clock(c, s=1)) <= 1e-12

    def test_aliased_pair(self):
        c = ClockSpectrum([0, 3], 2 * math.pi)
        g = TimeGrid.for_clock(c, s=2)
        res = identity_residual(c, g)
        assert res == pytest.approx(1.0)
        assert abs(explicit_frame([0, 3], 3)[0, 1]) == pytest.approx(1.0)
        with pytest.raises(AliasingError):
            check_anti_aliased(c, g)

    @given(clocks, st.integers(1, 3), st.floats(-50, 50))
    def test_frame_completeness(self, clock, extra, t0):
        grid = TimeGrid.for_clock(clock, s=clock.r_p + extra - 1, t0=t0)
        F = frame_operator(clock, grid)
        rng = np.random.default_rng(clock.r_p)
        V = rng.normal(size=(clock.d_C, 20)) + 1j * rng.normal(size=(clock.d_C, 20))
        err = np.linalg.norm(F @ V - V, axis=0) / np.linalg.norm(V, axis=0)
        assert err.max() <= 1e-12

    @given(clocks)
    def test_borderline_grid_fails(self, clock):
        assert identity_residual(clock, TimeGrid.for_clock(clock, s=clock.r_p - 1)) > 1e-6

    def test_grid_basics(self):
        c = harmonic_clock(4)
        g = TimeGrid.for_clock(c, t0=0.3)
        assert g.n == 5 and g.weight == pytest.approx(1.0)
        np.testing.assert_allclose(np.diff(g.samples), c.T / 5)
        with pytest.raises(ValueError):
            TimeGrid(0.0, -1, 1.0, 2)

    def test_grid_from_other_clock(self):
        with pytest.raises(ValueError):
            check_anti_aliased(harmonic_clock(3), TimeGrid.for_clock(harmonic_clock(4)))

    def test_grid_phase_blocks(self):
        c = ClockSpectrum([0, 4, 9, 11], 3.0)
        g = TimeGrid.for_clock(c, t0=0.7)
        full = grid_phases(c, g)
        np.testing.assert_array_equal(grid_phases(c, g, [1, 3], 2, 7), full[2:7][:, [1, 3]])


class TestOverlap:
    def test_diagonal(self):
        c = ClockSpectrum([0, 2, 5, 9], 1.0)
        assert overlap(c, 0.4, 0.4) == pytest.approx(4.0)

    def test_harmonic_orthogonal(self):
        c = harmonic_clock(6)
        assert abs(overlap(c, c.T / 7, 0.0)) <= 1e-12

    def test_three_phasors(self):
        c = ClockSpectrum([0, 2, 3], 4 * math.pi)
        assert overlap(c, math.pi, 0.0) == pytest.approx(-1j, abs=1e-12)
        # 1 + e^{i pi} + e^{i 3pi/2}
        assert overlap(c, math.pi, 0.0) == pytest.approx(1 + np.exp(1j * math.pi) + np.exp(1.5j * math.pi))


class TestOrthogonality:
    def test_diagonal(self):
        c = ClockSpectrum([0, 5], 3.0)
        res = orthogonality_integral(c, 1, 1, 6)
        assert res.analytic == 3.0 and res.discrete == pytest.approx(3.0, abs=1e-12)

    def test_six_point(self):
        c = ClockSpectrum([0, 5], 2 * math.pi)
        res = orthogonality_integral(c, 0, 1, 6)
        naive = sum(np.exp(-2j * math.pi * 5 * m / 6) for m in range(6)) * c.T / 6
        assert abs(res.discrete) <= 1e-12 and abs(naive) <= 1e-12 and res.analytic == 0

    def test_exhaustive_small_clock(self):
        rng = np.random.default_rng(0)
        r = np.sort(rng.choice(np.arange(1, 150), 63, replace=False))
        c = ClockSpectrum([0] + r.tolist(), 7.0)
        worst = max(abs(orthogonality_integral(c, i, k, c.r_p + 1).discrete - (c.T if i == k else 0))
                    for i in range(c.d_C) for k in range(c.d_C))
        assert worst <= 1e-12 * c.T

    def test_index_errors(self):
        with pytest.raises(IndexError):
            orthogonality_integral(harmonic_clock(2), 0, 5, 3)
        with pytest.raises(ValueError):
            orthogonality_integral(harmonic_clock(2), 0, 1, 0)


class TestFourierSamples:
    @given(clocks, st.integers(0, 3), st.floats(-10, 10))
    def test_matches_direct_sum(self, clock, extra, t0):
        grid = TimeGrid.for_clock(clock, s=max(0, clock.r_p - 2 + extra), t0=t0)
        rng = np.random.default_rng(clock.d_C)
        vals = rng.normal(size=(2, clock.d_C)) + 1j * rng.normal(size=(2, clock.d_C))
        direct = vals @ np.exp(1j * grid_phases(clock, grid)).T
        np.testing.assert_allclose(fourier_samples(clock, grid, vals), direct, atol=1e-10)
