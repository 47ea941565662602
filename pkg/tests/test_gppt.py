import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from thermaltime.errors import (
    AliasingError,
    DimensionMismatchError,
    UnconditionedTimeError,
    UndefinedConditionalError,
)
from thermaltime.gppt import (
    MeasurementEffect,
    born_probability,
    clock_effect,
    collapse_then_evolve,
    energy_basis_effects,
    fourier_basis_effects,
    projector_effects,
    single_time_probability,
    two_time_probability,
)
from thermaltime.spectra import ClockSpectrum, SystemSpectrum, harmonic_clock
from thermaltime.timegrid import TimeGrid
from thermaltime.universe import UniverseState, sharp_universe, support_sets

CLOCK7 = harmonic_clock(7, 1.0)
STEP7 = CLOCK7.T / 8


def random_sharp(rng):
    levels = np.sort(rng.choice(np.arange(0, 6), 3, replace=False)).astype(float)
    E = float(levels[-1] + rng.integers(0, 8 - int(levels[-1] - levels[0])))
    amps = rng.normal(size=3) + 1j * rng.normal(size=3)
    return sharp_universe(CLOCK7, SystemSpectrum(levels.tolist()), E, amps)


def plus_qubit():
    return sharp_universe(CLOCK7, [0.0, 1.0], 7.0, np.array([1.0, 1.0]) / math.sqrt(2))


class TestEffects:
    def test_clock_effects_resolve_identity(self):
        clock = ClockSpectrum([0, 2, 3, 7], 5.0)
        grid = TimeGrid.for_clock(clock)
        total = sum(clock_effect(clock, t) for t in grid.samples)
        assert np.max(np.abs(total - np.eye(4))) <= 1e-12

    def test_harmonic_effects_are_projectors(self):
        for t in (0.0, 0.3, -2.0):
            F = clock_effect(CLOCK7, t)
            assert np.max(np.abs(F @ F - F)) <= 1e-12

    def test_bases_complete(self):
        for basis in (energy_basis_effects(4), fourier_basis_effects(4)):
            total = sum(e.projector for e in basis)
            assert np.max(np.abs(total - np.eye(4))) <= 1e-12

    def test_qubit_fourier_basis_is_plus_minus(self):
        plus, minus = fourier_basis_effects(2)
        assert np.allclose(plus.projector, 0.5 * np.ones((2, 2)))
        assert np.allclose(minus.projector, 0.5 * np.array([[1, -1], [-1, 1]]))

    def test_projector_effects_normalize(self):
        (e,) = projector_effects([[3.0, 4.0]], labels=["v"])
        assert e.label == "v"
        assert np.trace(e.projector).real == pytest.approx(1.0)

    def test_rejects_non_square(self):
        with pytest.raises(DimensionMismatchError):
            MeasurementEffect("x", np.ones((2, 3)))

    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError, match="Hermitian"):
            MeasurementEffect("x", np.array([[1.0, 1.0], [0.0, 0.0]]))

    def test_rejects_negative(self):
        with pytest.raises(ValueError, match="positive"):
            MeasurementEffect("x", np.diag([1.0, -1.0]))


class TestSingleTime:
    def test_matches_born_rule(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            u = random_sharp(rng)
            for basis in (energy_basis_effects(3), fourier_basis_effects(3)):
                t = float(rng.uniform(-20, 20))
                probs = [single_time_probability(u, e, t) for e in basis]
                born = [born_probability(u, e.projector, t) for e in basis]
                assert np.max(np.abs(np.subtract(probs, born))) <= 1e-10
                assert abs(sum(probs) - 1.0) <= 1e-12

    def test_single_level_state_is_stationary(self):
        u = sharp_universe(CLOCK7, [0.0, 1.0, 3.0], 7.0, [0.0, 1.0, 0.0])
        for t in np.linspace(-5, 5, 7):
            assert [single_time_probability(u, e, t) for e in energy_basis_effects(3)] == pytest.approx(
                [0.0, 1.0, 0.0], abs=1e-14)
            assert [single_time_probability(u, e, t) for e in fourier_basis_effects(3)] == pytest.approx(
                [1 / 3] * 3, abs=1e-14)

    def test_fourier_oscillation(self):
        u = plus_qubit()
        plus, minus = fourier_basis_effects(2)
        for t in np.linspace(0, 2 * math.pi, 9):
            assert single_time_probability(u, plus, t) == pytest.approx(math.cos(t / 2) ** 2, abs=1e-14)
            assert single_time_probability(u, minus, t) == pytest.approx(math.sin(t / 2) ** 2, abs=1e-14)

    def test_theta_refinement_is_idempotent(self):
        rng = np.random.default_rng(4)
        u = random_sharp(rng)
        eff = fourier_basis_effects(3)[1]
        ref = single_time_probability(u, eff, 1.3)
        for steps in (9, 16, 31):
            assert single_time_probability(u, eff, 1.3, theta_steps=steps) == pytest.approx(ref, abs=1e-13)

    def test_aliased_theta_grid(self):
        with pytest.raises(AliasingError):
            single_time_probability(plus_qubit(), energy_basis_effects(2)[0], 0.0, theta_steps=7)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            single_time_probability(plus_qubit(), energy_basis_effects(3)[0], 0.0)

    def test_zero_state_never_shows_time(self):
        u = plus_qubit()
        zero = UniverseState(u.shell, tuple(np.zeros_like(c) for c in u.coeffs), normalized=False)
        with pytest.raises(UnconditionedTimeError):
            single_time_probability(zero, energy_basis_effects(2)[0], 0.0)

    def test_born_vanishing_relative_state(self):
        shell = support_sets(harmonic_clock(1, 1.0), [0.0], 0.0, 1.5)
        u = UniverseState(shell, (np.array([1.0, -1.0]) / math.sqrt(2),))
        with pytest.raises(UnconditionedTimeError):
            born_probability(u, np.eye(1), 0.0)

    def test_wide_shell_warns(self):
        shell = support_sets(harmonic_clock(1, 1.0), [0.0], 0.0, 1.5)
        u = UniverseState(shell, (np.array([1.0, 1.0]) / math.sqrt(2),))
        with pytest.warns(UserWarning, match="delta"):
            p = single_time_probability(u, energy_basis_effects(1)[0], 0.4)
        assert p == pytest.approx(1.0)


class TestTwoTime:
    def test_fourier_transition(self):
        u = plus_qubit()
        plus, minus = fourier_basis_effects(2)
        for k in range(8):
            t_i = 0.25
            t_f = t_i + k * STEP7
            p = two_time_probability(u, (plus, t_i), (minus, t_f))
            assert p == pytest.approx(math.sin(k * STEP7 / 2) ** 2, abs=1e-12)

    def test_matches_collapse_oracle(self):
        rng = np.random.default_rng(9)
        for _ in range(50):
            u = random_sharp(rng)
            for basis in (energy_basis_effects(3), fourier_basis_effects(3)):
                t_i = float(rng.uniform(-5, 5))
                t_f = t_i + int(rng.integers(1, 8)) * STEP7
                for ei in basis:
                    if born_probability(u, ei.projector, t_i) < 1e-8:
                        continue
                    for ef in basis:
                        p = two_time_probability(u, (ei, t_i), (ef, t_f))
                        q = collapse_then_evolve(u, ei.projector, t_i, ef.projector, t_f)
                        assert abs(p - q) <= 1e-9

    def test_repeated_measurement(self):
        rng = np.random.default_rng(2)
        u = random_sharp(rng)
        for e in fourier_basis_effects(3):
            assert two_time_probability(u, (e, 0.7), (e, 0.7)) == pytest.approx(1.0, abs=1e-12)

    def test_eigenstate_preparation_reduces_to_single_time(self):
        u = sharp_universe(CLOCK7, [0.0, 1.0, 3.0], 7.0, [1.0, 2.0, 0.5j])
        for j, ei in enumerate(energy_basis_effects(3)):
            for ef in fourier_basis_effects(3):
                p = two_time_probability(u, (ei, 0.0), (ef, 3 * STEP7))
                assert p == pytest.approx(ef.projector[j, j].real, abs=1e-12)

    def test_impossible_first_outcome(self):
        u = sharp_universe(CLOCK7, [0.0, 1.0], 7.0, [1.0, 0.0])
        e0, e1 = energy_basis_effects(2)
        with pytest.raises(UndefinedConditionalError):
            two_time_probability(u, (e1, 0.0), (e0, STEP7))
        with pytest.raises(UndefinedConditionalError):
            collapse_then_evolve(u, e1.projector, 0.0, e0.projector, STEP7)

    def test_off_grid_lag_warns(self):
        plus, minus = fourier_basis_effects(2)
        with pytest.warns(UserWarning, match="multiple"):
            two_time_probability(plus_qubit(), (plus, 0.0), (minus, 0.1))

    def test_non_harmonic_clock_warns(self):
        clock = ClockSpectrum([0, 1, 3], 2 * math.pi)
        u = sharp_universe(clock, [0.0, 2.0], 3.0, [1.0, 1.0])
        e = energy_basis_effects(2)[0]
        with pytest.warns(UserWarning, match="non-harmonic"):
            two_time_probability(u, (e, 0.0), (e, 0.0))


@given(st.integers(0, 2**32 - 1), st.floats(-30, 30))
def test_probabilities_sum_to_one(seed, t):
    u = random_sharp(np.random.default_rng(seed))
    for basis in (energy_basis_effects(3), fourier_basis_effects(3)):
        probs = [single_time_probability(u, e, t) for e in basis]
        assert min(probs) >= -1e-12
        assert abs(sum(probs) - 1.0) <= 1e-12
