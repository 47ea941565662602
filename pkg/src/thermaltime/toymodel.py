"""Harmonic oscillator confined to its two lowest levels inside a thermal universe."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from thermaltime.dynamics import alpha, conditioned_state, relative_state
from thermaltime.errors import DimensionMismatchError, EmptyShellError
from thermaltime.spectra import ClockSpectrum, SystemSpectrum
from thermaltime.thermo import DensityMatrix, grid_relative_states, time_average_density_matrix
from thermaltime.timegrid import TimeGrid
from thermaltime.universe import UniverseState, sample_universe, sharp_universe, support_sets


@dataclass(frozen=True)
class OscillatorConfig:
    """Mass, frequency and the two retained levels ``E0``, ``E0 + omega``.

    ``E0`` defaults to the zero-point energy ``omega / 2``.
    """

    m: float
    omega: float
    E0: float | None = None

    def __post_init__(self):
        if not (self.m > 0 and self.omega > 0):
            raise ValueError(f"mass and frequency must be positive, got m={self.m}, omega={self.omega}")
        if self.E0 is None:
            object.__setattr__(self, "E0", 0.5 * self.omega)

    @property
    def levels(self) -> tuple:
        return (self.E0, self.E0 + self.omega)

    @property
    def system(self) -> SystemSpectrum:
        return SystemSpectrum(self.levels)

    @property
    def x_amplitude(self) -> float:
        return math.sqrt(2.0 / (self.m * self.omega))

    def on_grid(self, clock: ClockSpectrum) -> bool:
        x = self.omega / clock.step
        return abs(x - round(x)) <= 1e-9 * max(1.0, x)

    def snapped(self, clock: ClockSpectrum) -> "OscillatorConfig":
        """Copy with ``omega`` rounded to the nearest multiple of ``2*pi/T``."""
        k = max(1, round(self.omega / clock.step))
        omega = k * clock.step
        E0 = 0.5 * omega if math.isclose(self.E0, 0.5 * self.omega) else self.E0
        return OscillatorConfig(self.m, omega, E0)


def position_operator(osc: OscillatorConfig) -> np.ndarray:
    """``X`` on the truncated basis ``{|0>, |1>, |2>}``."""
    a = np.diag([1.0, math.sqrt(2.0)], k=1)
    return math.sqrt(1.0 / (2.0 * osc.m * osc.omega)) * (a + a.T)


def _prepare(osc: OscillatorConfig, clock: ClockSpectrum, snap: bool) -> OscillatorConfig:
    if osc.on_grid(clock):
        return osc
    if snap:
        return osc.snapped(clock)
    warnings.warn("omega is off the 2*pi/T grid; period averages will not be exact", stacklevel=3)
    return osc


def oscillator_universe(clock: ClockSpectrum, osc: OscillatorConfig, E: float, delta: float,
                        seed: int, snap: bool = True) -> UniverseState:
    osc = _prepare(osc, clock, snap)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        shell = support_sets(clock, osc.system, E, delta)
    if shell.empty_levels:
        raise EmptyShellError(f"oscillator levels {shell.empty_levels} have empty clock windows")
    return sample_universe(shell, seed)


def sharp_oscillator_universe(clock: ClockSpectrum, osc: OscillatorConfig, E: float,
                              amplitudes, snap: bool = True) -> UniverseState:
    osc = _prepare(osc, clock, snap)
    return sharp_universe(clock, osc.system, E, amplitudes)


def _check(universe: UniverseState, osc: OscillatorConfig) -> None:
    if universe.d_S != 2:
        raise DimensionMismatchError(f"toy model needs exactly 2 system levels, got {universe.d_S}")
    gap = universe.shell.system.levels[1] - universe.shell.system.levels[0]
    if not math.isclose(gap, osc.omega, rel_tol=1e-12):
        raise ValueError(f"universe level gap {gap} does not match omega = {osc.omega}")


def _pair_tables(universe: UniverseState):
    c0, c1 = universe.coeffs
    D0, D1 = universe.shell.detunings
    amp = np.outer(np.abs(c0), np.abs(c1))
    dphi = np.subtract.outer(np.angle(c1), np.angle(c0)).T  # [i, k] -> phi_k1 - phi_i0
    dD = np.subtract.outer(D0, D1)                          # [i, k] -> D_i0 - D_k1
    return amp, dphi, dD


def position_expectation(universe: UniverseState, osc: OscillatorConfig, t: float,
                         normalize: bool = False) -> float:
    """``<phi(t)|X|phi(t)>`` from the double sum over both clock windows."""
    _check(universe, osc)
    amp, dphi, dD = _pair_tables(universe)
    value = osc.x_amplitude * float(np.sum(amp * np.cos((osc.omega + dD) * t - dphi)))
    if normalize:
        value /= relative_state(universe, t).norm2
    return value


def position_alpha_form(universe: UniverseState, osc: OscillatorConfig, t: float) -> float:
    """``sqrt(2/(m omega)) |a0||a1| cos(omega t - (arg a1 - arg a0))``."""
    _check(universe, osc)
    a0, a1 = alpha(universe, t)
    return osc.x_amplitude * abs(a0) * abs(a1) * math.cos(osc.omega * t - (np.angle(a1) - np.angle(a0)))


def position_matrix_element(universe: UniverseState, osc: OscillatorConfig, t: float) -> float:
    """Direct ``<phi|X|phi>`` with the conditioned state padded to three levels."""
    _check(universe, osc)
    phi = np.zeros(3, dtype=complex)
    phi[:2] = conditioned_state(universe, t)
    return float(np.vdot(phi, position_operator(osc) @ phi).real)


def position_first_order(universe: UniverseState, osc: OscillatorConfig, t: float) -> float:
    """First-order expansion in ``t * (Delta_i0 - Delta_k1)`` around ``t = 0``."""
    _check(universe, osc)
    amp, dphi, dD = _pair_tables(universe)
    a0, a1 = alpha(universe, 0.0)
    lead = abs(a0) * abs(a1) * math.cos(osc.omega * t - (np.angle(a1) - np.angle(a0)))
    corr = float(np.sum(amp * t * dD * np.sin(osc.omega * t - dphi)))
    return osc.x_amplitude * (lead - corr)


def toy_time_average(universe: UniverseState, grid: TimeGrid) -> DensityMatrix:
    if universe.d_S != 2:
        raise DimensionMismatchError(f"toy model needs exactly 2 system levels, got {universe.d_S}")
    return time_average_density_matrix(universe, grid)


def position_period_average(universe: UniverseState, osc: OscillatorConfig, grid: TimeGrid) -> float:
    """Mean of ``<X>_t`` over the grid samples of one clock period."""
    _check(universe, osc)
    phi = grid_relative_states(universe, grid)
    x01 = math.sqrt(1.0 / (2.0 * osc.m * osc.omega))
    return float(np.mean(2.0 * x01 * (phi[0].conj() * phi[1]).real))


def position_table(universe: UniverseState, osc: OscillatorConfig, times) -> np.ndarray:
    """Rows ``(t, X_exact, X_first_order, norm2)``."""
    rows = []
    for t in np.atleast_1d(times):
        t = float(t)
        rows.append((t, position_expectation(universe, osc, t), position_first_order(universe, osc, t),
                     relative_state(universe, t).norm2))
    return np.array(rows)
