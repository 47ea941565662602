"""Time states, sampling grids and the frame identities built on them.

Time states are kept unnormalized, ``|t> = sum_i exp(-i E_i t) |E_i>``, so
``<t|t> = d_C`` and the continuous resolution of the identity reads
``(1/T) * integral dt |t><t| = 1``.  On the grid ``t_m = t0 + m*T/(s+1)`` the
discrete version ``(1/(s+1)) * sum_m |t_m><t_m| = 1`` is exact whenever no
two grid indices differ by a multiple of ``s+1``; we guarantee that by
requiring ``s+1 >= r_p + 1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from thermaltime.errors import AliasingError
from thermaltime.spectra import TWO_PI, ClockSpectrum


@dataclass(frozen=True)
class TimeState:
    t: float
    amplitudes: np.ndarray

    @property
    def norm2(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)


@dataclass(frozen=True)
class TimeGrid:
    """``s + 1`` equally spaced samples over one clock period."""

    t0: float
    s: int
    T: float
    d_C: int

    def __post_init__(self):
        if int(self.s) != self.s or self.s < 0:
            raise ValueError(f"s must be a non-negative integer, got {self.s}")
        object.__setattr__(self, "s", int(self.s))

    @classmethod
    def for_clock(cls, clock: ClockSpectrum, s: int | None = None, t0: float = 0.0) -> "TimeGrid":
        """Grid over ``clock``'s period; ``s`` defaults to the minimal ``r_p``."""
        return cls(t0=float(t0), s=clock.r_p if s is None else int(s), T=clock.T, d_C=clock.d_C)

    @property
    def n(self) -> int:
        return self.s + 1

    @property
    def samples(self) -> np.ndarray:
        return self.t0 + np.arange(self.n) * (self.T / self.n)

    @property
    def weight(self) -> float:
        """Frame weight ``(p+1)/(s+1)`` for normalized time states."""
        return self.d_C / self.n

    def is_anti_aliased(self, clock: ClockSpectrum) -> bool:
        return self.n >= clock.r_p + 1


def check_anti_aliased(clock: ClockSpectrum, grid: TimeGrid) -> None:
    if grid.T != clock.T or grid.d_C != clock.d_C:
        raise ValueError("time grid was not built over this clock's period")
    if not grid.is_anti_aliased(clock):
        raise AliasingError(
            f"grid has s+1 = {grid.n} samples but exact frame identities need "
            f"s+1 >= r_p + 1 = {clock.r_p + 1}"
        )


def clock_phases(clock: ClockSpectrum, t) -> np.ndarray:
    """``E_i * t`` reduced to ``[0, 2*pi)``, computed from the integer indices.

    Accepts scalar or array ``t``; the clock axis is last.
    """
    q = np.asarray(t, dtype=float) / clock.T
    q = q - np.floor(q)
    frac = np.multiply.outer(q, clock.r_array.astype(float)) % 1.0
    return TWO_PI * frac


def grid_phases(clock: ClockSpectrum, grid: TimeGrid, levels=None, start: int = 0,
                stop: int | None = None) -> np.ndarray:
    """``E_i * t_m`` on the grid, shape ``(samples, levels)``.

    Defaults to every sample and every clock level; ``levels`` and the sample
    range ``[start, stop)`` select a block.  The ``m``-dependent part uses
    exact integer arithmetic ``(r_i * m) mod n``.
    """
    r = clock.r_array if levels is None else clock.r_array[levels]
    n = grid.n
    offset = clock_phases(clock, grid.t0)
    if levels is not None:
        offset = offset[levels]
    m = np.arange(start, min(n, n if stop is None else stop), dtype=np.int64)
    frac = np.mod(np.multiply.outer(m, r % n), n) / n
    return offset[None, :] + TWO_PI * frac


def time_state(clock: ClockSpectrum, t: float) -> TimeState:
    return TimeState(t=float(t), amplitudes=np.exp(-1j * clock_phases(clock, t)))


def frame_operator(clock: ClockSpectrum, grid: TimeGrid) -> np.ndarray:
    """``w * sum_m |t_m><t_m|`` with normalized time states."""
    A = np.exp(-1j * grid_phases(clock, grid))
    return A.T @ A.conj() / grid.n


def identity_residual(clock: ClockSpectrum, grid: TimeGrid) -> float:
    """Max-norm deviation of the discrete frame operator from the identity."""
    F = frame_operator(clock, grid)
    return float(np.max(np.abs(F - np.eye(clock.d_C))))


def overlap(clock: ClockSpectrum, t: float, t2: float) -> complex:
    """``<t|t2> = sum_n exp(i E_n (t - t2))``."""
    return complex(np.sum(np.exp(1j * clock_phases(clock, t - t2))))


class OrthogonalityResult(NamedTuple):
    analytic: complex
    discrete: complex


def orthogonality_integral(clock: ClockSpectrum, i: int, k: int, n_quad: int,
                           t0: float = 0.0) -> OrthogonalityResult:
    """``integral_{t0}^{t0+T} dt exp(i (E_i - E_k) t)`` two ways.

    The analytic value is ``T`` if ``i == k`` and exactly zero otherwise; the
    discrete value is the ``n_quad``-point Riemann sum over one period.
    """
    if not (0 <= i < clock.d_C and 0 <= k < clock.d_C):
        raise IndexError(f"level indices ({i}, {k}) out of range for d_C = {clock.d_C}")
    if n_quad < 1:
        raise ValueError("n_quad must be positive")
    d = clock.r[i] - clock.r[k]
    analytic = complex(clock.T) if i == k else 0j
    m = np.arange(n_quad, dtype=np.int64)
    q0 = (d * (t0 / clock.T)) % 1.0
    phases = TWO_PI * (q0 + np.mod(d * m, n_quad) / n_quad)
    discrete = complex(clock.T / n_quad * np.sum(np.exp(1j * phases)))
    return OrthogonalityResult(analytic, discrete)


def fourier_samples(clock: ClockSpectrum, grid: TimeGrid, values: np.ndarray) -> np.ndarray:
    """``sum_i values[..., i] * exp(+i E_i t_m)`` for all grid samples via FFT.

    ``values`` has the clock axis last; the result replaces it with the grid
    axis.  Indices are folded modulo ``s+1``, which keeps the sum exact even on
    aliased grids.
    """
    values = np.asarray(values, dtype=complex)
    n = grid.n
    r = clock.r_array
    shifted = (values * np.exp(1j * clock_phases(clock, grid.t0))).reshape(-1, clock.d_C)
    binned = np.zeros((shifted.shape[0], n), dtype=complex)
    np.add.at(binned, (slice(None), r % n), shifted)
    out = n * np.fft.ifft(binned, axis=-1)
    return out.reshape(values.shape[:-1] + (n,))
