"""Conditioned (relative) states of the system and their evolution.

All formulas here drop the irrelevant global phase ``exp(i E t)``: clock
energies enter only through the detunings ``Delta_ij = E_i + E_j - E``, so the
relative state reads

    phi_j(t) = alpha_j(t) * exp(-i E_j t),   alpha_j(t) = sum_{i in I_j} c_ij exp(i Delta_ij t).

States are reported unnormalized; the norm drifts with ``t`` unless the shell
is sharp.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from thermaltime.errors import UndefinedFidelityError
from thermaltime.spectra import TWO_PI
from thermaltime.timegrid import TimeGrid, check_anti_aliased, clock_phases, grid_phases
from thermaltime.universe import EnergyShell, UniverseState

_CHUNK = 4096  # grid samples per block in the explicit quadrature


@dataclass(frozen=True)
class RelativeState:
    t: float
    amplitudes: np.ndarray
    alpha: np.ndarray

    @property
    def norm2(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))


def _per_level(shell: EnergyShell, values: np.ndarray) -> np.ndarray:
    d_S = shell.system.d_S
    lv = shell.flat_level
    return (np.bincount(lv, weights=values.real, minlength=d_S)
            + 1j * np.bincount(lv, weights=values.imag, minlength=d_S))


def alpha(universe: UniverseState, t: float) -> np.ndarray:
    """``alpha_j(t)`` for every system level (zero where ``I_j`` is empty)."""
    shell = universe.shell
    return _per_level(shell, universe.flat_coeffs * np.exp(1j * shell.flat_detuning * t))


def relative_state(universe: UniverseState, t: float, normalize: bool = False) -> RelativeState:
    """Closed-form relative state; ``normalize`` divides by ``sqrt(N(t))``."""
    a = alpha(universe, t)
    amps = a * np.exp(-1j * universe.shell.system.energies * t)
    if normalize:
        n2 = float(np.sum(np.abs(amps) ** 2))
        if n2 == 0:
            raise UndefinedFidelityError(f"relative state vanishes at t = {t}")
        amps = amps / np.sqrt(n2)
    return RelativeState(float(t), amps, a)


def conditioned_state(universe: UniverseState, t: float) -> np.ndarray:
    """``<t|Psi>`` evaluated directly over clock levels, global phase removed.

    Independent of the detuning bookkeeping: it uses absolute clock energies
    from the integer grid and strips ``exp(i E t)`` at the end.
    """
    shell = universe.shell
    phases = clock_phases(shell.clock, t)[shell.flat_index]
    global_phase = np.mod(shell.E * t, TWO_PI)
    return _per_level(shell, universe.flat_coeffs * np.exp(1j * (phases - global_phase)))


def norm_curve(universe: UniverseState, times) -> np.ndarray:
    """``<phi(t)|phi(t)>`` from the explicit double sum over each window.

    ``sum_j sum_{i,k in I_j} |c_ij||c_kj| cos((D_ij - D_kj) t - (phi_kj - phi_ij))``
    """
    shell = universe.shell
    times = np.atleast_1d(np.asarray(times, dtype=float))
    out = np.zeros(len(times))
    for D, c in zip(shell.detunings, universe.coeffs):
        if len(c) == 0:
            continue
        mod = np.abs(c)
        ph = np.angle(c)
        amp = np.outer(mod, mod)
        dD = np.subtract.outer(D, D)
        dphi = np.subtract.outer(ph, ph).T  # [i, k] -> phi_k - phi_i
        for n, t in enumerate(times):
            out[n] += np.sum(amp * np.cos(dD * t - dphi))
    return out


def schrodinger_fidelity(universe: UniverseState, t0: float, t: float) -> float:
    """Overlap of the true relative state with plain unitary evolution from ``t0``."""
    phi = relative_state(universe, t).amplitudes
    phi0 = relative_state(universe, t0).amplitudes
    phi_sch = np.exp(-1j * universe.shell.system.energies * (t - t0)) * phi0
    n_a = float(np.vdot(phi_sch, phi_sch).real)
    n_b = float(np.vdot(phi, phi).real)
    if n_a == 0 or n_b == 0:
        raise UndefinedFidelityError("zero-norm relative state; fidelity undefined")
    return float(abs(np.vdot(phi_sch, phi)) ** 2 / (n_a * n_b))


@dataclass(frozen=True)
class NonlocalKernel:
    """``Delta(t, t') = <t|Delta|t'>`` as a (diagonal) operator on the system.

    ``matrix`` and ``apply`` use the same phase convention as
    :func:`relative_state` (global ``exp(-i E (t - t'))`` removed).
    """

    shell: EnergyShell

    @classmethod
    def from_universe(cls, universe: UniverseState) -> "NonlocalKernel":
        return cls(universe.shell)

    @property
    def vanishes(self) -> bool:
        return not np.any(self.shell.flat_detuning)

    def diagonal(self, t: float, t_prime: float) -> np.ndarray:
        shell = self.shell
        D = shell.flat_detuning
        Ej = shell.system.energies[shell.flat_level]
        return _per_level(shell, D * np.exp(1j * (D - Ej) * (t - t_prime)))

    def matrix(self, t: float, t_prime: float) -> np.ndarray:
        return np.diag(self.diagonal(t, t_prime))

    def apply(self, t: float, t_prime: float, vec) -> np.ndarray:
        return self.diagonal(t, t_prime) * np.asarray(vec)

    def grid_term(self, universe: UniverseState, t: float, grid: TimeGrid) -> np.ndarray:
        """``(1/(s+1)) sum_m Delta(t, t_m) phi(t_m)`` by explicit quadrature.

        Evaluated with absolute clock phases on the integer grid; the global
        phase is stripped from the final vector only.
        """
        shell = self.shell
        phase_t = clock_phases(shell.clock, t)
        out = np.zeros(shell.system.d_S, dtype=complex)
        for j, (I, D, c) in enumerate(zip(shell.support, shell.detunings, universe.coeffs)):
            if len(I) == 0:
                continue
            acc = np.zeros(len(I), dtype=complex)
            for start in range(0, grid.n, _CHUNK):
                P = np.exp(1j * grid_phases(shell.clock, grid, I, start, start + _CHUNK))
                acc += P.conj().T @ (P @ c)  # sum_m <E_k|t_m><t_m|Psi>_j
            out[j] = np.sum(D * np.exp(1j * phase_t[I]) * acc) / grid.n
        return out * np.exp(-1j * np.mod(shell.E * t, TWO_PI))


def time_derivative(universe: UniverseState, t: float) -> np.ndarray:
    """``i d/dt phi(t)`` from term-by-term differentiation of the closed form."""
    shell = universe.shell
    w = shell.system.energies[shell.flat_level] - shell.flat_detuning
    return _per_level(shell, universe.flat_coeffs * w * np.exp(-1j * w * t))


def nonlocal_residual(universe: UniverseState, t: float, grid: TimeGrid) -> float:
    """Max-norm mismatch of the time non-local equation at ``t``.

    Left side: analytic ``i d/dt phi``.  Right side: ``H_S phi`` minus the
    kernel integral, done as a discrete sum over ``grid``.
    """
    check_anti_aliased(universe.shell.clock, grid)
    lhs = time_derivative(universe, t)
    phi = relative_state(universe, t).amplitudes
    rhs = universe.shell.system.energies * phi - NonlocalKernel(universe.shell).grid_term(universe, t, grid)
    return float(np.max(np.abs(lhs - rhs)))


def relative_state_table(universe: UniverseState, times) -> np.ndarray:
    """Rows ``(t, Re phi_0, Im phi_0, ..., norm2)`` for a time sweep."""
    rows = []
    for t in np.atleast_1d(times):
        phi = relative_state(universe, float(t))
        parts = np.column_stack([phi.amplitudes.real, phi.amplitudes.imag]).ravel()
        rows.append(np.concatenate([[t], parts, [phi.norm2]]))
    return np.array(rows)


def fidelity_table(universe: UniverseState, t0: float, times) -> np.ndarray:
    return np.array([[t, schrodinger_fidelity(universe, t0, float(t))] for t in np.atleast_1d(times)])
