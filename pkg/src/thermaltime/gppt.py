"""Conditional probabilities with an average over the external time.

A joint measurement "system gives ``a``, clock shows ``t``" is represented by
``P_a (x) F_t`` with the clock effect ``F_t = |t><t| / (s+1)`` built from the
unnormalized time state.  These effects resolve the identity on an
anti-aliased grid; on a harmonic clock with ``s+1 = p+1`` each ``F_t`` is an
orthogonal projector.

The external time ``theta`` runs over one clock period on ``theta_steps``
points.  For two-time queries the projector algebra reproduces the textbook
collapse-then-evolve statistics when ``theta_steps = p+1`` on a harmonic clock
and ``t_f - t_i`` is a multiple of ``T/(p+1)``; finer theta grids sample the
non-orthogonal overlaps between time states and change the answer.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from thermaltime.dynamics import conditioned_state
from thermaltime.errors import (
    AliasingError,
    DimensionMismatchError,
    UnconditionedTimeError,
    UndefinedConditionalError,
)
from thermaltime.spectra import ClockSpectrum
from thermaltime.timegrid import clock_phases, time_state
from thermaltime.universe import UniverseState

DENOMINATOR_FLOOR = 1e-14


@dataclass(frozen=True, eq=False)
class MeasurementEffect:
    """System projector ``P_a``; the clock half is built per query time."""

    label: str
    projector: np.ndarray
    grid_points: int | None = None

    def __post_init__(self):
        P = np.asarray(self.projector, dtype=complex)
        if P.ndim != 2 or P.shape[0] != P.shape[1]:
            raise DimensionMismatchError(f"projector must be square, got shape {P.shape}")
        if np.max(np.abs(P - P.conj().T)) > 1e-12:
            raise ValueError(f"effect {self.label!r} is not Hermitian")
        if np.min(np.linalg.eigvalsh(P)) < -1e-12:
            raise ValueError(f"effect {self.label!r} is not positive semidefinite")
        object.__setattr__(self, "projector", P)

    def clock_effect(self, clock: ClockSpectrum, t: float) -> np.ndarray:
        return clock_effect(clock, t, self.grid_points)


def clock_effect(clock: ClockSpectrum, t: float, grid_points: int | None = None) -> np.ndarray:
    """``F_t = |t><t| / (s+1)``; defaults to the minimal grid ``s+1 = r_p+1``."""
    n = clock.r_p + 1 if grid_points is None else int(grid_points)
    tau = time_state(clock, t).amplitudes
    return np.outer(tau, tau.conj()) / n


def projector_effects(vectors, labels=None) -> list:
    out = []
    for a, v in enumerate(vectors):
        v = np.asarray(v, dtype=complex)
        v = v / np.linalg.norm(v)
        out.append(MeasurementEffect(str(a) if labels is None else labels[a], np.outer(v, v.conj())))
    return out


def energy_basis_effects(d_S: int) -> list:
    return projector_effects(np.eye(d_S))


def fourier_basis_effects(d_S: int) -> list:
    """Projectors on ``(1/sqrt(d)) sum_j exp(2 pi i a j / d) |j>``; ``|+>, |->`` for a qubit."""
    j = np.arange(d_S)
    return projector_effects([np.exp(2j * np.pi * a * j / d_S) for a in range(d_S)])


def _theta_grid(clock: ClockSpectrum, theta_steps: int | None) -> np.ndarray:
    n = clock.r_p + 1 if theta_steps is None else int(theta_steps)
    if n < clock.r_p + 1:
        raise AliasingError(f"theta_steps = {n} < r_p + 1 = {clock.r_p + 1}; theta average not exact")
    return np.arange(n) * (clock.T / n)


def _check_dims(universe: UniverseState, *effects: MeasurementEffect) -> None:
    for eff in effects:
        if eff.projector.shape[0] != universe.d_S:
            raise DimensionMismatchError(
                f"effect {eff.label!r} acts on dimension {eff.projector.shape[0]}, system has {universe.d_S}"
            )


def _evolved_conditioned(universe: UniverseState, t: float, thetas: np.ndarray) -> np.ndarray:
    """``<t| U(theta) |Psi>`` for every theta, shape ``(n_theta, d_S)``."""
    shell = universe.shell
    I, lv = shell.flat_index, shell.flat_level
    Ej = shell.system.energies[lv]
    phase = (clock_phases(shell.clock, thetas)[:, I] + np.multiply.outer(thetas, Ej)
             - clock_phases(shell.clock, t)[I])
    terms = universe.flat_coeffs * np.exp(-1j * phase)
    onehot = np.zeros((len(lv), shell.system.d_S))
    onehot[np.arange(len(lv)), lv] = 1.0
    return terms @ onehot


def single_time_probability(universe: UniverseState, effect_a: MeasurementEffect, t: float,
                            theta_steps: int | None = None) -> float:
    """``p(a | t)`` as the ratio of theta-averaged joint and clock-only weights."""
    _check_dims(universe, effect_a)
    shell = universe.shell
    if not shell.is_sharp:
        warnings.warn(
            f"shell width delta = {shell.delta} > 0: result carries a bias of order "
            f"delta*T = {shell.delta * shell.clock.T:.3g}",
            stacklevel=2,
        )
    thetas = _theta_grid(shell.clock, theta_steps)
    v = _evolved_conditioned(universe, t, thetas)
    num = float(np.einsum("ki,ij,kj->", v.conj(), effect_a.projector, v).real)
    den = float(np.sum(np.abs(v) ** 2))
    # common weight 1/(s+1) of the clock effect cancels in the ratio
    if den / len(thetas) < DENOMINATOR_FLOOR:
        raise UnconditionedTimeError(f"clock never shows t = {t} in this state")
    return num / den


def born_probability(universe: UniverseState, projector, t: float) -> float:
    """``<phi(t)|P|phi(t)> / <phi(t)|phi(t)>`` on the conditioned state."""
    phi = conditioned_state(universe, t)
    n2 = float(np.vdot(phi, phi).real)
    if n2 < DENOMINATOR_FLOOR:
        raise UnconditionedTimeError(f"relative state vanishes at t = {t}")
    return float(np.vdot(phi, np.asarray(projector) @ phi).real) / n2


def two_time_probability(universe: UniverseState, first, second,
                         theta_steps: int | None = None) -> float:
    """``p(a_f | t_f, a_i, t_i)`` from the double theta average.

    ``first`` and ``second`` are ``(effect, time)`` pairs.  The first joint
    measurement updates the state as ``rho -> E rho E`` with
    ``E = P_{a_i} (x) F_{t_i}``.
    """
    (eff_i, t_i), (eff_f, t_f) = first, second
    _check_dims(universe, eff_i, eff_f)
    shell = universe.shell
    clock = shell.clock
    thetas = _theta_grid(clock, theta_steps)
    if not clock.is_harmonic():
        warnings.warn("clock effects are not projectors on a non-harmonic clock", stacklevel=2)
    step = clock.T / len(thetas)
    lag = (t_f - t_i) / step
    if abs(lag - round(lag)) > 1e-9 * max(1.0, abs(lag)):
        warnings.warn("t_f - t_i is not a multiple of the theta step", stacklevel=2)

    psi = universe.dense()
    E_tot = clock.energies[:, None] + shell.system.energies[None, :]
    U = np.exp(-1j * np.multiply.outer(thetas, E_tot))          # (n, d_C, d_S)
    F_i = eff_i.clock_effect(clock, t_i)
    F_f = eff_f.clock_effect(clock, t_f)
    P_i, P_f = eff_i.projector, eff_f.projector

    # E(theta') |Psi> in the Heisenberg picture: U^dag (F (x) P) U |Psi>
    prepared = U.conj() * np.einsum("ab,nbj,kj->nak", F_i, U * psi, P_i)
    evolved = U[:, None] * prepared[None, :]                     # (theta, theta', d_C, d_S)
    F_part = np.einsum("ab,xybj->xyaj", F_f, evolved)
    num = np.einsum("xyaj,xyak,jk->", evolved.conj(), F_part, P_f).real
    den = np.einsum("xyaj,xyaj->", evolved.conj(), F_part).real
    if den / len(thetas) ** 2 < DENOMINATOR_FLOOR:
        raise UndefinedConditionalError(
            f"first outcome {eff_i.label!r} at t = {t_i} has zero probability"
        )
    return float(num / den)


def collapse_then_evolve(universe: UniverseState, P_i, t_i: float, P_f, t_f: float) -> float:
    """Textbook oracle: condition at ``t_i``, project, renormalize, evolve, Born rule."""
    phi = conditioned_state(universe, t_i)
    chi = np.asarray(P_i) @ phi
    n2 = float(np.vdot(chi, chi).real)
    if n2 < DENOMINATOR_FLOOR:
        raise UndefinedConditionalError("first outcome has zero probability")
    chi = np.exp(-1j * universe.shell.system.energies * (t_f - t_i)) * chi / math.sqrt(n2)
    return float(np.vdot(chi, np.asarray(P_f) @ chi).real)
