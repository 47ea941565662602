"""Global pure states on an energy shell.

A shell ``[E, E + delta)`` couples system level ``j`` to the clock window
``I_j = {i : E - E_j <= E_i < E - E_j + delta}``.  Coefficients are stored
sparsely, one array per system level, aligned with ``shell.support[j]``.

Random universes address the counter-based Philox generator directly: the
coefficient of clock level ``i`` and system level ``j`` is built from the
output block at counter ``[i, 0, 0, j]`` under key ``seed``.  Words 0 and 1 of
that block become two independent uniforms, mapped to the real and imaginary
parts through the inverse normal CDF.  A coefficient therefore depends only on
``(seed, i, j)``, which keeps samples reproducible regardless of evaluation
order, window size or how a census is split across workers.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass
from functools import cached_property
from typing import Mapping

import numpy as np
from scipy.special import ndtri

from thermaltime.errors import (
    EmptyShellError,
    ResonanceError,
    ShellOverlapError,
)
from thermaltime.spectra import ClockSpectrum, SystemSpectrum, as_system, window_indices

UNIVERSE_CSV_FIELDS = ("E", "delta", "j", "i", "re", "im")


@dataclass(frozen=True, eq=False)
class EnergyShell:
    """Support windows ``I_j`` and detunings ``Delta_ij`` in ``[0, delta]``.

    ``delta == 0`` marks a sharp shell built by :func:`sharp_universe`.
    """

    clock: ClockSpectrum
    system: SystemSpectrum
    E: float
    delta: float
    support: tuple
    detunings: tuple

    @property
    def sizes(self) -> np.ndarray:
        return np.array([len(I) for I in self.support], dtype=np.int64)

    @property
    def N(self) -> int:
        """Number of product basis states in the shell."""
        return int(self.sizes.sum())

    @property
    def is_sharp(self) -> bool:
        return self.delta == 0.0

    @property
    def empty_levels(self) -> list:
        return [j for j, I in enumerate(self.support) if len(I) == 0]

    @cached_property
    def flat_level(self) -> np.ndarray:
        return np.concatenate(
            [np.full(len(I), j, dtype=np.int64) for j, I in enumerate(self.support)]
        )

    @cached_property
    def flat_index(self) -> np.ndarray:
        return np.concatenate([np.asarray(I, dtype=np.int64) for I in self.support])

    @cached_property
    def flat_detuning(self) -> np.ndarray:
        return np.concatenate([np.asarray(D, dtype=float) for D in self.detunings])


@dataclass(frozen=True, eq=False)
class UniverseState:
    shell: EnergyShell
    coeffs: tuple
    normalized: bool = True

    @property
    def d_S(self) -> int:
        return self.shell.system.d_S

    @cached_property
    def flat_coeffs(self) -> np.ndarray:
        return np.concatenate([np.asarray(c, dtype=complex) for c in self.coeffs])

    @property
    def norm2(self) -> float:
        return float(np.sum(np.abs(self.flat_coeffs) ** 2))

    @property
    def populations(self) -> np.ndarray:
        """``P_j = sum_{i in I_j} |c_ij|^2``."""
        return np.array([float(np.sum(np.abs(c) ** 2)) for c in self.coeffs])

    def dense(self) -> np.ndarray:
        """Full coefficient matrix of shape ``(d_C, d_S)``."""
        psi = np.zeros((self.shell.clock.d_C, self.d_S), dtype=complex)
        psi[self.shell.flat_index, self.shell.flat_level] = self.flat_coeffs
        return psi

    def energy_residual(self) -> float:
        """``||H|Psi> - E|Psi>||``, at most ``delta`` for a normalized state."""
        return float(np.sqrt(np.sum(np.abs(self.flat_coeffs * self.shell.flat_detuning) ** 2)))


def support_sets(clock: ClockSpectrum, system, E: float, delta: float) -> EnergyShell:
    """Clock windows coupled to each system level by the shell ``[E, E + delta)``."""
    system = as_system(system)
    if not delta > 0:
        raise ValueError(f"shell width must be positive, got {delta}")
    if delta >= system.min_gap:
        raise ShellOverlapError(
            f"delta = {delta} is not smaller than the system gap {system.min_gap}; "
            "clock windows of neighbouring levels would collide"
        )
    energies = clock.energies
    support, detunings = [], []
    for j, Ej in enumerate(system.levels):
        idx = window_indices(clock, E - Ej, E - Ej + delta)
        support.append(idx)
        detunings.append(np.clip(energies[idx] + Ej - E, 0.0, delta))

    if all(len(I) == 0 for I in support):
        raise EmptyShellError(f"no clock level falls in any window of the shell [{E}, {E + delta})")
    empty = [j for j, I in enumerate(support) if len(I) == 0]
    if empty:
        warnings.warn(f"system levels {empty} have empty clock windows", stacklevel=2)

    flat = np.concatenate(support)
    assert len(np.unique(flat)) == len(flat), "clock windows overlap"
    return EnergyShell(clock, system, float(E), float(delta), tuple(support), tuple(detunings))


def _raw_coefficients(seed: int, j: int, I: np.ndarray) -> np.ndarray:
    """Unnormalized draws for the contiguous clock window ``I`` of level ``j``."""
    if len(I) == 0:
        return np.zeros(0, dtype=complex)
    lo, hi = int(I[0]), int(I[-1]) + 1
    blocks = np.random.Philox(key=seed, counter=[lo, 0, 0, j]).random_raw(4 * (hi - lo))
    words = blocks.reshape(-1, 4)[np.asarray(I) - lo, :2]
    u = ((words >> np.uint64(11)).astype(float) + 0.5) * 2.0**-53   # open interval (0, 1)
    z = ndtri(u) * math.sqrt(0.5)
    return z[:, 0] + 1j * z[:, 1]


def sample_universe(shell: EnergyShell, seed: int) -> UniverseState:
    """Random shell state with i.i.d. ``N(0, 1/2)`` real and imaginary parts.

    The unnormalized draw is scaled to unit norm afterwards.
    """
    if shell.N == 0:
        raise EmptyShellError("cannot sample a universe on an empty shell")
    if int(seed) != seed or seed < 0:
        raise ValueError(f"seed must be a non-negative integer, got {seed}")
    raw = [_raw_coefficients(int(seed), j, I) for j, I in enumerate(shell.support)]
    norm = math.sqrt(sum(float(np.sum(np.abs(c) ** 2)) for c in raw))
    return UniverseState(shell, tuple(c / norm for c in raw), normalized=True)


def _resonant_index(clock: ClockSpectrum, target: float):
    x = target / clock.step
    r = round(x)
    if abs(x - r) > 1e-9 * max(1.0, abs(x)):
        return None
    pos = np.searchsorted(clock.r_array, r)
    if pos < clock.d_C and clock.r[pos] == r:
        return int(pos)
    return None


def sharp_universe(clock: ClockSpectrum, system, E: float, amplitudes) -> UniverseState:
    """Exact eigenstate ``H|Psi> = E|Psi>`` with one clock partner per level.

    ``amplitudes`` is a sequence indexed by system level or a ``{j: amp}``
    mapping; levels with zero amplitude are left out of the support.
    """
    system = as_system(system)
    if isinstance(amplitudes, Mapping):
        amps = {int(j): complex(a) for j, a in amplitudes.items()}
    else:
        amps = {j: complex(a) for j, a in enumerate(amplitudes)}
    for j in amps:
        if not 0 <= j < system.d_S:
            raise IndexError(f"system level {j} out of range for d_S = {system.d_S}")
    norm = math.sqrt(sum(abs(a) ** 2 for a in amps.values()))
    if norm == 0:
        raise EmptyShellError("all amplitudes are zero")

    support, detunings, coeffs = [], [], []
    for j, Ej in enumerate(system.levels):
        a = amps.get(j, 0j)
        if a == 0:
            support.append(np.zeros(0, dtype=np.int64))
            coeffs.append(np.zeros(0, dtype=complex))
        else:
            i = _resonant_index(clock, E - Ej)
            if i is None:
                raise ResonanceError(
                    f"no clock level at E - E_{j} = {E - Ej} on the 2*pi/T grid", level=j
                )
            support.append(np.array([i], dtype=np.int64))
            coeffs.append(np.array([a / norm]))
        detunings.append(np.zeros(len(support[-1])))
    shell = EnergyShell(clock, system, float(E), 0.0, tuple(support), tuple(detunings))
    return UniverseState(shell, tuple(coeffs), normalized=True)


def universe_rows(universe: UniverseState):
    shell = universe.shell
    for j, (I, c) in enumerate(zip(shell.support, universe.coeffs)):
        for i, cij in zip(I, c):
            yield {
                "E": repr(shell.E),
                "delta": repr(shell.delta),
                "j": j,
                "i": int(i),
                "re": f"{cij.real:.16e}",
                "im": f"{cij.imag:.16e}",
            }


def dump_universe_csv(universe: UniverseState, fh) -> None:
    writer = csv.DictWriter(fh, fieldnames=UNIVERSE_CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(universe_rows(universe))


def dumps_universe_csv(universe: UniverseState) -> str:
    buf = io.StringIO()
    dump_universe_csv(universe, buf)
    return buf.getvalue()


def load_universe_csv(fh, clock: ClockSpectrum, system) -> UniverseState:
    """Rebuild a universe from CSV records; off-support records are rejected."""
    system = as_system(system)
    if isinstance(fh, str):
        fh = io.StringIO(fh)
    records = list(csv.DictReader(fh))
    if not records:
        raise ValueError("universe file has no records")
    E = float(records[0]["E"])
    delta = float(records[0]["delta"])
    values = {}
    for line, rec in enumerate(records, start=2):
        if float(rec["E"]) != E or float(rec["delta"]) != delta:
            raise ValueError(f"line {line}: inconsistent shell parameters")
        key = (int(rec["j"]), int(rec["i"]))
        if key in values:
            raise ValueError(f"line {line}: duplicate record for (j, i) = {key}")
        values[key] = complex(float(rec["re"]), float(rec["im"]))

    if delta == 0.0:
        amps = {}
        for (j, i), c in values.items():
            if not 0 <= j < system.d_S or _resonant_index(clock, E - system.levels[j]) != i:
                raise ValueError(f"record (j={j}, i={i}) is off the sharp-shell support")
            amps[j] = c
        shell = sharp_universe(clock, system, E, amps).shell
        # stored values are kept verbatim, not renormalized
        coeffs = tuple(np.array([values[(j, int(I[0]))]]) if len(I) else np.zeros(0, complex)
                       for j, I in enumerate(shell.support))
    else:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            shell = support_sets(clock, system, E, delta)
        allowed = set(zip(shell.flat_level.tolist(), shell.flat_index.tolist()))
        for key in values:
            if key not in allowed:
                raise ValueError(f"record (j={key[0]}, i={key[1]}) is off the shell support")
        coeffs = tuple(
            np.array([values.get((j, int(i)), 0j) for i in I], dtype=complex)
            for j, I in enumerate(shell.support)
        )
    norm2 = sum(float(np.sum(np.abs(c) ** 2)) for c in coeffs)
    return UniverseState(shell, coeffs, normalized=abs(norm2 - 1.0) < 1e-12)
