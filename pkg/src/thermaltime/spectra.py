"""Clock and system energy spectra.

Clock energies live on an integer grid, ``E_i = (2*pi/T) * r_i``.  The integer
indices ``r_i`` are the stored representation; float energies are derived on
demand so that the discrete frame identities in :mod:`thermaltime.timegrid`
can be checked at machine precision.
"""

from __future__ import annotations

import hashlib
import json
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from thermaltime.errors import (
    CapacityError,
    DegeneracyError,
    NoStatesError,
    ResolutionError,
    SpectrumError,
)

TWO_PI = 2.0 * np.pi

#: Largest admissible grid index.  Phase products ``r * m`` for grid sample
#: ``m <= r_max`` then stay inside int64.
MAX_GRID_INDEX = 2**31 - 1

SOURCES = ("rational", "exponential", "explicit")


@dataclass(frozen=True)
class ClockSpectrum:
    """Non-degenerate clock spectrum on the ``2*pi/T`` grid.

    Parameters
    ----------
    r : sequence of int
        Strictly increasing grid indices with ``r[0] == 0``.
    T : float
        Clock period.
    source : str
        One of ``"rational"``, ``"exponential"``, ``"explicit"``.
    params : mapping
        Construction parameters, carried through serialization.
    """

    r: tuple
    T: float
    source: str = "explicit"
    params: Mapping = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        r = []
        for value in self.r:
            if isinstance(value, (bool, np.bool_)) or int(value) != value:
                raise SpectrumError(f"grid index {value!r} is not an integer")
            r.append(int(value))
        object.__setattr__(self, "r", tuple(r))
        object.__setattr__(self, "T", float(self.T))
        object.__setattr__(self, "params", dict(self.params))

        if len(r) < 2:
            raise SpectrumError("a clock needs at least two levels (d_C >= 2)")
        if r[0] != 0:
            raise SpectrumError(f"the ground level must sit at r_0 = 0, got {r[0]}")
        if any(b <= a for a, b in zip(r, r[1:])):
            dup = [a for a, b in zip(r, r[1:]) if a == b]
            if dup:
                raise DegeneracyError(f"degenerate clock levels at grid index {dup[0]}")
            raise SpectrumError("clock grid indices must be strictly increasing")
        if r[-1] > MAX_GRID_INDEX:
            raise CapacityError(
                f"largest grid index {r[-1]} exceeds the supported maximum {MAX_GRID_INDEX}"
            )
        if not (math.isfinite(self.T) and self.T > 0):
            raise SpectrumError(f"clock period must be positive and finite, got {self.T}")
        if self.source not in SOURCES:
            raise SpectrumError(f"unknown spectrum source {self.source!r}")

    @property
    def p(self) -> int:
        return len(self.r) - 1

    @property
    def d_C(self) -> int:
        return len(self.r)

    @property
    def r_p(self) -> int:
        return self.r[-1]

    @property
    def step(self) -> float:
        """Energy quantum ``2*pi/T``."""
        return TWO_PI / self.T

    @property
    def r_array(self) -> np.ndarray:
        return np.asarray(self.r, dtype=np.int64)

    @property
    def energies(self) -> np.ndarray:
        return self.step * self.r_array

    def is_harmonic(self) -> bool:
        return self.r == tuple(range(self.d_C))

    def to_record(self) -> dict:
        return {
            "T": self.T,
            "r": list(self.r),
            "source": self.source,
            "params": dict(self.params),
        }

    @classmethod
    def from_record(cls, record: Mapping) -> "ClockSpectrum":
        return cls(
            r=tuple(record["r"]),
            T=record["T"],
            source=record.get("source", "explicit"),
            params=record.get("params", {}),
        )

    def dumps(self) -> str:
        return json.dumps(self.to_record(), sort_keys=True)

    @classmethod
    def loads(cls, text: str) -> "ClockSpectrum":
        return cls.from_record(json.loads(text))

    def digest(self) -> str:
        """SHA-256 of the canonical record (used in run manifests)."""
        return hashlib.sha256(self.dumps().encode()).hexdigest()


@dataclass(frozen=True)
class SystemSpectrum:
    """Strictly increasing system energies; ``H_S`` is diagonal in this basis."""

    levels: tuple

    def __post_init__(self):
        levels = tuple(float(e) for e in self.levels)
        if not levels:
            raise SpectrumError("system spectrum is empty")
        if not all(math.isfinite(e) for e in levels):
            raise SpectrumError("system energies must be finite")
        if any(b <= a for a, b in zip(levels, levels[1:])):
            raise SpectrumError("system energies must be strictly increasing")
        object.__setattr__(self, "levels", levels)

    @property
    def d_S(self) -> int:
        return len(self.levels)

    @property
    def energies(self) -> np.ndarray:
        return np.asarray(self.levels, dtype=float)

    @property
    def min_gap(self) -> float:
        """Smallest level spacing; ``inf`` for a single level."""
        if self.d_S < 2:
            return math.inf
        return float(np.min(np.diff(self.energies)))


@dataclass(frozen=True)
class ThermalParams:
    entropy_at: dict
    beta: float
    scheme: str = "forward"


def harmonic_clock(p: int, omega: float = 1.0) -> ClockSpectrum:
    """Equally spaced ladder ``r_i = i`` with level spacing ``omega``."""
    if p < 1:
        raise SpectrumError("harmonic clock needs p >= 1")
    return ClockSpectrum(
        r=tuple(range(p + 1)),
        T=TWO_PI / omega,
        source="explicit",
        params={"kind": "harmonic", "omega": float(omega)},
    )


def quantize_rational_spectrum(ratios: Sequence[tuple], E1: float) -> ClockSpectrum:
    """Build a clock whose excited levels sit at ``E1 * A_i / D_i``.

    ``ratios[0]`` must be ``(1, 1)`` since it describes ``E_1`` itself.  The
    returned spectrum has ``r_1 = lcm(D_i)``, ``r_i = r_1 * A_i / D_i`` and
    ``T = 2*pi*r_1 / E1``, so the level energies are reproduced exactly.
    """
    if not E1 > 0:
        raise SpectrumError(f"E1 must be positive, got {E1}")
    ratios = [tuple(pair) for pair in ratios]
    if not ratios:
        raise SpectrumError("need at least one excited level")

    fracs = []
    for idx, pair in enumerate(ratios, start=1):
        if len(pair) != 2:
            raise SpectrumError(f"ratio #{idx} must be an (A, D) pair, got {pair!r}")
        A, D = pair
        if any(isinstance(v, bool) or int(v) != v for v in (A, D)):
            raise SpectrumError(f"ratio #{idx} {pair!r}: A and D must be integers")
        A, D = int(A), int(D)
        if A <= 0 or D <= 0:
            raise SpectrumError(f"ratio #{idx} {pair!r}: A and D must be positive")
        g = math.gcd(A, D)
        if g != 1:
            raise SpectrumError(
                f"ratio #{idx} ({A}, {D}) is not in lowest terms; use ({A // g}, {D // g})"
            )
        fracs.append(Fraction(A, D))

    if fracs[0] != 1:
        raise SpectrumError(f"the first ratio describes E_1/E_1 and must be (1, 1), got {ratios[0]}")
    seen = {}
    for idx, fr in enumerate(fracs, start=1):
        if fr in seen:
            raise DegeneracyError(
                f"ratios #{seen[fr]} and #{idx} coincide ({fr}); clock levels must be non-degenerate"
            )
        seen[fr] = idx
    if any(b <= a for a, b in zip(fracs, fracs[1:])):
        raise SpectrumError("ratios must be strictly increasing")

    r1 = math.lcm(*(fr.denominator for fr in fracs))
    r = [0] + [r1 * fr.numerator // fr.denominator for fr in fracs]
    if r[-1] > MAX_GRID_INDEX:
        raise CapacityError(
            f"lcm of denominators gives r_p = {r[-1]} > {MAX_GRID_INDEX}; "
            "reduce the denominators"
        )
    return ClockSpectrum(
        r=tuple(r),
        T=TWO_PI * r1 / E1,
        source="rational",
        params={"ratios": [[fr.numerator, fr.denominator] for fr in fracs], "E1": float(E1)},
    )


def level_positions(beta_target: float, nu0: float, p: int) -> np.ndarray:
    """Continuum positions with density of states ``nu0 * exp(beta * E)``."""
    i = np.arange(p + 1, dtype=float)
    return np.log1p(beta_target * i / nu0) / beta_target


def build_exponential_clock(beta_target: float, nu0: float, p: int, T: float) -> ClockSpectrum:
    """Clock whose density of states grows like ``exp(beta_target * E)``.

    Level ``i`` is placed at ``log(1 + beta*i/nu0) / beta`` and rounded to the
    ``2*pi/T`` grid.  Grid collisions are bumped to the next free index.  The
    grid must be at least as fine as the smallest demanded level spacing,
    otherwise bumping would flatten the density at the top of the spectrum.
    """
    if not beta_target > 0:
        raise SpectrumError(f"beta_target must be positive, got {beta_target}")
    if not nu0 > 0:
        raise SpectrumError(f"nu0 must be positive, got {nu0}")
    if int(p) != p or p < 1:
        raise SpectrumError(f"p must be an integer >= 1, got {p}")
    if not T > 0:
        raise SpectrumError(f"T must be positive, got {T}")
    p = int(p)

    eps = level_positions(beta_target, nu0, p)
    step = TWO_PI / T
    min_spacing = float(eps[-1] - eps[-2])
    if step > min_spacing:
        required = TWO_PI / min_spacing
        raise ResolutionError(
            f"grid step 2*pi/T = {step:.3g} exceeds the smallest level spacing "
            f"{min_spacing:.3g}; need T >= {required:.6g}",
            required_T=required,
        )
    if eps[-1] / step > MAX_GRID_INDEX:
        raise CapacityError(f"T = {T} puts the top level beyond grid index {MAX_GRID_INDEX}")

    r = np.rint(eps / step).astype(np.int64)
    bumped = 0
    for k in range(1, p + 1):
        if r[k] <= r[k - 1]:
            r[k] = r[k - 1] + 1
            bumped += 1

    params = {"beta_target": float(beta_target), "nu0": float(nu0), "p": p, "T": float(T),
              "bumped": bumped}
    clock = ClockSpectrum(r=tuple(int(x) for x in r), T=T, source="exponential", params=params)
    if p >= 10:
        slope = density_slope(clock)
        params["density_slope"] = slope
        params["slope_rel_error"] = abs(slope - beta_target) / beta_target
        clock = ClockSpectrum(r=clock.r, T=T, source="exponential", params=params)
    return clock


def window_indices(clock: ClockSpectrum, lo: float, hi: float) -> np.ndarray:
    """Indices ``i`` with ``lo <= E_i < hi``.

    Boundaries are shifted down by a billionth of a grid step so that a level
    sitting exactly on ``lo`` is not lost to rounding in ``E - E_j``.
    """
    energies = clock.energies
    tol = 1e-9 * clock.step
    start = np.searchsorted(energies, lo - tol, side="left")
    stop = np.searchsorted(energies, hi - tol, side="left")
    return np.arange(start, max(start, stop))


def count_levels(clock: ClockSpectrum, lo: float, hi: float) -> int:
    return len(window_indices(clock, lo, hi))


def density_slope(clock: ClockSpectrum, n_windows: int = 10,
                  lo: float | None = None, hi: float | None = None) -> float:
    """Slope of ``log(level count per window)`` against window centre."""
    energies = clock.energies
    lo = float(energies[0]) if lo is None else lo
    hi = float(energies[-1]) if hi is None else hi
    edges = np.linspace(lo, hi, n_windows + 1)
    counts = np.array([count_levels(clock, a, b) for a, b in zip(edges[:-1], edges[1:])])
    centres = 0.5 * (edges[:-1] + edges[1:])
    keep = counts > 0
    if keep.sum() < 2:
        raise NoStatesError("fewer than two populated windows; cannot fit a slope")
    slope, _ = np.polyfit(centres[keep], np.log(counts[keep]), 1)
    return float(slope)


def entropy_and_beta(clock: ClockSpectrum, E: float, delta: float, dE: float,
                     scheme: str = "forward", min_count: int = 10) -> ThermalParams:
    """Window-counting entropy ``S = ln N(E, delta)`` and ``beta = dS/dE``.

    ``scheme="forward"`` uses windows at ``E`` and ``E + dE``; ``"central"``
    uses ``E - dE`` and ``E + dE``.  Windows with fewer than ``min_count``
    levels only trigger a warning; an empty window is an error.
    """
    if not dE > 0:
        raise ValueError(f"dE must be positive, got {dE}")
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta}")
    if scheme == "forward":
        starts = (E, E + dE)
        span = dE
    elif scheme == "central":
        starts = (E - dE, E + dE)
        span = 2 * dE
    else:
        raise ValueError(f"unknown scheme {scheme!r}")

    entropy = {}
    for lo in starts:
        n = count_levels(clock, lo, lo + delta)
        if n == 0:
            raise NoStatesError(f"no clock levels in [{lo}, {lo + delta})")
        if n < min_count:
            warnings.warn(f"only {n} levels in [{lo}, {lo + delta}); beta will be noisy",
                          stacklevel=2)
        entropy[(lo, lo + delta)] = math.log(n)
    s_lo, s_hi = entropy.values()
    if scheme == "central":
        n_mid = count_levels(clock, E, E + delta)
        if n_mid > 0:
            entropy[(E, E + delta)] = math.log(n_mid)
    return ThermalParams(entropy_at=entropy, beta=(s_hi - s_lo) / span, scheme=scheme)


def as_system(levels: Iterable[float] | SystemSpectrum) -> SystemSpectrum:
    if isinstance(levels, SystemSpectrum):
        return levels
    return SystemSpectrum(tuple(levels))
