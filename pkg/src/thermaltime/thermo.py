"""Reduced states, time averages, Gibbs targets and the typicality census."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from thermaltime.errors import DimensionMismatchError, EmptyShellError, NoStatesError
from thermaltime.spectra import SystemSpectrum, as_system, entropy_and_beta
from thermaltime.timegrid import TimeGrid, check_anti_aliased, fourier_samples
from thermaltime.universe import EnergyShell, UniverseState, sample_universe


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data, dtype=complex)
        if data.ndim != 2 or data.shape[0] != data.shape[1]:
            raise DimensionMismatchError(f"density matrix must be square, got shape {data.shape}")
        object.__setattr__(self, "data", data)

    def __array__(self, dtype=None, copy=None):
        return self.data if dtype is None else self.data.astype(dtype)

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    @property
    def populations(self) -> np.ndarray:
        return self.data.diagonal().real.copy()

    def problems(self, tol: float = 1e-12) -> list:
        """Violated invariants (empty when the matrix is a valid state)."""
        out = []
        herm = float(np.max(np.abs(self.data - self.data.conj().T)))
        if herm > tol:
            out.append(f"not Hermitian (max deviation {herm:.3g})")
        eig_min = float(np.min(np.linalg.eigvalsh(0.5 * (self.data + self.data.conj().T))))
        if eig_min < -tol:
            out.append(f"negative eigenvalue {eig_min:.3g}")
        tr = complex(np.trace(self.data))
        if abs(tr - 1) > tol:
            out.append(f"trace {tr.real:.15g} != 1")
        return out

    def is_valid(self, tol: float = 1e-12) -> bool:
        return not self.problems(tol)


def _as_matrix(rho) -> np.ndarray:
    return rho.data if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)


def reduced_density_matrix(universe: UniverseState) -> DensityMatrix:
    """``Tr_C |Psi><Psi|``, diagonal because the clock windows are disjoint."""
    return DensityMatrix(np.diag(universe.populations).astype(complex))


def dense_partial_trace(universe: UniverseState) -> DensityMatrix:
    """Brute-force partial trace of the full ``|Psi><Psi|`` (small universes only)."""
    psi = universe.dense()
    d_C, d_S = psi.shape
    vec = psi.reshape(-1)
    full = np.outer(vec, vec.conj()).reshape(d_C, d_S, d_C, d_S)
    return DensityMatrix(np.trace(full, axis1=0, axis2=2))


def grid_relative_states(universe: UniverseState, grid: TimeGrid) -> np.ndarray:
    """``<t_m|Psi>`` for every grid sample, shape ``(d_S, s+1)``."""
    clock = universe.shell.clock
    return fourier_samples(clock, grid, universe.dense().T)


def time_average_density_matrix(universe: UniverseState, grid: TimeGrid,
                                strict: bool = True) -> DensityMatrix:
    """``(1/(s+1)) sum_m <t_m|Psi><Psi|t_m>``, the discrete period average.

    With ``strict=False`` aliased grids are accepted, which is only useful to
    show that the equality with the partial trace then breaks.
    """
    if strict:
        check_anti_aliased(universe.shell.clock, grid)
    phi = grid_relative_states(universe, grid)
    return DensityMatrix(phi @ phi.conj().T / grid.n)


def gibbs_state(system, beta: float) -> DensityMatrix:
    system = as_system(system)
    if not math.isfinite(beta):
        raise ValueError(f"beta must be finite, got {beta}")
    logw = -beta * system.energies
    w = np.exp(logw - logw.max())
    return DensityMatrix(np.diag(w / w.sum()).astype(complex))


def shell_mixed_reduced(shell: EnergyShell) -> DensityMatrix:
    """Reduction of the equiprobable shell state: populations ``|I_j| / N``."""
    if shell.N == 0:
        raise EmptyShellError("empty shell has no equiprobable state")
    return DensityMatrix(np.diag(shell.sizes / shell.N).astype(complex))


def trace_distance(a, b) -> float:
    A, B = _as_matrix(a), _as_matrix(b)
    if A.shape != B.shape:
        raise DimensionMismatchError(f"shape mismatch {A.shape} vs {B.shape}")
    diff = A - B
    diff = 0.5 * (diff + diff.conj().T)
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(diff))))


def fit_beta(energies, populations) -> float:
    """``-slope`` of ``log P_j`` against ``E_j``; NaN if under two usable points."""
    E = np.asarray(energies, dtype=float)
    P = np.asarray(populations, dtype=float)
    keep = P > 0
    if keep.sum() < 2:
        return math.nan
    slope, _ = np.polyfit(E[keep], np.log(P[keep]), 1)
    return float(-slope)


def shell_entropy_beta(shell: EnergyShell) -> float:
    """Window-counting estimate of ``dS/dE`` from the two lowest system windows."""
    system = shell.system
    if shell.is_sharp or system.d_S < 2:
        return math.nan
    E0, E1 = system.levels[0], system.levels[1]
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            params = entropy_and_beta(shell.clock, shell.E - E1, shell.delta, dE=E1 - E0)
    except NoStatesError:
        return math.nan
    return params.beta


@dataclass
class CensusReport:
    seeds: np.ndarray
    dist_gibbs: np.ndarray
    dist_omega: np.ndarray
    beta_fit: np.ndarray
    norm_check: np.ndarray
    mean_populations: np.ndarray
    sizes: np.ndarray
    beta_ref: float
    beta_census: float
    beta_entropy: float
    quantiles: dict = field(default_factory=dict)

    @property
    def n_samples(self) -> int:
        return len(self.seeds)

    @property
    def N(self) -> int:
        return int(self.sizes.sum())

    def stats(self, name: str) -> dict:
        x = getattr(self, name)
        return {"mean": float(np.mean(x)), "max": float(np.max(x)), "std": float(np.std(x))}

    def rows(self):
        for row in zip(self.seeds, self.dist_gibbs, self.dist_omega, self.beta_fit, self.norm_check):
            yield (int(row[0]),) + tuple(float(v) for v in row[1:])

    def summary(self) -> dict:
        return {
            "n_samples": self.n_samples,
            "N": self.N,
            "sizes": self.sizes.tolist(),
            "dist_gibbs": self.stats("dist_gibbs"),
            "dist_omega": self.stats("dist_omega"),
            "mean_dist_gibbs": float(np.mean(self.dist_gibbs)),
            "mean_dist_omega": float(np.mean(self.dist_omega)),
            "quantiles_dist_omega": self.quantiles,
            "mean_populations": self.mean_populations.tolist(),
            "beta_ref": self.beta_ref,
            "beta_census": self.beta_census,
            "beta_entropy": self.beta_entropy,
        }


def typicality_census(shell: EnergyShell, system: SystemSpectrum | None = None, n: int = 100,
                      seed0: int = 0, beta_ref: float | None = None) -> CensusReport:
    """Sample ``n`` universes and compare their reduced states with the targets.

    ``beta_ref`` defaults to the window-counting estimate of the shell.  Both
    beta routes (window counting and a log-linear fit of the census-mean
    populations) are recorded in the report.
    """
    if system is not None and as_system(system) != shell.system:
        raise DimensionMismatchError("system spectrum differs from the shell's")
    if n < 1:
        raise ValueError("census needs n >= 1")
    system = shell.system
    beta_entropy = shell_entropy_beta(shell)
    if beta_ref is None:
        beta_ref = beta_entropy if math.isfinite(beta_entropy) else 0.0
    gibbs = gibbs_state(system, beta_ref)
    omega = shell_mixed_reduced(shell)

    seeds = np.arange(seed0, seed0 + n)
    dg, do, bf, nc, pops = [], [], [], [], []
    for seed in seeds:
        rho = reduced_density_matrix(sample_universe(shell, int(seed)))
        dg.append(trace_distance(rho, gibbs))
        do.append(trace_distance(rho, omega))
        bf.append(fit_beta(system.energies, rho.populations))
        nc.append(float(np.trace(rho.data).real))
        pops.append(rho.populations)
    do = np.array(do)
    mean_pops = np.mean(pops, axis=0)
    return CensusReport(
        seeds=seeds,
        dist_gibbs=np.array(dg),
        dist_omega=do,
        beta_fit=np.array(bf),
        norm_check=np.array(nc),
        mean_populations=mean_pops,
        sizes=shell.sizes,
        beta_ref=float(beta_ref),
        beta_census=fit_beta(system.energies, mean_pops),
        beta_entropy=float(beta_entropy),
        quantiles={str(q): float(np.quantile(do, q)) for q in (0.5, 0.9, 0.99)},
    )
