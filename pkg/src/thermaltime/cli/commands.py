"""Subcommand bodies.  Each returns tables, a JSON summary and invariant checks."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from thermaltime.acceptance import run_all
from thermaltime.cli.config import RunConfig, build_clock
from thermaltime.cli.cosmo import cosmo_bound
from thermaltime.dynamics import (
    nonlocal_residual,
    norm_curve,
    relative_state,
    schrodinger_fidelity,
)
from thermaltime.gppt import (
    born_probability,
    collapse_then_evolve,
    energy_basis_effects,
    fourier_basis_effects,
    single_time_probability,
    two_time_probability,
)
from thermaltime.spectra import SystemSpectrum
from thermaltime.thermo import reduced_density_matrix, typicality_census
from thermaltime.timegrid import TimeGrid, identity_residual
from thermaltime.toymodel import (
    OscillatorConfig,
    oscillator_universe,
    position_alpha_form,
    position_expectation,
    position_first_order,
    position_matrix_element,
    position_period_average,
    sharp_oscillator_universe,
    toy_time_average,
)
from thermaltime.universe import sample_universe, sharp_universe, support_sets


class ConfigError(ValueError):
    """Missing or inconsistent configuration for the requested subcommand."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass
class Check:
    name: str
    passed: bool
    detail: str


@dataclass
class RunOutput:
    tables: dict = field(default_factory=dict)     # file name -> (header, rows)
    summary: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    clock_digest: str | None = None
    message: str = ""


def _clock(cfg: RunConfig):
    if cfg.clock is None:
        raise ConfigError("clock", "this subcommand needs a clock")
    return build_clock(cfg.clock)


def _amplitudes(cfg: RunConfig):
    return [complex(re, im) for re, im in cfg.shell.amplitudes]


def _universe(cfg: RunConfig, clock, system=None):
    if cfg.shell is None:
        raise ConfigError("shell", "this subcommand needs a shell (E, delta)")
    system = SystemSpectrum(cfg.system) if system is None else system
    if cfg.shell.delta == 0:
        return sharp_universe(clock, system, cfg.shell.E, _amplitudes(cfg))
    return sample_universe(support_sets(clock, system, cfg.shell.E, cfg.shell.delta), cfg.seed)


def identity_check(cfg: RunConfig) -> RunOutput:
    clock = _clock(cfg)
    grid = TimeGrid.for_clock(clock, s=cfg.grid.s, t0=cfg.grid.t0)
    res = identity_residual(clock, grid)
    aliased = not grid.is_anti_aliased(clock)
    out = RunOutput(clock_digest=clock.digest())
    out.tables["identity.csv"] = (("s_plus_1", "r_p", "anti_aliased", "residual"),
                                  [(grid.n, clock.r_p, not aliased, res)])
    out.summary = {"s_plus_1": grid.n, "r_p": clock.r_p, "d_C": clock.d_C, "residual": res}
    detail = f"residual {res:.3e}"
    if aliased:
        out.checks.append(Check("frame identity", False,
                                f"{detail}; grid aliased (s+1 = {grid.n} < r_p+1 = {clock.r_p + 1})"))
    else:
        out.checks.append(Check("frame identity", res <= 1e-12, f"{detail} (<= 1e-12)"))
    out.message = f"identity residual {res:.3e} with s+1 = {grid.n}"
    return out


def typicality(cfg: RunConfig) -> RunOutput:
    clock = _clock(cfg)
    if cfg.shell is None or cfg.shell.delta == 0:
        raise ConfigError("shell", "typicality needs a shell with delta > 0")
    shell = support_sets(clock, cfg.system, cfg.shell.E, cfg.shell.delta)
    rep = typicality_census(shell, n=cfg.typicality.n, seed0=cfg.seed, beta_ref=cfg.typicality.beta_ref)
    out = RunOutput(clock_digest=clock.digest())
    out.tables["census.csv"] = (("seed", "dist_gibbs", "dist_omega", "beta_fit", "norm_check"), list(rep.rows()))
    out.summary = rep.summary()
    trace_err = float(np.max(np.abs(rep.norm_check - 1.0)))
    out.checks.append(Check("unit trace", trace_err <= 1e-12, f"max |tr rho - 1| = {trace_err:.2e}"))
    out.message = (f"mean_dist_omega {out.summary['mean_dist_omega']:.4f}, "
                   f"beta_census {rep.beta_census:.4f}, N = {rep.N}")
    return out


def dynamics(cfg: RunConfig) -> RunOutput:
    clock = _clock(cfg)
    u = _universe(cfg, clock)
    t0 = cfg.dynamics.t0
    times = np.asarray(cfg.dynamics.times, dtype=float)
    grid = TimeGrid.for_clock(clock, s=cfg.grid.s, t0=cfg.grid.t0)
    n_closed = np.array([relative_state(u, t).norm2 for t in times])
    n_sum = norm_curve(u, times)
    N0 = relative_state(u, t0).norm2
    fid = np.array([schrodinger_fidelity(u, t0, t) for t in times])
    resid = np.array([nonlocal_residual(u, t, grid) for t in times])
    out = RunOutput(clock_digest=clock.digest())
    out.tables["dynamics.csv"] = (("t", "norm2", "norm2_double_sum", "fidelity", "nonlocal_residual"),
                                  list(zip(times, n_closed, n_sum, fid, resid)))
    delta = u.shell.delta
    x = delta * np.abs(times - t0)
    near = x <= 0.1
    drift = np.abs(n_closed - N0)
    routes = float(np.max(np.abs(n_closed - n_sum)))
    out.checks.append(Check("norm routes agree", routes <= 1e-10, f"max difference {routes:.2e}"))
    out.checks.append(Check("non-local residual", float(resid.max()) <= 1e-10,
                            f"max residual {float(resid.max()):.2e}"))
    if u.shell.is_sharp:
        dev = float(np.max(np.abs(n_closed - 1.0)))
        out.checks.append(Check("sharp norm conservation", dev <= 1e-12, f"max |N - 1| = {dev:.2e}"))
    elif near.any():
        ratio = float(np.max(drift[near] / np.maximum(2 * x[near], 1e-300)))
        ok = bool(np.all(drift[near] <= 2 * x[near] + 1e-12))
        out.checks.append(Check("norm drift bound", ok, f"max drift / (2 delta |t - t0|) = {ratio:.3f}"))
    out.summary = {"N_t0": N0, "min_fidelity": float(fid.min()), "max_residual": float(resid.max()),
                   "sizes": u.shell.sizes.tolist(), "delta": delta}
    out.message = f"min fidelity {float(fid.min()):.6f}, max residual {float(resid.max()):.2e}"
    return out


def toy(cfg: RunConfig) -> RunOutput:
    clock = _clock(cfg)
    osc = OscillatorConfig(cfg.toy.m, cfg.toy.omega)
    if not cfg.toy.snap and not osc.on_grid(clock):
        warnings.warn("omega is off the clock grid; proceeding unsnapped", stacklevel=2)
    if cfg.toy.snap:
        osc = osc if osc.on_grid(clock) else osc.snapped(clock)
    if cfg.shell is None:
        raise ConfigError("shell", "toy needs a shell (E, delta)")
    if cfg.shell.delta == 0:
        u = sharp_oscillator_universe(clock, osc, cfg.shell.E, _amplitudes(cfg), snap=cfg.toy.snap)
    else:
        u = oscillator_universe(clock, osc, cfg.shell.E, cfg.shell.delta, cfg.seed, snap=cfg.toy.snap)
    rows, agree = [], 0.0
    for t in cfg.toy.times:
        vals = (position_expectation(u, osc, t), position_alpha_form(u, osc, t), position_matrix_element(u, osc, t))
        agree = max(agree, max(vals) - min(vals))
        rows.append((t, *vals, position_first_order(u, osc, t), relative_state(u, t).norm2))
    grid = TimeGrid.for_clock(clock, s=cfg.grid.s, t0=cfg.grid.t0)
    avg = position_period_average(u, osc, grid)
    rho = toy_time_average(u, grid)
    out = RunOutput(clock_digest=clock.digest())
    out.tables["toy.csv"] = (("t", "X_exact", "X_alpha", "X_matrix", "X_first_order", "norm2"), rows)
    pops = rho.populations
    out.summary = {"omega": osc.omega, "period_average": avg, "populations": pops.tolist(),
                   "population_ratio": float(pops[1] / pops[0]) if pops[0] > 0 else math.nan,
                   "sizes": u.shell.sizes.tolist()}
    out.checks.append(Check("three evaluations agree", agree <= 1e-12, f"max spread {agree:.2e}"))
    out.checks.append(Check("period average vanishes", abs(avg) <= 1e-10 * osc.x_amplitude,
                            f"|<X>| averaged = {abs(avg):.2e}"))
    out.message = f"period average {avg:.2e}, population ratio {out.summary['population_ratio']:.4f}"
    return out


def gppt(cfg: RunConfig) -> RunOutput:
    clock = _clock(cfg)
    u = _universe(cfg, clock)
    basis = (energy_basis_effects if cfg.gppt.basis == "energy" else fourier_basis_effects)(u.d_S)
    steps = cfg.gppt.theta_steps
    out = RunOutput(clock_digest=clock.digest())
    single, sum_err, born_err = [], 0.0, 0.0
    for t in cfg.gppt.times:
        probs = [single_time_probability(u, e, t, steps) for e in basis]
        born = [born_probability(u, e.projector, t) for e in basis]
        single.extend((t, e.label, p, b) for e, p, b in zip(basis, probs, born))
        sum_err = max(sum_err, abs(sum(probs) - 1.0))
        born_err = max(born_err, max(abs(p - b) for p, b in zip(probs, born)))
    out.tables["single_time.csv"] = (("t", "a", "probability", "born"), single)
    out.checks.append(Check("single-time normalization", sum_err <= 1e-12, f"max |sum - 1| = {sum_err:.2e}"))
    if u.shell.is_sharp:
        out.checks.append(Check("Born oracle", born_err <= 1e-10, f"max difference {born_err:.2e}"))

    two, oracle_err, cond_err = [], 0.0, 0.0
    for t_i, t_f in cfg.gppt.pairs:
        for ei in basis:
            if born_probability(u, ei.projector, t_i) < 1e-12:
                continue
            probs = []
            for ef in basis:
                p = two_time_probability(u, (ei, t_i), (ef, t_f), steps)
                q = collapse_then_evolve(u, ei.projector, t_i, ef.projector, t_f)
                probs.append(p)
                oracle_err = max(oracle_err, abs(p - q))
                two.append((t_i, ei.label, t_f, ef.label, p, q))
            cond_err = max(cond_err, abs(sum(probs) - 1.0))
    if cfg.gppt.pairs:
        out.tables["two_time.csv"] = (("t_i", "a_i", "t_f", "a_f", "probability", "oracle"), two)
        out.checks.append(Check("two-time normalization", cond_err <= 1e-9, f"max |sum - 1| = {cond_err:.2e}"))
        if u.shell.is_sharp and clock.is_harmonic():
            out.checks.append(Check("collapse oracle", oracle_err <= 1e-9, f"max difference {oracle_err:.2e}"))
    out.summary = {"basis": cfg.gppt.basis, "max_born_diff": born_err, "max_oracle_diff": oracle_err,
                   "sharp": u.shell.is_sharp, "harmonic": clock.is_harmonic()}
    out.message = f"{len(single)} single-time and {len(two)} two-time probabilities"
    return out


def cosmo(cfg: RunConfig) -> RunOutput:
    T = cfg.cosmo.T
    value = cosmo_bound(T)
    out = RunOutput()
    out.tables["cosmo.csv"] = (("T_s", "bound_J"), [(T, value)])
    out.summary = {"T_s": T, "bound_J": value}
    out.message = f"2*pi*hbar/T = {value:.4e} J for T = {T:.4e} s"
    return out


def acceptance(cfg: RunConfig, numbers=None) -> RunOutput:
    results = run_all(numbers)
    out = RunOutput()
    out.tables["acceptance.csv"] = (("criterion", "title", "passed", "seconds", "detail"),
                                    [(r.number, r.title, r.passed, r.seconds, r.detail) for r in results])
    out.summary = {str(r.number): {"title": r.title, "passed": r.passed, "metrics": r.metrics} for r in results}
    out.checks = [Check(f"criterion {r.number} ({r.title})", r.passed, r.detail) for r in results]
    out.message = "\n".join(r.line() for r in results)
    return out


COMMANDS = {
    "identity-check": identity_check,
    "typicality": typicality,
    "dynamics": dynamics,
    "toy": toy,
    "gppt": gppt,
    "cosmo": cosmo,
    "acceptance": acceptance,
}
