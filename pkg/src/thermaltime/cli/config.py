"""Run configuration: a JSON document validated field by field."""

from __future__ import annotations

import json
from typing import Annotated, Literal, Union

from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, model_validator

from thermaltime.spectra import (
    ClockSpectrum,
    build_exponential_clock,
    harmonic_clock,
    quantize_rational_spectrum,
)


class _Model(BaseModel):
    model_config = ConfigDict(extra="forbid")


class RationalClock(_Model):
    kind: Literal["rational"]
    ratios: list[tuple[int, int]] = Field(min_length=1)
    E1: PositiveFloat


class ExponentialClock(_Model):
    kind: Literal["exponential"]
    beta: PositiveFloat
    nu0: PositiveFloat
    p: int = Field(ge=1)
    T: PositiveFloat


class ExplicitClock(_Model):
    kind: Literal["explicit"]
    r: list[int] = Field(min_length=1)
    T: PositiveFloat = 2 * 3.141592653589793


class HarmonicClock(_Model):
    kind: Literal["harmonic"]
    p: int = Field(ge=0)
    omega: PositiveFloat = 1.0


ClockConfig = Annotated[
    Union[RationalClock, ExponentialClock, ExplicitClock, HarmonicClock],
    Field(discriminator="kind"),
]


class ShellConfig(_Model):
    """``delta = 0`` asks for a sharp universe built from ``amplitudes``."""

    E: float
    delta: float = Field(ge=0)
    amplitudes: list[tuple[float, float]] | None = None

    @model_validator(mode="after")
    def _sharp_needs_amplitudes(self):
        if self.delta == 0 and not self.amplitudes:
            raise ValueError("a sharp shell (delta = 0) needs amplitudes as [re, im] pairs")
        return self


class GridConfig(_Model):
    t0: float = 0.0
    s: int | None = Field(default=None, ge=0)


class TypicalityConfig(_Model):
    n: int = Field(default=100, ge=1)
    beta_ref: float | None = None


class DynamicsConfig(_Model):
    t0: float = 0.0
    times: list[float] = Field(default_factory=lambda: [0.0, 0.1, 0.2, 0.5, 1.0])


class ToyConfig(_Model):
    m: PositiveFloat = 1.0
    omega: PositiveFloat = 1.0
    snap: bool = True
    times: list[float] = Field(default_factory=lambda: [0.0, 0.1, 0.2, 0.5, 1.0])


class GpptConfig(_Model):
    basis: Literal["energy", "fourier"] = "energy"
    times: list[float] = Field(default_factory=lambda: [0.0])
    pairs: list[tuple[float, float]] = Field(default_factory=list)
    theta_steps: int | None = Field(default=None, ge=1)


class CosmoConfig(_Model):
    T: PositiveFloat = 4.35e17


class RunConfig(_Model):
    clock: ClockConfig | None = None
    system: list[float] = Field(default_factory=lambda: [0.0, 1.0], min_length=1)
    shell: ShellConfig | None = None
    grid: GridConfig = Field(default_factory=GridConfig)
    seed: int = Field(default=0, ge=0)
    typicality: TypicalityConfig = Field(default_factory=TypicalityConfig)
    dynamics: DynamicsConfig = Field(default_factory=DynamicsConfig)
    toy: ToyConfig = Field(default_factory=ToyConfig)
    gppt: GpptConfig = Field(default_factory=GpptConfig)
    cosmo: CosmoConfig = Field(default_factory=CosmoConfig)
    out: str = "out"

    def canonical_json(self) -> str:
        return json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))


def build_clock(cfg) -> ClockSpectrum:
    if isinstance(cfg, RationalClock):
        return quantize_rational_spectrum(cfg.ratios, cfg.E1)
    if isinstance(cfg, ExponentialClock):
        return build_exponential_clock(cfg.beta, cfg.nu0, cfg.p, cfg.T)
    if isinstance(cfg, HarmonicClock):
        return harmonic_clock(cfg.p, cfg.omega)
    return ClockSpectrum(cfg.r, cfg.T)


def set_path(data: dict, dotted: str, value) -> None:
    """Assign ``value`` at ``a.b.c`` inside nested dicts, creating levels as needed."""
    keys = dotted.split(".")
    node = data
    for k in keys[:-1]:
        if not isinstance(node.get(k), dict):
            node[k] = {}
        node = node[k]
    node[keys[-1]] = value
