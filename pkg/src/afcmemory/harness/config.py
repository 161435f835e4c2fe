"""Experiment configuration: YAML text validated against a strict schema.

Every block has defaults at the memory's measured operating point, so an
empty file plus an experiment name is a complete configuration.  Unknown
keys are rejected.
"""

from __future__ import annotations

import hashlib
import json
from typing import Literal, Optional

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

EXPERIMENTS = (
    "fig2a_histograms",
    "fig2b_snr_scaling",
    "fig2c_decay",
    "fig3b_fringes",
    "fig4_fidelity",
    "tableS1",
    "figS_filter_sweep",
    "figS_noise_vs_ts",
    "comb_preparation",
    "efficiency_report",
)

ExperimentName = Literal[
    "fig2a_histograms",
    "fig2b_snr_scaling",
    "fig2c_decay",
    "fig3b_fringes",
    "fig4_fidelity",
    "tableS1",
    "figS_filter_sweep",
    "figS_noise_vs_ts",
    "comb_preparation",
    "efficiency_report",
]

REQUIRED_BLOCKS: dict[str, tuple[str, ...]] = {
    "fig2a_histograms": ("comb", "spin", "transfer", "memory", "detection", "filter", "noise"),
    "fig2b_snr_scaling": ("comb", "spin", "transfer", "memory", "detection", "filter", "noise"),
    "fig2c_decay": ("comb", "spin", "transfer", "memory", "detection", "filter", "noise"),
    "fig3b_fringes": ("spin", "transfer", "memory", "detection", "qubit"),
    "fig4_fidelity": ("qubit", "benchmark"),
    "tableS1": ("qubit", "benchmark"),
    "figS_filter_sweep": ("spin", "transfer", "memory", "detection", "filter", "noise"),
    "figS_noise_vs_ts": ("detection", "filter", "noise"),
    "comb_preparation": ("comb", "pumping"),
    "efficiency_report": ("comb", "spin", "transfer", "memory"),
}


class ConfigError(ValueError):
    pass


class _Block(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class CombBlock(_Block):
    delta: float = Field(0.2, gt=0, description="tooth period, MHz")
    bandwidth: float = Field(3.6, gt=0, description="comb width, MHz")
    tooth_shape: Literal["gaussian", "square"] = "gaussian"
    d: float = Field(4.5, ge=0)
    d0: float = Field(0.75, ge=0)
    finesse: float = 4.7
    input_fwhm: float = Field(0.43, gt=0, description="input pulse intensity FWHM, us")
    window_width: float = Field(0.7, gt=0, description="echo detection window, us")

    @field_validator("finesse")
    @classmethod
    def _finesse(cls, v):
        if not v > 1:
            raise ValueError("finesse must exceed 1")
        return v


class SpinBlock(_Block):
    gamma_in: float = Field(26.0, gt=0, description="spin inhomogeneous FWHM, kHz")
    ts: float = Field(7.8, ge=0, description="spin storage time, us")
    ts_list: list[float] = Field(default_factory=lambda: [5.0, 7.8, 10.0, 12.5, 15.0, 18.8, 22.0, 25.0])


class TransferBlock(_Block):
    eta_t: Optional[float] = Field(0.817, gt=0, le=1, description="single-pass transfer efficiency; null runs the Bloch solver")
    fwhm: float = Field(0.7, gt=0)
    chirp_span: float = Field(5.0, ge=0)
    peak_rabi: Optional[float] = Field(None, ge=0, description="MHz; null calibrates to eta_t_target")
    eta_t_target: float = Field(0.817, gt=0, lt=1)
    detuning_spread: float = Field(3.5, ge=0)


class MemoryBlock(_Block):
    eta_afc: Optional[float] = Field(0.056, ge=0, le=1, description="measured echo efficiency; null uses the analytic value")


class DetectionBlock(_Block):
    path_transmission: float = Field(0.13, ge=0, le=1)
    fiber_coupling: float = Field(0.60, ge=0, le=1)
    detector_efficiency: float = Field(0.60, ge=0, le=1)
    dark_rate: float = Field(10.0, ge=0, description="Hz")
    gate_window: float = Field(0.7, gt=0, description="us")
    spatial_extinction: float = Field(1e-5, ge=0, le=1)
    grating_attenuation: float = Field(1.0, ge=0, le=1)


class FilterBlock(_Block):
    mode: Literal["hole", "pit", "bypass"] = "hole"
    hole_width: float = Field(2.0, gt=0)
    control_extinction: float = Field(750.0, ge=1)
    signal_pass_loss: float = Field(0.1, ge=0, lt=1)
    filter_depth: float = Field(7.0, ge=0)
    sweep_widths: list[float] = Field(default_factory=lambda: [0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0, 10.0, 12.0, 16.0, 20.0, 24.0])


class AnchorBlock(_Block):
    mode: Literal["hole", "pit", "bypass"]
    hole_width: float = Field(2.0, gt=0)
    p_N: float = Field(ge=0)
    sigma: float = Field(gt=0)


def _default_anchors():
    return [
        AnchorBlock(mode="hole", hole_width=2.0, p_N=2.0e-3, sigma=0.3e-3),
        AnchorBlock(mode="pit", p_N=2.3e-2, sigma=0.6e-2),
        AnchorBlock(mode="bypass", p_N=0.23, sigma=0.01),
    ]


class NoiseBlock(_Block):
    anchors: list[AnchorBlock] = Field(default_factory=_default_anchors)
    mu_in: list[float] = Field(default_factory=lambda: [0.1, 0.25, 0.5, 0.75, 1.15, 1.5, 2.0, 3.0])
    operating_mu_in: float = Field(1.15, ge=0)
    echo_time: float = Field(12.8, gt=0, description="storage time 1/Delta + T_S, us")


class QubitBlock(_Block):
    mu1p: float = Field(0.11, gt=0)
    mu1p_sigma: float = Field(0.01, ge=0)
    alpha: float = Field(2.5, ge=1)
    alpha_sigma: float = Field(0.6, ge=0)
    pulse_fwhm: float = Field(0.26, gt=0)
    bin_separation: float = Field(1.0, gt=0)
    mu_q_list: list[float] = Field(default_factory=lambda: [5.9, 3.2, 1.5, 1.1, 0.6])
    fringe_mu_q: float = Field(5.9, ge=0)
    phases_deg: list[float] = Field(default_factory=lambda: [0.0, 45.0, 90.0, 135.0, 180.0, 225.0, 270.0, 315.0])


class BenchmarkBlock(_Block):
    eta: float = Field(0.022, gt=0, le=1)
    convention: Literal["eta", "click"] = "eta"
    mu_min: float = Field(0.05, gt=0)
    mu_max: float = Field(10.0, gt=0)
    n_points: int = Field(60, ge=2)


class PumpingBlock(_Block):
    bulk_depth: float = Field(7.0, gt=0)
    window: float = Field(20.0, gt=0)
    spacing: float = Field(0.005, gt=0, le=0.01)
    comb_repeats: int = Field(20, ge=1)
    comb_strength: float = Field(1.0, ge=0)
    comb_linewidth: float = Field(0.075, gt=0)
    pit_strength: float = Field(200.0, ge=0)
    rounds_per_ms: float = Field(4.0, gt=0)


class MetadataBlock(_Block):
    cycle_period_ms: float = 700.0
    repetition_rate_khz: float = 7.0
    note: str = ""


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    experiment: ExperimentName
    seed: int = Field(0, ge=0, lt=2**64)
    trials: int = Field(700_000, ge=0)
    output_dir: str = "results"
    format: Literal["csv", "json"] = "csv"
    comb: Optional[CombBlock] = Field(default_factory=CombBlock)
    spin: Optional[SpinBlock] = Field(default_factory=SpinBlock)
    transfer: Optional[TransferBlock] = Field(default_factory=TransferBlock)
    memory: Optional[MemoryBlock] = Field(default_factory=MemoryBlock)
    detection: Optional[DetectionBlock] = Field(default_factory=DetectionBlock)
    filter: Optional[FilterBlock] = Field(default_factory=FilterBlock)
    noise: Optional[NoiseBlock] = Field(default_factory=NoiseBlock)
    qubit: Optional[QubitBlock] = Field(default_factory=QubitBlock)
    benchmark: Optional[BenchmarkBlock] = Field(default_factory=BenchmarkBlock)
    pumping: Optional[PumpingBlock] = Field(default_factory=PumpingBlock)
    metadata: MetadataBlock = Field(default_factory=MetadataBlock)

    @model_validator(mode="after")
    def _required_blocks(self):
        missing = [b for b in REQUIRED_BLOCKS[self.experiment] if getattr(self, b) is None]
        if missing:
            raise ValueError(f"experiment {self.experiment} requires block(s) {', '.join(missing)}")
        return self


def _format_validation(err: ValidationError) -> str:
    lines = []
    for e in err.errors():
        loc = ".".join(str(p) for p in e["loc"]) or "<root>"
        msg = e["msg"]
        if msg.startswith("Value error, "):
            msg = msg[len("Value error, ") :]
        lines.append(f"{loc}: {msg}")
    return "; ".join(lines)


def validate_config(raw: str | dict | None = None, **overrides) -> ExperimentConfig:
    """Parse and validate YAML text (or an already-parsed mapping).

    Keyword overrides are applied on top of the file, e.g. ``experiment=``,
    ``seed=``.  Errors raise :class:`ConfigError` naming the offending field
    or, for malformed text, the line and column.
    """
    if raw is None or isinstance(raw, dict):
        data = dict(raw or {})
    else:
        try:
            data = yaml.safe_load(raw)
        except yaml.MarkedYAMLError as exc:
            mark = exc.problem_mark
            where = f"line {mark.line + 1}, column {mark.column + 1}" if mark else "unknown position"
            raise ConfigError(f"parse error at {where}: {exc.problem}") from None
        except yaml.YAMLError as exc:
            raise ConfigError(f"parse error: {exc}") from None
        if data is None:
            data = {}
        if not isinstance(data, dict):
            raise ConfigError("parse error: top level must be a mapping")
    data.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(_format_validation(exc)) from None


def config_dict(cfg: ExperimentConfig) -> dict:
    return cfg.model_dump(mode="json")


def serialize(cfg: ExperimentConfig) -> str:
    """Canonical YAML: sorted keys, every default written out."""
    return yaml.safe_dump(config_dict(cfg), sort_keys=True, default_flow_style=False)


def config_hash(cfg: ExperimentConfig) -> str:
    """First 12 hex digits of the SHA-256 of the canonical form, output location excluded."""
    d = config_dict(cfg)
    d.pop("output_dir", None)
    d.pop("format", None)
    blob = json.dumps(d, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()[:12]
