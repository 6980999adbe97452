"""Experiment configuration: a flat key=value format, seed derivation and
builders that assemble the pipeline pieces from one config.

The file format is one `key = value` pair per line with `#` comments;
unknown keys are rejected so stale configs fail loudly. Every command's
randomness funnels through the single `seed` field, with sub-streams
derived by hashing (seed, purpose label).
"""

from __future__ import annotations

import dataclasses
import hashlib
from dataclasses import dataclass

import numpy as np

from .forward import ForwardModel, NoiseSpec, SamplingMask, make_equispaced_mask, make_poisson_disc_mask
from .phantom import PhantomSpec, make_phantom, make_synth_coils
from .priors import NoiseSchedule, ScorePrior, gaussian_blur
from .sampler import METHODS, SamplerConfig
from .sure import EarlyStopConfig, SureConfig, TttConfig

MASK_KINDS = ("equispaced", "poisson")
PRIOR_MEANS = ("zero", "truth", "smoothed_truth")


class ConfigError(ValueError):
    """Invalid experiment configuration."""


def derive_seed(seed: int, label: str) -> int:
    """Stable 63-bit sub-seed from (seed, purpose label)."""
    digest = hashlib.sha256(f"{seed}:{label}".encode()).digest()
    return int.from_bytes(digest[:8], "little") >> 1


@dataclass
class ExperimentConfig:
    # data
    phantom: str = "shepp_logan"
    size: int = 64
    phase: str = "none"
    coils: int = 4
    mask: str = "equispaced"
    accel: float = 4.0
    acs_fraction: float = -1.0  # auto: 0.08 when accel < 6, else 0.04
    calib: int = 16
    sigma: float = 0.0
    # prior
    prior: str = "gaussian"
    prior_mean: str = "truth"
    mean_blur: float = 2.0
    tau2: float = 1e-5
    gamma: float = 1.0
    levels: int = 30
    steps_per_level: int = 10
    beta_min: float = 0.003
    beta_max: float = 1.0
    eps0: float = 1.8e-6
    # sampler / controller
    method: str = "smrd"
    cg_iters: int = 5
    lambda0: float = 2.0
    alpha: float = 0.2
    freeze_fraction: float = 0.43
    window: int = 0  # 0 = auto (0.14 * steps)
    probes: int = 1
    eps_rel: float = 1e-3
    dc_weight: float = 1.0
    # run
    seed: int = 0
    out: str = "out"

    @property
    def steps(self) -> int:
        return self.levels * self.steps_per_level

    def validate(self) -> "ExperimentConfig":
        if self.phantom not in ("shepp_logan", "blob_grid"):
            raise ConfigError(f"unknown phantom {self.phantom!r}")
        if self.phase not in ("none", "smooth"):
            raise ConfigError(f"unknown phase {self.phase!r}")
        if self.mask not in MASK_KINDS:
            raise ConfigError(f"unknown mask kind {self.mask!r}")
        if self.prior not in ("gaussian", "smoothness", "zero"):
            raise ConfigError(f"unknown prior {self.prior!r}")
        if self.prior_mean not in PRIOR_MEANS:
            raise ConfigError(f"unknown prior_mean {self.prior_mean!r}")
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}")
        if self.size < 16:
            raise ConfigError(f"size must be >= 16, got {self.size}")
        if self.coils < 1:
            raise ConfigError("coils must be >= 1")
        if self.accel < 1:
            raise ConfigError("accel must be >= 1")
        if self.sigma < 0:
            raise ConfigError("sigma must be >= 0")
        if self.levels < 1 or self.steps_per_level < 1:
            raise ConfigError("levels and steps_per_level must be positive")
        if self.window < 0:
            raise ConfigError("window must be >= 0 (0 = auto)")
        return self

    def resolved_acs_fraction(self) -> float:
        if self.acs_fraction >= 0:
            return self.acs_fraction
        return 0.08 if self.accel < 6 else 0.04

    def replace(self, **overrides) -> "ExperimentConfig":
        return dataclasses.replace(self, **overrides)

    def to_text(self) -> str:
        lines = []
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            text = repr(value) if isinstance(value, float) else str(value)
            lines.append(f"{f.name} = {text}")
        return "\n".join(lines) + "\n"

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_text())


def _convert(name: str, kind: type, raw: str):
    try:
        if kind is bool:
            return raw.strip().lower() in ("1", "true", "yes")
        return kind(raw.strip())
    except ValueError as exc:
        raise ConfigError(f"bad value for {name}: {raw!r}") from exc


def parse_config_text(text: str, base: ExperimentConfig | None = None) -> ExperimentConfig:
    cfg = base or ExperimentConfig()
    types = {f.name: type(getattr(cfg, f.name)) for f in dataclasses.fields(cfg)}
    updates = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected key = value, got {line!r}")
        key, raw = stripped.split("=", 1)
        key = key.strip()
        if key not in types:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        updates[key] = _convert(key, types[key], raw)
    return cfg.replace(**updates).validate()


def load_config(path, base: ExperimentConfig | None = None) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read(), base)


# pipeline assembly -----------------------------------------------------------

def build_phantom(cfg: ExperimentConfig) -> np.ndarray:
    spec = PhantomSpec(kind=cfg.phantom, size=cfg.size, phase=cfg.phase)
    return make_phantom(spec, seed=derive_seed(cfg.seed, "phantom"))


def build_mask(cfg: ExperimentConfig) -> SamplingMask:
    seed = derive_seed(cfg.seed, "mask")
    if cfg.mask == "equispaced":
        return make_equispaced_mask(
            cfg.size, cfg.size, cfg.accel, cfg.resolved_acs_fraction(), seed
        )
    return make_poisson_disc_mask(cfg.size, cfg.size, cfg.accel, cfg.calib, seed)


def build_forward_model(cfg: ExperimentConfig) -> ForwardModel:
    sens = make_synth_coils(cfg.size, cfg.size, cfg.coils, derive_seed(cfg.seed, "coils"))
    return ForwardModel(sens=sens, mask=build_mask(cfg))


def build_noise_spec(cfg: ExperimentConfig) -> NoiseSpec:
    return NoiseSpec(sigma=cfg.sigma, seed=derive_seed(cfg.seed, "noise"))


def build_prior(cfg: ExperimentConfig, truth: np.ndarray | None) -> ScorePrior:
    schedule = NoiseSchedule(
        levels=cfg.levels,
        beta_max=cfg.beta_max,
        beta_min=cfg.beta_min,
        steps_per_level=cfg.steps_per_level,
        eps0=cfg.eps0,
    )
    mean = None
    if cfg.prior == "gaussian" and cfg.prior_mean != "zero":
        if truth is None:
            raise ConfigError(f"prior_mean={cfg.prior_mean!r} needs the ground-truth image")
        mean = truth if cfg.prior_mean == "truth" else gaussian_blur(truth, cfg.mean_blur)
    return ScorePrior(
        kind=cfg.prior, schedule=schedule, mean=mean, tau2=cfg.tau2, gamma=cfg.gamma
    )


def build_sampler_config(cfg: ExperimentConfig, method: str | None = None) -> SamplerConfig:
    chosen = method or cfg.method
    return SamplerConfig(
        method=chosen,
        cg_iters=cfg.cg_iters,
        dc_weight=cfg.dc_weight,
        seed=derive_seed(cfg.seed, f"recon:{chosen}"),
    )


def build_controller_configs(
    cfg: ExperimentConfig, lambda0: float | None = None
) -> tuple[TttConfig, EarlyStopConfig, SureConfig]:
    ttt = TttConfig(
        lambda0=cfg.lambda0 if lambda0 is None else lambda0,
        alpha=cfg.alpha,
        freeze_fraction=cfg.freeze_fraction,
    )
    es = EarlyStopConfig(window=cfg.window if cfg.window > 0 else None)
    sure_cfg = SureConfig(eps_rel=cfg.eps_rel, probes=cfg.probes)
    return ttt, es, sure_cfg
