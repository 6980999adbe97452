"""Monte-Carlo SURE estimation, risk-gradient tuning of the regularization
weight, and moving-average early stopping.

The running loss is the variance-free form

    SURE(t) = ||h(x_t, lam) - x_zf||^2 / (N * eps)
              * Re<mu, h(x_t + eps*mu, lam) - h(x_t, lam)>

with one (configurable) standard complex normal probe mu per step
(E|mu_i|^2 = 1, so the probe term is an unbiased estimate of Re tr of the
update's Jacobian). `h` must be deterministic for the duration of a call:
the caller freezes the Langevin noise so both evaluations walk the same
path and the difference isolates the probe.

`sure_known_sigma` is the known-variance form kept for unbiasedness
oracles; it is not used by the sampling loop. Its conventions: sigma^2 is
the per-entry complex noise variance (E|z_i|^2) and `divergence` is the
Jacobian trace over real and imaginary coordinates (identity map -> 2N).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .fourier import norm2

LAMBDA_MIN = 1e-4
LAMBDA_MAX = 1e4

UpdateFn = Callable[[np.ndarray, float], np.ndarray]


@dataclass(frozen=True)
class SureConfig:
    """Probe policy for Monte-Carlo SURE."""

    eps_rel: float = 1e-3    # perturbation scale relative to max |x_t|
    eps_floor: float = 1e-8  # absolute floor, keeps eps > 0 on tiny iterates
    probes: int = 1

    def __post_init__(self) -> None:
        if self.eps_rel <= 0 or self.eps_floor <= 0:
            raise ValueError("perturbation scales must be positive")
        if self.probes < 1:
            raise ValueError("probes must be >= 1")


@dataclass(frozen=True)
class TttConfig:
    """Test-time tuning of the regularization weight lambda."""

    lambda0: float = 2.0
    alpha: float = 0.2
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    freeze_fraction: float = 0.43  # no lambda updates from ceil(frac * T) on
    lambda_min: float = LAMBDA_MIN
    lambda_max: float = LAMBDA_MAX

    def __post_init__(self) -> None:
        if self.lambda0 <= 0 or self.alpha <= 0:
            raise ValueError("lambda0 and alpha must be positive")
        if not 0 < self.freeze_fraction <= 1:
            raise ValueError("freeze_fraction must be in (0, 1]")

    def freeze_step(self, total_steps: int) -> int:
        # guard against float dust pushing an exact product past its ceil
        return int(math.ceil(self.freeze_fraction * total_steps - 1e-9))


@dataclass(frozen=True)
class EarlyStopConfig:
    """Moving-average early stopping; window=None scales as ceil(0.14 * T)."""

    window: int | None = None

    def resolve_window(self, total_steps: int) -> int:
        if self.window is not None:
            if self.window < 1:
                raise ValueError("window must be positive")
            return self.window
        return int(math.ceil(0.14 * total_steps - 1e-9))


@dataclass
class TttState:
    """Evolving lambda, optimizer moments and SURE bookkeeping for one run."""

    lam: float
    m: float = 0.0
    v: float = 0.0
    steps_taken: int = 0
    sure_history: list[float] = field(default_factory=list)
    stopped: bool = False


def draw_probe(rng: np.random.Generator, shape: tuple[int, ...]) -> np.ndarray:
    """Standard complex normal probe: real/imag each N(0, 1/2), E|mu|^2 = 1."""
    return math.sqrt(0.5) * (
        rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    )


def perturbation_scale(cfg: SureConfig, x: np.ndarray) -> float:
    eps = max(cfg.eps_rel * float(np.max(np.abs(x))), cfg.eps_floor)
    if not np.isfinite(eps) or eps <= 0:
        raise ValueError(f"degenerate perturbation scale {eps}")
    return eps


def mc_sure(
    h: UpdateFn,
    x_t: np.ndarray,
    x_zf: np.ndarray,
    lam: float,
    cfg: SureConfig,
    rng: np.random.Generator,
    h_at_x: np.ndarray | None = None,
) -> float:
    """Monte-Carlo SURE of the update h at (x_t, lam).

    `h_at_x` optionally supplies the already-committed h(x_t, lam) so the
    loss is evaluated on exactly the update that was applied.
    """
    eps = perturbation_scale(cfg, x_t)
    h0 = h(x_t, lam) if h_at_x is None else h_at_x
    n = x_t.size
    base = norm2(h0 - x_zf)
    total = 0.0
    for _ in range(cfg.probes):
        mu = draw_probe(rng, x_t.shape)
        h1 = h(x_t + eps * mu, lam)
        probe_term = float(np.vdot(mu, h1 - h0).real) / eps
        total += base * probe_term / n
    return total / cfg.probes


def sure_known_sigma(
    x_hat: np.ndarray, x_zf: np.ndarray, sigma: float, divergence: float
) -> float:
    """Known-variance SURE: ||x_hat - x_zf||^2 - N*sigma^2 + sigma^2 * div.

    N counts complex entries; see the module docstring for the sigma and
    divergence conventions that make this unbiased for E||x_hat - x||^2.
    """
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    n = np.asarray(x_hat).size
    return norm2(x_hat - x_zf) - n * sigma**2 + sigma**2 * divergence


def grad_sure_lambda(
    h: UpdateFn,
    x_t: np.ndarray,
    x_zf: np.ndarray,
    lam: float,
    cfg: SureConfig,
    rng: np.random.Generator,
    lambda_min: float = LAMBDA_MIN,
    lambda_max: float = LAMBDA_MAX,
) -> float:
    """d SURE / d lambda by central finite differences.

    All evaluations share one frozen probe set (and whatever noise h has
    captured), so the difference isolates lambda. Falls back to a one-sided
    difference when lam +/- delta would leave [lambda_min, lambda_max].
    """
    delta = max(1e-4, 1e-2 * lam)
    eps = perturbation_scale(cfg, x_t)
    mus = [draw_probe(rng, x_t.shape) for _ in range(cfg.probes)]
    n = x_t.size

    def sure_at(lmb: float) -> float:
        h0 = h(x_t, lmb)
        base = norm2(h0 - x_zf)
        total = 0.0
        for mu in mus:
            h1 = h(x_t + eps * mu, lmb)
            total += base * float(np.vdot(mu, h1 - h0).real) / (eps * n)
        return total / len(mus)

    lo, hi = lam - delta, lam + delta
    if hi > lambda_max:
        return (sure_at(lam) - sure_at(lo)) / delta
    if lo < lambda_min:
        return (sure_at(hi) - sure_at(lam)) / delta
    return (sure_at(hi) - sure_at(lo)) / (2.0 * delta)


def update_lambda(
    state: TttState, grad: float, cfg: TttConfig, t: int, freeze_step: int
) -> TttState:
    """One adaptive-moment descent step on lambda, clamped to bounds.

    No-op from the freeze step onward. Mutates and returns `state`.
    """
    if t >= freeze_step:
        return state
    state.steps_taken += 1
    k = state.steps_taken
    state.m = cfg.beta1 * state.m + (1.0 - cfg.beta1) * grad
    state.v = cfg.beta2 * state.v + (1.0 - cfg.beta2) * grad * grad
    m_hat = state.m / (1.0 - cfg.beta1**k)
    v_hat = state.v / (1.0 - cfg.beta2**k)
    state.lam -= cfg.alpha * m_hat / (math.sqrt(v_hat) + cfg.adam_eps)
    state.lam = min(max(state.lam, cfg.lambda_min), cfg.lambda_max)
    return state


def early_stop_check(history: list[float], w: int) -> bool:
    """True iff the mean of the last w losses strictly exceeds the mean of
    the w before them. Always False with fewer than 2w entries."""
    if w < 1:
        raise ValueError("window must be positive")
    if len(history) < 2 * w:
        return False
    recent = sum(history[-w:]) / w
    previous = sum(history[-2 * w : -w]) / w
    return bool(recent > previous)
