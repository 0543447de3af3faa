"""Diffusion trajectory numerics.

Holds the (alpha_t, sigma_t) tables and the first-order update rules:
clean-latent prediction, the guided-noise step that re-noises along the
direction between z_t and the fused prediction, the plain re-noising
step kept for ablations, and truncated timestep subsampling.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.optimize import brentq


@dataclass
class NoiseSchedule:
    """sigma[t] / alpha[t] for t = 0..T, with sigma[0] = 0 as the clean
    anchor. alpha_t = sqrt(1 - sigma_t^2) throughout."""

    sigma: np.ndarray
    alpha: np.ndarray

    def __post_init__(self):
        self.sigma = np.asarray(self.sigma, dtype=np.float64)
        self.alpha = np.asarray(self.alpha, dtype=np.float64)
        if self.sigma.ndim != 1 or self.sigma.shape != self.alpha.shape:
            raise ValueError("sigma and alpha must be 1-D and equal length")
        if len(self.sigma) < 3:
            raise ValueError("schedule needs at least two noisy timesteps")
        if not np.all(np.diff(self.sigma) > 0):
            raise ValueError("sigma must be strictly increasing")
        if self.sigma[0] >= 0.01 or self.sigma[-1] <= 0.99:
            raise ValueError("sigma must start below 0.01 and end above 0.99")
        if np.abs(self.alpha**2 + self.sigma**2 - 1.0).max() > 1e-9:
            raise ValueError("alpha^2 + sigma^2 must equal 1")

    @property
    def total_steps(self) -> int:
        return len(self.sigma) - 1


def make_schedule(total_steps: int = 1000, sigma_min: float = 0.01,
                  sigma_max: float = 0.9985, kind: str = "scaled_linear") -> NoiseSchedule:
    """Variance schedule from a beta ramp hitting the requested endpoints.

    beta_1 is pinned so sigma_1 = sigma_min; the final ramp value is
    solved so sigma_T = sigma_max. `kind` picks the ramp family: "linear"
    interpolates beta directly, "scaled_linear" (the pretrained-latent-
    model convention, default) interpolates sqrt(beta).
    """
    if total_steps < 2:
        raise ValueError("total_steps must be >= 2")
    if not 0.0 < sigma_min < sigma_max < 1.0:
        raise ValueError("need 0 < sigma_min < sigma_max < 1")
    if kind not in ("linear", "scaled_linear"):
        raise ValueError(f"unknown schedule kind {kind!r}")

    beta_1 = sigma_min**2
    log_target = np.log1p(-sigma_max**2)
    ramp = np.linspace(0.0, 1.0, total_steps)

    def betas_for(beta_end: float) -> np.ndarray:
        if kind == "linear":
            return beta_1 + (beta_end - beta_1) * ramp
        root = np.sqrt(beta_1) + (np.sqrt(beta_end) - np.sqrt(beta_1)) * ramp
        return root**2

    def gap(beta_end: float) -> float:
        return float(np.log1p(-betas_for(beta_end)).sum()) - log_target

    try:
        beta_end = brentq(gap, 1e-12, 1.0 - 1e-9, xtol=1e-15, rtol=1e-14)
    except ValueError as exc:
        raise ValueError(
            "sigma endpoints unreachable with this step count") from exc

    alpha_bar = np.cumprod(1.0 - betas_for(beta_end))
    sigma = np.concatenate([[0.0], np.sqrt(1.0 - alpha_bar)])
    alpha = np.concatenate([[1.0], np.sqrt(alpha_bar)])
    return NoiseSchedule(sigma=sigma, alpha=alpha)


def subsample_timesteps(schedule: NoiseSchedule, n_steps: int,
                        truncation_fraction: float) -> np.ndarray:
    """Descending timesteps, evenly spaced from T down to T*(1 - fraction).

    The first entry is always T; with the default 0.7 truncation and 20
    steps on a 1000-step table the last visited timestep is 300.
    """
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    if not 0.0 < truncation_fraction <= 1.0:
        raise ValueError("truncation_fraction must lie in (0, 1]")
    total = schedule.total_steps
    t_end = max(1, int(round(total * (1.0 - truncation_fraction))))
    if n_steps == 1:
        return np.array([total], dtype=np.int64)
    return np.rint(np.linspace(total, t_end, n_steps)).astype(np.int64)


def predict_z0(z_t, eps_pred, t: int, schedule: NoiseSchedule):
    """Clean-latent estimate (z_t - sigma_t * eps) / alpha_t."""
    return (z_t - schedule.sigma[t] * eps_pred) / schedule.alpha[t]


def guided_noise(z_t, z0_fused, t: int, schedule: NoiseSchedule):
    """Noise direction between z_t and a (fused) clean latent:
    (z_t - alpha_t * z0) / sigma_t. Inverse of predict_z0, so feeding the
    model's own prediction back recovers its eps exactly."""
    return (z_t - schedule.alpha[t] * z0_fused) / schedule.sigma[t]


def modified_step(z_t, z0_fused, t: int, t_prev: int, schedule: NoiseSchedule):
    """Re-noise along the guided direction instead of fresh randomness:
    alpha_prev * z0 + sigma_prev * guided_noise. Deterministic."""
    if not t_prev < t:
        raise ValueError("t_prev must be smaller than t")
    eps = guided_noise(z_t, z0_fused, t, schedule)
    return schedule.alpha[t_prev] * z0_fused + schedule.sigma[t_prev] * eps


def naive_step(z0_fused, t_prev: int, schedule: NoiseSchedule,
               rng: np.random.Generator):
    """Plain re-noising with fresh standard-normal noise. Kept only for
    the saturation ablation; deterministic given the generator state."""
    noise = rng.standard_normal(np.shape(z0_fused)).astype(
        np.asarray(z0_fused).dtype, copy=False)
    return schedule.alpha[t_prev] * z0_fused + schedule.sigma[t_prev] * noise


def export_sigma_table(schedule: NoiseSchedule, path) -> Path:
    """Plain-text (t, sigma_t) pairs at full float precision, one per line."""
    path = Path(path)
    lines = [f"{t} {float(schedule.sigma[t])!r}" for t in range(len(schedule.sigma))]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def load_sigma_table(path) -> NoiseSchedule:
    pairs = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        t_str, s_str = line.split()
        pairs.append((int(t_str), float(s_str)))
    return schedule_from_pairs(pairs)


def schedule_from_pairs(pairs) -> NoiseSchedule:
    """Build a schedule from (t, sigma) pairs covering t = 1..T (a t = 0
    entry is optional and forced to the clean anchor sigma = 0)."""
    by_t = {int(t): float(s) for t, s in pairs}
    by_t[0] = 0.0
    total = max(by_t)
    if sorted(by_t) != list(range(total + 1)):
        raise ValueError("sigma table must cover every timestep 1..T")
    sigma = np.array([by_t[t] for t in range(total + 1)], dtype=np.float64)
    alpha = np.sqrt(1.0 - sigma**2)
    return NoiseSchedule(sigma=sigma, alpha=alpha)
