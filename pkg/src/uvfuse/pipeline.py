"""Full generation loop: denoise all views in parallel lockstep, fusing
their clean-image predictions through the shared UV texture every step.

Per subsampled timestep (descending):
  1. predict noise for every view          4. splat all views into each
  2. estimate the clean latent                texture resolution
  3. decode to image space                 5. unproject the blended fusion
  6. re-encode the fused views             7. step to the next timestep
                                              (guided noise, or fresh
                                              noise in ablation mode)

After the last step the finest fused composite is hole-filled and
written out together with a turntable and a JSON report.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import pngio
from .cameras import ViewRig, default_rig, select_views
from .denoiser import (MockOracleDenoiser, OracleTarget, RemoteDenoiser,
                       bilinear_upsample, render_targets)
from .geometry import load_mesh, uv_occupancy
from .inpaint import MaskedTexture, fill_holes_with_mask
from .metrics import psnr, view_consistency
from .raster import make_condition_images, rasterize, render_textured
from .scheduler import (make_schedule, modified_step, naive_step, predict_z0,
                        subsample_timesteps)
from .uvfusion import fused_texture, scale_weights, splat, unproject

logger = logging.getLogger(__name__)

_NAIVE_RNG_TAG = 0x5EED
_PERTURB_RNG_TAG = 0xDE17A

RIG_MODES = ("uniform36", "kmeans_select")
DENOISER_MODES = ("mock_oracle", "remote")
STEP_MODES = ("modified", "naive")


@dataclass
class GenerationConfig:
    mesh: str = ""
    prompt: str = ""
    rig_mode: str = "uniform36"
    n_views: int = 36
    steps: int = 20
    truncation: float = 0.7
    resolutions: tuple = (128, 256, 512)
    seed: int = 0
    denoiser: str = "mock_oracle"
    service_url: str = ""
    step_mode: str = "modified"
    out_dir: str = "out"
    image_size: int = 512
    radius: float = 2.5
    fov_deg: float = 45.0
    k_select: int = 16
    total_timesteps: int = 1000
    sigma_min: float = 0.01
    sigma_max: float = 0.9985
    mock_texture: str = ""
    mock_perturb_amplitude: float = 0.0
    mock_leak: float = 0.0
    mock_bias: tuple = ()
    debug: bool = False
    save_turntable: bool = True

    def validate(self) -> None:
        if not self.mesh:
            raise ValueError("mesh path is required")
        if self.rig_mode not in RIG_MODES:
            raise ValueError(f"rig_mode must be one of {RIG_MODES}")
        if self.denoiser not in DENOISER_MODES:
            raise ValueError(f"denoiser must be one of {DENOISER_MODES}")
        if self.step_mode not in STEP_MODES:
            raise ValueError(f"step_mode must be one of {STEP_MODES}")
        if self.n_views < 1:
            raise ValueError("n_views must be >= 1")
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if not 0.0 < self.truncation <= 1.0:
            raise ValueError("truncation must lie in (0, 1]")
        res = tuple(self.resolutions)
        if len(res) != 3 or any(b <= a for a, b in zip(res, res[1:])):
            raise ValueError("resolutions must be 3 strictly increasing values")
        if self.denoiser == "remote" and not self.service_url:
            raise ValueError("remote denoiser needs service_url")
        if self.image_size % 8:
            raise ValueError("image_size must be divisible by 8")


@dataclass
class GenerationReport:
    texture_path: str
    holes_before: int
    holes_after: int
    step_seconds: list = field(default_factory=list)
    consistency: float = 0.0
    coverage: float = 0.0
    step_psnr: list | None = None
    prefusion_consistency: float | None = None
    postfusion_consistency: float | None = None
    z0_trajectory_variance: float | None = None

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), indent=2)


def build_rig(config: GenerationConfig, mesh) -> ViewRig:
    fov = math.radians(config.fov_deg)
    if config.rig_mode == "kmeans_select":
        return select_views(mesh, k=config.k_select, radius=config.radius,
                            fov_y=fov, image_size=config.image_size,
                            seed=config.seed)
    return default_rig(config.n_views, radius=config.radius, fov_y=fov,
                       image_size=config.image_size)


def default_mock_texture(resolution: int, cells: int = 3,
                         hardness: float = 1.5) -> np.ndarray:
    """Band-limited soft checkerboard in [-1, 1], (R, R, 3).

    Smooth cell transitions keep the pattern within what the mock
    codec's downsample/upsample round-trip can represent, so closed-loop
    runs measure fusion fidelity rather than codec loss.
    """
    u = (np.arange(resolution) + 0.5) / resolution
    uu, vv = np.meshgrid(u, u)
    base = np.sin(2.0 * np.pi * cells * uu) * np.sin(2.0 * np.pi * cells * vv)
    pattern = np.tanh(hardness * base) / np.tanh(hardness)
    tex = np.empty((resolution, resolution, 3))
    tex[..., 0] = 0.10 + 0.55 * pattern
    tex[..., 1] = -0.05 - 0.50 * pattern
    tex[..., 2] = 0.20 + 0.40 * pattern * pattern - 0.25 * pattern
    return tex


def make_view_perturbations(n_views: int, image_size: int, amplitude: float,
                            seed: int) -> np.ndarray:
    """Smooth per-view deltas with zero mean across views per pixel,
    scaled to the requested RMS amplitude."""
    deltas = np.empty((n_views, 3, image_size, image_size), dtype=np.float64)
    for v in range(n_views):
        rng = np.random.default_rng([seed, _PERTURB_RNG_TAG, v])
        low = rng.standard_normal((1, 3, 8, 8))
        deltas[v] = bilinear_upsample(low, image_size)[0]
    deltas -= deltas.mean(axis=0, keepdims=True)
    rms = float(np.sqrt(np.mean(deltas**2)))
    if rms > 0.0:
        deltas *= amplitude / rms
    return deltas.astype(np.float32)


def _build_session(config: GenerationConfig, schedule, buffers):
    if config.denoiser == "remote":
        session = RemoteDenoiser(config.service_url, config.prompt,
                                 config.image_size, len(buffers),
                                 seed=config.seed)
        conds = [make_condition_images(b) for b in buffers]
        session.set_conditions(
            np.stack([c.depth_image for c in conds]),
            np.stack([c.lineart_image for c in conds]))
        return session, session.schedule, None

    finest = max(config.resolutions)
    if config.mock_texture:
        gt = pngio.load_texture(config.mock_texture)
    else:
        gt = default_mock_texture(finest)
    targets = render_targets(gt, buffers)
    perturb = None
    if config.mock_perturb_amplitude > 0.0:
        perturb = make_view_perturbations(
            len(buffers), config.image_size,
            config.mock_perturb_amplitude, config.seed)
    bias = np.asarray(config.mock_bias) if config.mock_bias else None
    target = OracleTarget(ground_truth_texture=gt, per_view_targets=targets,
                          perturbations=perturb,
                          trajectory_leak=config.mock_leak,
                          prediction_bias=bias)
    session = MockOracleDenoiser(schedule, config.image_size, target=target)
    return session, schedule, gt


def init_latents(n_views: int, latent_shape, seed: int) -> np.ndarray:
    """Standard-normal z_T with one substream per view, so extending the
    rig never perturbs existing views' noise."""
    z = np.empty((n_views,) + tuple(latent_shape), dtype=np.float32)
    for v in range(n_views):
        rng = np.random.default_rng([seed, v])
        z[v] = rng.standard_normal(latent_shape).astype(np.float32)
    return z


def run_generation(config: GenerationConfig) -> GenerationReport:
    """Execute the full loop and write texture, turntable and report."""
    config.validate()
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    debug_dir = out_dir / "debug"
    if config.debug:
        debug_dir.mkdir(exist_ok=True)

    mesh = load_mesh(config.mesh)
    rig = build_rig(config, mesh)
    buffers = [rasterize(mesh, pose) for pose in rig.poses]
    n_views = len(buffers)

    schedule = make_schedule(config.total_timesteps, config.sigma_min,
                             config.sigma_max)
    session, schedule, gt_texture = _build_session(config, schedule, buffers)
    timesteps = subsample_timesteps(schedule, config.steps, config.truncation)

    resolutions = tuple(config.resolutions)
    finest = max(resolutions)
    z = init_latents(n_views, session.latent_shape, config.seed)
    naive_rng = np.random.default_rng([config.seed, _NAIVE_RNG_TAG])

    occupancy = uv_occupancy(mesh, finest)
    step_seconds: list[float] = []
    mock_mode = gt_texture is not None
    step_psnr: list[float] | None = [] if mock_mode else None
    prefusion = postfusion = None
    z0_sum = z0_sq_sum = None
    accumulators = None
    weights = None

    for i, t in enumerate(timesteps):
        tic = time.perf_counter()
        progress = 1.0 if config.steps == 1 else i / (config.steps - 1)
        weights = scale_weights(progress)

        eps = session.predict_noise(z, int(t))
        z0_pred = predict_z0(z, eps, int(t), schedule)
        x0 = session.decode(z0_pred)
        accumulators = [splat(x0, buffers, r) for r in resolutions]
        x0_md = unproject(accumulators, weights, buffers, x0)
        z0_fused = session.encode(x0_md)

        if mock_mode:
            z64 = z0_fused.astype(np.float64)
            if z0_sum is None:
                z0_sum = z64.copy()
                z0_sq_sum = z64 * z64
            else:
                z0_sum += z64
                z0_sq_sum += z64 * z64
            if i == config.steps - 1:
                prefusion = view_consistency(x0, buffers)
                postfusion = view_consistency(x0_md, buffers)

        if i < config.steps - 1:
            t_next = int(timesteps[i + 1])
            if config.step_mode == "modified":
                z = modified_step(z, z0_fused, int(t), t_next, schedule)
            else:
                z = naive_step(z0_fused, t_next, schedule, naive_rng)

        step_seconds.append(time.perf_counter() - tic)
        if step_psnr is not None or config.debug:
            tex_i, holes_i = fused_texture(accumulators, weights)
            if step_psnr is not None:
                covered = ~holes_i
                step_psnr.append(psnr(tex_i, gt_texture, mask=covered))
            if config.debug:
                pngio.save_texture(debug_dir / f"step_{i:02d}_texture.png", tex_i)
                pngio.save_mask(debug_dir / f"step_{i:02d}_holes.png", holes_i)
        logger.info("step %d/%d t=%d done in %.2fs", i + 1, config.steps, t,
                    step_seconds[-1])

    fused, holes = fused_texture(accumulators, weights)
    holes_before = int(holes.sum())
    final_texture, final_valid = fill_holes_with_mask(
        MaskedTexture(fused, ~holes), background=0.0)
    holes_after = int((~final_valid).sum())

    texture_path = out_dir / "texture.png"
    pngio.save_texture(texture_path, final_texture)
    # flipped like the texture so the two PNGs align
    pngio.save_mask(out_dir / "texture_hole_mask.png", holes[::-1])

    if config.save_turntable:
        tt_dir = out_dir / "turntable"
        tt_dir.mkdir(exist_ok=True)
        for v, buf in enumerate(buffers):
            frame = render_textured(buf, final_texture)
            pngio.save_image(tt_dir / f"frame_{v:02d}.png", frame)

    fine_cov = accumulators[-1].coverage
    occ_total = int(occupancy.sum())
    coverage = float((fine_cov & occupancy).sum() / occ_total) if occ_total else 0.0

    renders = np.stack([render_textured(b, final_texture) for b in buffers])
    consistency = view_consistency(renders, buffers)

    z0_var = None
    if z0_sum is not None:
        n = float(config.steps)
        z0_var = float(np.mean(z0_sq_sum / n - (z0_sum / n) ** 2))

    report = GenerationReport(
        texture_path=str(texture_path),
        holes_before=holes_before,
        holes_after=holes_after,
        step_seconds=step_seconds,
        consistency=consistency,
        coverage=coverage,
        step_psnr=step_psnr,
        prefusion_consistency=prefusion,
        postfusion_consistency=postfusion,
        z0_trajectory_variance=z0_var,
    )
    (out_dir / "report.json").write_text(report.to_json(), encoding="utf-8")
    return report
