"""The pretrained-model boundary: encode/decode between image and latent
space plus noise prediction.

Two implementations share one calling convention:

* MockOracleDenoiser - a linear stand-in whose predictions recover
  rendered targets exactly, so closed-loop tests isolate the fusion and
  scheduler logic from any real network.
* RemoteDenoiser - HTTP client for the denoiser microservice speaking
  the JSON/base64-float32 wire protocol.

Image stacks are (V, 3, H, W) float32 in [-1, 1]; latents are
(V, C, h, w) float32.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import requests

from . import _kernels, wire
from .errors import OracleUnsetError, RemoteServiceError
from .raster import render_textured
from .scheduler import NoiseSchedule, schedule_from_pairs


def area_downsample(images: np.ndarray, out_size: int) -> np.ndarray:
    """Block-mean pooling of (V, C, H, W) down to (V, C, out, out)."""
    v, c, h, w = images.shape
    if h % out_size or w % out_size:
        raise ValueError(f"image size {h}x{w} not divisible by {out_size}")
    fy, fx = h // out_size, w // out_size
    return images.reshape(v, c, out_size, fy, out_size, fx).mean(axis=(3, 5))


def bilinear_upsample(latents: np.ndarray, out_size: int) -> np.ndarray:
    """Half-pixel-aligned bilinear upsampling of (V, C, h, w)."""
    v, c, h, w = latents.shape
    sx = ((np.arange(out_size) + 0.5) * (w / out_size) - 0.5)
    sy = ((np.arange(out_size) + 0.5) * (h / out_size) - 0.5)
    xs, ys = np.meshgrid(sx, sy)
    xs = xs.ravel()
    ys = ys.ravel()
    valid = np.ones((h, w), dtype=bool)
    out = np.empty((v, c, out_size, out_size), dtype=np.float64)
    for i in range(v):
        tex = np.ascontiguousarray(np.moveaxis(latents[i], 0, -1), dtype=np.float64)
        sampled, _ = _kernels.bilinear_gather(tex, valid, xs, ys)
        out[i] = np.moveaxis(sampled.reshape(out_size, out_size, c), -1, 0)
    return out


@dataclass
class OracleTarget:
    """Ground truth for closed-loop testing.

    per_view_targets are renders of ground_truth_texture under the same
    rig and rasterizer the pipeline uses. Optional perturbations inject
    per-view inconsistency.

    trajectory_leak and prediction_bias emulate the saturation failure
    mode of a real network: the prediction keeps `trajectory_leak` of the
    latent's global per-channel color offset (a network cannot tell a
    plausible color shift in z_t from signal) and adds a small systematic
    per-channel bias each call (codec/network drift). Plain re-noising
    integrates that drift at full strength step after step; the guided
    step transmits only a fraction of each new prediction, keeping the
    trajectory near its origin. Defaults (0, None) keep the
    exact-inverse behavior.
    """

    ground_truth_texture: np.ndarray
    per_view_targets: np.ndarray
    perturbations: np.ndarray | None = None
    trajectory_leak: float = 0.0
    prediction_bias: np.ndarray | None = None

    def target_images(self) -> np.ndarray:
        if self.perturbations is None:
            return self.per_view_targets
        return self.per_view_targets + self.perturbations


def render_targets(texture: np.ndarray, buffers) -> np.ndarray:
    """Per-view renders of a ground-truth texture, (V, 3, H, W)."""
    return np.stack([render_textured(b, texture) for b in buffers])


class MockOracleDenoiser:
    """Linear codec plus a trajectory-independent noise oracle.

    encode area-downsamples to the latent grid (channels mapped
    cyclically when counts differ); decode upsamples bilinearly. The
    noise prediction is constructed so the clean-latent estimate equals
    the encoded target no matter what z_t is.
    """

    DEFAULT_LATENT_SIZE = 64

    def __init__(self, schedule: NoiseSchedule, image_size: int,
                 latent_channels: int = 3, latent_size: int | None = None,
                 target: OracleTarget | None = None):
        self.schedule = schedule
        self.image_size = int(image_size)
        self.latent_size = int(latent_size or self.DEFAULT_LATENT_SIZE)
        if self.image_size % self.latent_size:
            raise ValueError("image_size must be a multiple of the latent size")
        self.latent_channels = int(latent_channels)
        self.latent_shape = (self.latent_channels, self.latent_size, self.latent_size)
        self.target = target
        self.predict_calls = 0
        self._target_latents = None

    def encode(self, images: np.ndarray) -> np.ndarray:
        if images.shape[-2:] != (self.image_size, self.image_size):
            raise ValueError(f"expected {self.image_size}^2 images, got {images.shape}")
        pooled = area_downsample(np.asarray(images, dtype=np.float64),
                                 self.latent_size)
        idx = [c % pooled.shape[1] for c in range(self.latent_channels)]
        return pooled[:, idx].astype(np.float32)

    def decode(self, latents: np.ndarray) -> np.ndarray:
        up = bilinear_upsample(np.asarray(latents, dtype=np.float64),
                               self.image_size)
        idx = [c % up.shape[1] for c in range(3)]
        return up[:, idx].astype(np.float32)

    def predict_noise(self, z_t: np.ndarray, t: int, view_ids=None) -> np.ndarray:
        if self.target is None:
            raise OracleUnsetError("mock denoiser has no oracle target")
        if self._target_latents is None:
            self._target_latents = self.encode(self.target.target_images())
        z0 = self._target_latents
        if view_ids is not None:
            z0 = z0[np.asarray(view_ids)]
        if z0.shape != z_t.shape:
            raise ValueError(f"latent shape {z_t.shape} does not match "
                             f"targets {z0.shape}")
        leak = self.target.trajectory_leak
        alpha = self.schedule.alpha[t]
        if leak > 0.0:
            color_offset = (z_t / alpha - z0).mean(axis=(2, 3), keepdims=True)
            z0 = z0 + leak * color_offset
        if self.target.prediction_bias is not None:
            bias = np.asarray(self.target.prediction_bias, dtype=np.float64)
            z0 = z0 + bias.reshape(1, -1, 1, 1)
        self.predict_calls += z_t.shape[0]
        return ((z_t - alpha * z0) / self.schedule.sigma[t]).astype(np.float32)


class RemoteDenoiser:
    """HTTP client for the denoiser service.

    Opens a session up front; the service reports its latent shape and
    true sigma table, which callers should adopt verbatim. Per-view
    depth/lineart conditions are registered once and sent with every
    prediction request in view batches of `batch_size`.
    """

    def __init__(self, base_url: str, prompt: str, image_size: int,
                 n_views: int, seed: int = 0,
                 controlnet_weights=(0.5, 0.5), batch_size: int = 12,
                 timeout: float = 300.0):
        self.base_url = base_url.rstrip("/")
        self.image_size = int(image_size)
        self.n_views = int(n_views)
        self.batch_size = int(batch_size)
        self.timeout = timeout
        self._http = requests.Session()
        reply = self._post("/v1/session", {
            "prompt": prompt,
            "image_size": self.image_size,
            "n_views": self.n_views,
            "controlnet_weights": list(controlnet_weights),
            "seed": int(seed),
        })
        self.session_id = reply["session_id"]
        self.latent_shape = tuple(int(d) for d in reply["latent_shape"])
        self.schedule = schedule_from_pairs(reply["sigma_table"])
        self._depth = None
        self._lineart = None
        self.predict_calls = 0

    def set_conditions(self, depth: np.ndarray, lineart: np.ndarray) -> None:
        """Register per-view (V, H, W) conditioning maps."""
        self._depth = np.asarray(depth, dtype=np.float32)
        self._lineart = np.asarray(lineart, dtype=np.float32)

    def encode(self, images: np.ndarray) -> np.ndarray:
        reply = self._post("/v1/encode", {
            "session_id": self.session_id,
            "images": wire.encode_tensor(images),
        })
        want = (images.shape[0],) + self.latent_shape
        return wire.decode_tensor(reply["z"], expect_shape=want)

    def decode(self, latents: np.ndarray) -> np.ndarray:
        reply = self._post("/v1/decode", {
            "session_id": self.session_id,
            "z": wire.encode_tensor(latents),
        })
        want = (latents.shape[0], 3, self.image_size, self.image_size)
        return wire.decode_tensor(reply["images"], expect_shape=want)

    def predict_noise(self, z_t: np.ndarray, t: int, view_ids=None) -> np.ndarray:
        if self._depth is None:
            raise RemoteServiceError("conditions not set; call set_conditions first")
        if view_ids is None:
            view_ids = np.arange(z_t.shape[0])
        view_ids = np.asarray(view_ids)
        eps = np.empty_like(z_t, dtype=np.float32)
        for lo in range(0, len(view_ids), self.batch_size):
            sel = slice(lo, lo + self.batch_size)
            ids = view_ids[sel]
            reply = self._post("/v1/predict_noise", {
                "session_id": self.session_id,
                "t": int(t),
                "view_ids": [int(i) for i in ids],
                "z_t": wire.encode_tensor(z_t[sel]),
                "depth": wire.encode_tensor(self._depth[ids]),
                "lineart": wire.encode_tensor(self._lineart[ids]),
            })
            eps[sel] = wire.decode_tensor(
                reply["eps"], expect_shape=(len(ids),) + self.latent_shape)
        self.predict_calls += z_t.shape[0]
        return eps

    def _post(self, route: str, payload: dict) -> dict:
        try:
            resp = self._http.post(self.base_url + route, json=payload,
                                   timeout=self.timeout)
        except requests.RequestException as exc:
            raise RemoteServiceError(f"denoiser service unreachable: {exc}") from exc
        if resp.status_code != 200:
            raise RemoteServiceError(
                f"{route} failed with HTTP {resp.status_code}: {resp.text[:200]}")
        return resp.json()
