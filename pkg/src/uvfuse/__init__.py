"""uvfuse: multi-view-consistent texture synthesis through per-step
UV-space fusion of diffusion predictions."""

from .cameras import (CameraPose, ViewRig, select_views, uniform_rig,
                      weighted_kmeans_directions)
from .denoiser import MockOracleDenoiser, OracleTarget, RemoteDenoiser
from .geometry import TexturedMesh, compute_face_normal_area, load_mesh
from .inpaint import MaskedTexture, fill_holes
from .pipeline import GenerationConfig, GenerationReport, run_generation
from .raster import ConditionImages, ViewBuffers, make_condition_images, rasterize
from .scheduler import (NoiseSchedule, guided_noise, make_schedule,
                        modified_step, naive_step, predict_z0,
                        subsample_timesteps)
from .uvfusion import ScaleWeights, UvAccumulator, fused_texture, scale_weights, splat, unproject

__version__ = "0.1.0"

__all__ = [
    "CameraPose", "ConditionImages", "GenerationConfig", "GenerationReport",
    "MaskedTexture", "MockOracleDenoiser", "NoiseSchedule", "OracleTarget",
    "RemoteDenoiser", "ScaleWeights", "TexturedMesh", "UvAccumulator",
    "ViewBuffers", "ViewRig", "compute_face_normal_area", "fill_holes",
    "fused_texture", "guided_noise", "load_mesh", "make_condition_images",
    "make_schedule", "modified_step", "naive_step", "predict_z0",
    "rasterize", "run_generation", "scale_weights", "select_views", "splat",
    "subsample_timesteps", "uniform_rig", "unproject",
    "weighted_kmeans_directions",
]
