"""Pinhole camera poses, the fixed multi-view rig, and normal-clustered
view selection.

View selection clusters face normals (weighted by face area) with
spherical k-means and points one camera straight down each centroid, so
every significant surface orientation gets a head-on view.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import TexturedMesh

DEFAULT_ELEVATIONS = tuple(np.deg2rad((-30.0, 0.0, 30.0, 60.0)))
DEFAULT_RADIUS = 2.5
DEFAULT_FOV_Y = math.radians(45.0)
MERGE_ANGLE_COS = math.cos(math.radians(1.0))


@dataclass
class CameraPose:
    """Camera at `position` looking along unit `forward` (through the
    origin for rig-built poses), square pinhole image."""

    position: np.ndarray
    forward: np.ndarray
    up: np.ndarray
    fov_y: float
    image_size: int

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=np.float64)
        self.forward = np.asarray(self.forward, dtype=np.float64)
        self.up = np.asarray(self.up, dtype=np.float64)
        if abs(np.linalg.norm(self.forward) - 1.0) > 1e-6:
            raise ValueError("forward must be unit length")
        if abs(np.linalg.norm(self.up) - 1.0) > 1e-6:
            raise ValueError("up must be unit length")
        if abs(float(np.dot(self.forward, self.up))) >= 0.999:
            raise ValueError("forward and up are (nearly) parallel")
        if not 0.0 < self.fov_y < math.pi:
            raise ValueError("fov_y must lie in (0, pi)")

    def basis(self):
        """Right/true-up/forward orthonormal camera basis."""
        right = np.cross(self.forward, self.up)
        right = right / np.linalg.norm(right)
        true_up = np.cross(right, self.forward)
        return right, true_up, self.forward


@dataclass
class ViewRig:
    """Ordered camera set at a common distance from the origin."""

    poses: list
    radius: float

    def __post_init__(self):
        for pose in self.poses:
            t = -float(np.dot(pose.position, pose.forward))
            miss = float(np.linalg.norm(pose.position + t * pose.forward))
            if t <= 0.0 or miss > 1e-6:
                raise ValueError("rig pose does not look at the origin")

    def __len__(self):
        return len(self.poses)


def look_at_origin(position, fov_y, image_size) -> CameraPose:
    position = np.asarray(position, dtype=np.float64)
    forward = -position / np.linalg.norm(position)
    up = np.array([0.0, 1.0, 0.0])
    if abs(forward[1]) > 0.999:
        up = np.array([1.0, 0.0, 0.0])
    return CameraPose(position, forward, up, fov_y, image_size)


def uniform_rig(n_azimuth, elevations, radius=DEFAULT_RADIUS,
                fov_y=DEFAULT_FOV_Y, image_size=512) -> ViewRig:
    """Evenly spaced azimuths x given elevations, all looking at the origin.

    Azimuths start at 0; pose order is azimuth-major, elevations in the
    given order.
    """
    if n_azimuth < 1:
        raise ValueError("n_azimuth must be >= 1")
    if radius <= 1.0:
        raise ValueError("camera radius must exceed the unit bounding sphere")
    poses = []
    for i in range(n_azimuth):
        az = 2.0 * math.pi * i / n_azimuth
        for el in elevations:
            pos = np.array([
                radius * math.cos(el) * math.cos(az),
                radius * math.sin(el),
                radius * math.cos(el) * math.sin(az),
            ])
            poses.append(look_at_origin(pos, fov_y, image_size))
    return ViewRig(poses, radius)


def default_rig(n_views=36, radius=DEFAULT_RADIUS, fov_y=DEFAULT_FOV_Y,
                image_size=512) -> ViewRig:
    """The fixed rig: ceil(n/4) azimuths over four elevation rings,
    truncated to exactly n_views poses (36 -> 9x4)."""
    n_az = max(1, math.ceil(n_views / len(DEFAULT_ELEVATIONS)))
    rig = uniform_rig(n_az, DEFAULT_ELEVATIONS, radius, fov_y, image_size)
    return ViewRig(rig.poses[:n_views], radius)


def weighted_kmeans_directions(normals, weights, k, seed=0) -> np.ndarray:
    """Spherical k-means on unit vectors with per-point weights.

    Distance is 1 - n.c; centroids are the renormalized weighted means.
    The effective cluster count is min(k, number of distinct normals);
    when every distinct normal can have its own cluster the distinct
    normals themselves are returned (the zero-cost optimum). Seeding is
    weighted k-means++ driven by `seed`; empty clusters reseed to the
    point with the largest weighted distance to its centroid. Stops when
    assignments are stable or after 100 iterations.
    """
    normals = np.asarray(normals, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    if normals.size == 0:
        raise ValueError("no normals to cluster")
    if len(normals) != len(weights):
        raise ValueError("normals and weights length mismatch")
    total = float(weights.sum())
    if total <= 0.0:
        raise ValueError("weights sum to zero")

    _, first_idx = np.unique(np.round(normals, 9), axis=0, return_index=True)
    n_distinct = len(first_idx)
    k_eff = min(int(k), n_distinct)
    if k_eff < 1:
        raise ValueError("k must be >= 1")
    if k_eff == n_distinct:
        return normals[np.sort(first_idx)].copy()

    rng = np.random.default_rng(seed)
    centroids = np.empty((k_eff, 3), dtype=np.float64)
    centroids[0] = normals[rng.choice(len(normals), p=weights / total)]
    for j in range(1, k_eff):
        sims = normals @ centroids[:j].T
        d = np.clip(1.0 - sims.max(axis=1), 0.0, None)
        probs = weights * d
        s = probs.sum()
        if s <= 0.0:  # cannot happen while j < n_distinct; guard anyway
            centroids = centroids[:j]
            k_eff = j
            break
        centroids[j] = normals[rng.choice(len(normals), p=probs / s)]

    centroids, _ = _lloyd(normals, weights, centroids)
    return centroids


def _lloyd(normals, weights, centroids, max_iter: int = 100):
    """Lloyd iterations with weighted renormalized means; returns the
    final centroids and the per-iteration objective history (measured
    after each assignment)."""
    k_eff = len(centroids)
    objectives = []
    assign = None
    for _ in range(max_iter):
        sims = normals @ centroids.T
        new_assign = np.argmax(sims, axis=1)
        objectives.append(float(np.sum(
            weights * (1.0 - sims[np.arange(len(normals)), new_assign]))))
        if assign is not None and np.array_equal(new_assign, assign):
            break
        assign = new_assign
        taken = set()
        for j in range(k_eff):
            sel = assign == j
            if not sel.any():
                far = weights * (1.0 - sims[np.arange(len(normals)), assign])
                for idx in np.argsort(-far):
                    if int(idx) not in taken:
                        centroids[j] = normals[idx]
                        taken.add(int(idx))
                        break
                continue
            m = (weights[sel, None] * normals[sel]).sum(axis=0)
            norm = np.linalg.norm(m)
            if norm > 1e-12:
                centroids[j] = m / norm
    return centroids, objectives


def kmeans_objective(normals, weights, centroids) -> float:
    """Sum of weighted cosine distances to each point's nearest centroid."""
    sims = np.asarray(normals) @ np.asarray(centroids).T
    return float(np.sum(np.asarray(weights) * (1.0 - sims.max(axis=1))))


def select_views(mesh: TexturedMesh, k=16, radius=DEFAULT_RADIUS,
                 fov_y=DEFAULT_FOV_Y, image_size=512, seed=0) -> ViewRig:
    """Place cameras facing the area-weighted normal clusters of the mesh.

    Effective k is min(k, number of non-degenerate faces). Centroid
    directions closer than one degree merge into a single camera. Poses
    are ordered by descending cluster weight, ties broken lexicographically
    by direction, so the result is reproducible.
    """
    ok = ~mesh.degenerate
    normals = mesh.face_normals[ok]
    areas = mesh.face_areas[ok]
    if normals.size == 0:
        raise ValueError("mesh has no non-degenerate faces")
    k_eff = min(int(k), len(normals))
    centroids = weighted_kmeans_directions(normals, areas, k_eff, seed=seed)

    sims = normals @ centroids.T
    assign = np.argmax(sims, axis=1)
    cluster_weight = np.bincount(assign, weights=areas, minlength=len(centroids))

    merged: list[tuple[np.ndarray, float]] = []
    for c, w in zip(centroids, cluster_weight):
        for i, (kept, kw) in enumerate(merged):
            if float(np.dot(kept, c)) > MERGE_ANGLE_COS:
                merged[i] = (kept, kw + w)
                break
        else:
            merged.append((c, float(w)))

    merged.sort(key=lambda cw: (-cw[1], cw[0][0], cw[0][1], cw[0][2]))
    poses = [look_at_origin(radius * c, fov_y, image_size) for c, _ in merged]
    return ViewRig(poses, radius)


def coverage_score(normals, directions) -> float:
    """Mean over faces of the best view-alignment cosine."""
    sims = np.asarray(normals) @ np.asarray(directions).T
    return float(sims.max(axis=1).mean())
