"""Command-line entry points.

    uvfuse generate --mesh cube.obj --prompt "a crate" [--views 36] ...
    uvfuse views --mesh cube.obj [--k 16]
    uvfuse render --mesh cube.obj --texture texture.png --out dir

`generate` accepts a key=value config file via --config; explicit flags
override file values.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .cameras import coverage_score, select_views
from .pipeline import GenerationConfig, build_rig, run_generation
from . import pngio
from .geometry import load_mesh
from .raster import rasterize, render_textured

_CONFIG_TYPES = {f.name: f.type for f in dataclasses.fields(GenerationConfig)}


def parse_config_file(path) -> dict:
    """key=value lines; '#' starts a comment; values typed per field."""
    values = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value")
        key, val = (part.strip() for part in line.split("=", 1))
        if key not in _CONFIG_TYPES:
            raise ValueError(f"{path}:{lineno}: unknown config key {key!r}")
        values[key] = _coerce(key, val)
    return values


def _coerce(key: str, val: str):
    current = getattr(GenerationConfig(), key)
    if isinstance(current, bool):
        return val.lower() in ("1", "true", "yes", "on")
    if isinstance(current, int):
        return int(val)
    if isinstance(current, float):
        return float(val)
    if isinstance(current, tuple):
        return tuple(int(x) for x in val.replace(",", " ").split())
    return val


def _add_generate_parser(sub):
    p = sub.add_parser("generate", help="run texture generation")
    p.add_argument("--mesh", help="UV-mapped OBJ file")
    p.add_argument("--prompt", default=None)
    p.add_argument("--config", help="key=value config file")
    p.add_argument("--views", type=int, dest="n_views", default=None)
    p.add_argument("--select-views", action="store_true",
                   help="cluster face normals to place cameras")
    p.add_argument("--steps", type=int, default=None)
    p.add_argument("--truncation", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--denoiser", choices=("mock", "remote"), default=None)
    p.add_argument("--service-url", dest="service_url", default=None)
    p.add_argument("--step-mode", dest="step_mode",
                   choices=("modified", "naive"), default=None)
    p.add_argument("--out", dest="out_dir", default=None)
    p.add_argument("--image-size", type=int, dest="image_size", default=None)
    p.add_argument("--radius", type=float, default=None)
    p.add_argument("--fov", type=float, dest="fov_deg", default=None)
    p.add_argument("--k", type=int, dest="k_select", default=None)
    p.add_argument("--mock-texture", dest="mock_texture", default=None)
    p.add_argument("--debug", action="store_true")
    return p


def cmd_generate(args) -> int:
    values = {}
    if args.config:
        values.update(parse_config_file(args.config))
    overrides = {
        "mesh": args.mesh,
        "prompt": args.prompt,
        "n_views": args.n_views,
        "steps": args.steps,
        "truncation": args.truncation,
        "seed": args.seed,
        "service_url": args.service_url,
        "step_mode": args.step_mode,
        "out_dir": args.out_dir,
        "image_size": args.image_size,
        "radius": args.radius,
        "fov_deg": args.fov_deg,
        "k_select": args.k_select,
        "mock_texture": args.mock_texture,
    }
    values.update({k: v for k, v in overrides.items() if v is not None})
    if args.select_views:
        values["rig_mode"] = "kmeans_select"
    if args.denoiser:
        values["denoiser"] = {"mock": "mock_oracle", "remote": "remote"}[args.denoiser]
    if args.debug:
        values["debug"] = True

    config = GenerationConfig(**values)
    report = run_generation(config)
    print(f"texture written to {report.texture_path}")
    print(f"coverage {report.coverage:.3f}, holes {report.holes_before} -> "
          f"{report.holes_after}, consistency {report.consistency:.5f}")
    return 0


def cmd_views(args) -> int:
    mesh = load_mesh(args.mesh)
    rig = select_views(mesh, k=args.k, radius=args.radius, seed=args.seed)
    directions = np.stack([p.position / np.linalg.norm(p.position)
                           for p in rig.poses])
    ok = ~mesh.degenerate
    score = coverage_score(mesh.face_normals[ok], directions)
    print(f"{len(rig.poses)} selected views (coverage {score:.4f}):")
    for d in directions:
        print(f"  {d[0]:+.6f} {d[1]:+.6f} {d[2]:+.6f}")
    if args.out:
        payload = {"directions": directions.tolist(), "radius": rig.radius,
                   "coverage": score}
        Path(args.out).write_text(json.dumps(payload, indent=2),
                                  encoding="utf-8")
        print(f"wrote {args.out}")
    return 0


def cmd_render(args) -> int:
    mesh = load_mesh(args.mesh)
    texture = pngio.load_texture(args.texture)
    config = GenerationConfig(mesh=args.mesh, n_views=args.views,
                              image_size=args.image_size)
    rig = build_rig(config, mesh)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for v, pose in enumerate(rig.poses):
        frame = render_textured(rasterize(mesh, pose), texture)
        pngio.save_image(out_dir / f"frame_{v:02d}.png", frame)
    print(f"wrote {len(rig.poses)} frames to {out_dir}")
    return 0


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    parser = argparse.ArgumentParser(prog="uvfuse",
                                     description="UV-space multi-diffusion texturing")
    sub = parser.add_subparsers(dest="command", required=True)

    _add_generate_parser(sub)

    pv = sub.add_parser("views", help="print normal-clustered camera directions")
    pv.add_argument("--mesh", required=True)
    pv.add_argument("--k", type=int, default=16)
    pv.add_argument("--seed", type=int, default=0)
    pv.add_argument("--radius", type=float, default=2.5)
    pv.add_argument("--out", help="optional JSON export path")

    pr = sub.add_parser("render", help="render a turntable from a texture")
    pr.add_argument("--mesh", required=True)
    pr.add_argument("--texture", required=True)
    pr.add_argument("--out", required=True)
    pr.add_argument("--views", type=int, default=36)
    pr.add_argument("--image-size", type=int, dest="image_size", default=512)

    args = parser.parse_args(argv)
    handlers = {"generate": cmd_generate, "views": cmd_views, "render": cmd_render}
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
