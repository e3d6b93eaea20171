"""Umbrella command line.

Subcommands: render | fit | traject | simulate | train-refiner | refine
| update | eval.  Every subcommand accepts --seed, --config FILE (JSON
whose keys override parsed flags), and --json (machine-readable result
on stdout).  Commands that touch torch pin its thread counts so output
bytes do not depend on the host's thread settings.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .core.cameras_json import load_cameras, save_cameras
from .core.plyio import load_ply, write_ply
from .core.tensorio import read_tensor, write_tensor
from .core.types import VideoTensor
from .optim.fit import FitConfig, fit
from .raster.config import RasterConfig
from .raster.preview import write_previews
from .raster.render import render_trajectory
from .seeds import derive_seed
from .simulate.dataset import build_dataset, load_sample
from .simulate.pairs import SimConfig
from .traject.trajectory import TrajectoryConfig, interpolate

MODALITY_ALIASES = {
    "color": "color",
    "alpha": "alpha",
    "depth": "depth",
    "normal": "normal",
    "uncert": "uncertainty",
}


def _pin_torch_threads() -> None:
    import torch

    torch.set_num_threads(1)
    try:
        torch.set_num_interop_threads(1)
    except RuntimeError:
        pass  # already initialized


def _load_views(views_path: str, cams_path: str):
    cams = load_cameras(cams_path)
    frames = read_tensor(views_path)
    if frames.ndim != 4 or frames.shape[3] != 3:
        raise ValueError(f"views tensor must be (T, H, W, 3), got {frames.shape}")
    if frames.shape[0] != len(cams):
        raise ValueError(f"{frames.shape[0]} view frames vs {len(cams)} cameras")
    return [(cams[i], np.asarray(frames[i], dtype=np.float64)) for i in range(len(cams))]


def cmd_render(args) -> dict:
    cloud = load_ply(args.ply)
    cams = load_cameras(args.cams)
    cfg = RasterConfig(tile_size=args.tile_size)
    wanted = [m.strip() for m in args.modalities.split(",") if m.strip()]
    bad = [m for m in wanted if m not in MODALITY_ALIASES]
    if bad:
        raise ValueError(f"unknown modalities {bad}; choose from {sorted(MODALITY_ALIASES)}")
    video = render_trajectory(cloud, cams, cfg, workers=args.workers)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    written = {}
    for short in wanted:
        attr = MODALITY_ALIASES[short]
        path = out / f"{short}.gpbt"
        write_tensor(path, getattr(video, attr).frames)
        written[short] = str(path)
    for i in range(video.num_frames):
        write_previews(out / "previews", video.frame(i), f"frame_{i:04d}", modalities=wanted)
    return {"out": str(out), "frames": video.num_frames, "tensors": written}


def cmd_fit(args) -> dict:
    cloud0 = load_ply(args.ply_init)
    views = _load_views(args.views, args.cams)
    cfg = FitConfig(iterations=args.iters, lambda_dssim=getattr(args, "lambda"), seed=args.seed)
    log: list = []
    fitted = fit(cloud0, views, cfg, log=log)
    write_ply(args.out, fitted)
    if args.log:
        with open(args.log, "w") as f:
            f.write("step,loss,l1,dssim\n")
            for step, loss, l1, dssim in log:
                f.write(f"{step},{loss:.10g},{l1:.10g},{dssim:.10g}\n")
    return {"out": args.out, "iters": args.iters, "final_loss": log[-1][1] if log else None}


def cmd_traject(args) -> dict:
    keys = load_cameras(args.cams)
    path = interpolate(keys, TrajectoryConfig(samples_per_segment=args.per_segment))
    save_cameras(args.out, path)
    return {"out": args.out, "keys": len(keys), "samples": len(path)}


def cmd_simulate(args) -> dict:
    cfg = SimConfig(
        retained_fraction=args.retained,
        init_mode=args.init_mode,
        corrupt_iters=args.corrupt_iters,
        clean_iters=args.clean_iters,
        degrade_mode=args.degrade,
        seed=args.seed,
        n_splats=args.n_splats,
        n_frames=args.n_frames,
        width=args.width,
        height=args.height,
        samples_per_segment=args.per_segment,
    )
    manifest = build_dataset(args.n, cfg, args.out, workers=args.workers)
    return {
        "out": args.out,
        "n_samples": manifest["n_samples"],
        "skipped": manifest["skipped"],
    }


def _parse_dims(dims: str) -> tuple[int, int, int]:
    parts = dims.lower().split("x")
    if len(parts) != 3:
        raise ValueError(f"--dims must be DxBLOCKSxHEADS, e.g. 64x4x8, got {dims!r}")
    return int(parts[0]), int(parts[1]), int(parts[2])


def cmd_train_refiner(args) -> dict:
    _pin_torch_threads()
    import torch

    from .refiner.checkpoint import save_checkpoint
    from .refiner.model import RefinerConfig, RefinerModel
    from .refiner.train import TrainConfig, train

    d, blocks, heads = _parse_dims(args.dims)
    torch.manual_seed(derive_seed(args.seed, "model-init"))
    model = RefinerModel(RefinerConfig(d=d, heads=heads, blocks=blocks, ps=args.ps, pt=args.pt))
    cfg = TrainConfig(
        steps=args.steps,
        batch=args.batch,
        lr=args.lr,
        seed=args.seed,
        checkpoint_every=args.checkpoint_every,
        checkpoint_dir=args.out if args.checkpoint_every else None,
        ga_only=args.ga_only,
    )
    model, log = train(model, args.manifest, cfg)
    save_checkpoint(args.out, model)
    return {"out": args.out, "steps": args.steps, "final_loss": log[-1][1] if log else None}


def cmd_refine(args) -> dict:
    _pin_torch_threads()
    from .refiner.checkpoint import load_checkpoint
    from .refiner.refine import refine_video

    model = load_checkpoint(args.model)
    sample = load_sample(args.sample)
    refined = refine_video(model, sample.corrupted, steps=args.steps, seed=args.seed)
    write_tensor(args.out, refined.frames)
    return {"out": args.out, "frames": int(refined.frames.shape[0])}


def cmd_update(args) -> dict:
    from .pipeline.update import ModelRefiner, OracleRefiner, UpdateConfig, reconstruct_update

    cloud = load_ply(args.ply)
    views = _load_views(args.views, args.cams)
    if bool(args.model) == bool(args.oracle_ply):
        raise ValueError("pass exactly one of --model or --oracle-ply")
    if args.model:
        _pin_torch_threads()
        from .refiner.checkpoint import load_checkpoint

        refiner = ModelRefiner(load_checkpoint(args.model), steps=args.ode_steps, seed=args.seed)
    else:
        refiner = OracleRefiner(load_ply(args.oracle_ply))
    cfg = UpdateConfig(
        per_segment_samples=args.per_segment,
        refine_ode_steps=args.ode_steps,
        update_iters=args.iters,
        seed=args.seed,
    )
    updated = reconstruct_update(cloud, views, refiner, cfg)
    write_ply(args.out, updated)
    return {"out": args.out, "iters": args.iters}


def cmd_eval(args) -> dict:
    from .pipeline.metrics import evaluate

    cloud = load_ply(args.ply)
    views = _load_views(args.views, args.cams)
    report = evaluate(cloud, views)
    if args.out:
        report.save(args.out)
    return report.to_dict()


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="splatflow")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--config", type=str, default=None, help="JSON file overriding flags")
        sp.add_argument("--json", action="store_true", help="emit machine-readable JSON on stdout")

    sp = sub.add_parser("render", help="rasterize buffer videos from a splat scene")
    sp.add_argument("--ply", required=True)
    sp.add_argument("--cams", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--modalities", default="color,alpha,depth,normal,uncert")
    sp.add_argument("--tile-size", type=int, default=16)
    sp.add_argument("--workers", type=int, default=1)
    common(sp)
    sp.set_defaults(func=cmd_render)

    sp = sub.add_parser("fit", help="optimize a splat scene against views")
    sp.add_argument("--ply-init", required=True)
    sp.add_argument("--views", required=True, help="GPBT tensor (T, H, W, 3)")
    sp.add_argument("--cams", required=True)
    sp.add_argument("--iters", type=int, default=2000)
    sp.add_argument("--lambda", type=float, default=0.2, dest="lambda")
    sp.add_argument("--out", required=True)
    sp.add_argument("--log", default=None, help="CSV loss log (step,loss,l1,dssim)")
    common(sp)
    sp.set_defaults(func=cmd_fit)

    sp = sub.add_parser("traject", help="interpolate a smooth camera path")
    sp.add_argument("--cams", required=True)
    sp.add_argument("--per-segment", type=int, default=8)
    sp.add_argument("--out", required=True)
    common(sp)
    sp.set_defaults(func=cmd_traject)

    sp = sub.add_parser("simulate", help="build a paired corrupted/clean dataset")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--retained", type=float, default=0.05)
    sp.add_argument("--degrade", default="none", choices=["none", "feedforward_synthetic"])
    sp.add_argument("--init-mode", default="points_from_scene",
                    choices=["points_from_scene", "random_points", "noisy_dense_points"])
    sp.add_argument("--clean-iters", type=int, default=2000)
    sp.add_argument("--corrupt-iters", type=int, default=None)
    sp.add_argument("--n-splats", type=int, default=None)
    sp.add_argument("--n-frames", type=int, default=None)
    sp.add_argument("--width", type=int, default=64)
    sp.add_argument("--height", type=int, default=64)
    sp.add_argument("--per-segment", type=int, default=8)
    sp.add_argument("--workers", type=int, default=1)
    common(sp)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("train-refiner", help="train the flow refiner on a dataset")
    sp.add_argument("--manifest", required=True)
    sp.add_argument("--dims", default="64x4x8", help="DxBLOCKSxHEADS")
    sp.add_argument("--steps", type=int, default=5000)
    sp.add_argument("--batch", type=int, default=1)
    sp.add_argument("--lr", type=float, default=2e-3)
    sp.add_argument("--ps", type=int, default=8)
    sp.add_argument("--pt", type=int, default=4)
    sp.add_argument("--checkpoint-every", type=int, default=0)
    sp.add_argument("--ga-only", action="store_true")
    sp.add_argument("--out", required=True)
    common(sp)
    sp.set_defaults(func=cmd_train_refiner)

    sp = sub.add_parser("refine", help="refine a sample's buffer video")
    sp.add_argument("--model", required=True)
    sp.add_argument("--sample", required=True, help="sample directory")
    sp.add_argument("--steps", type=int, default=50)
    sp.add_argument("--out", required=True)
    common(sp)
    sp.set_defaults(func=cmd_refine)

    sp = sub.add_parser("update", help="refine novel views and re-fit the scene")
    sp.add_argument("--ply", required=True)
    sp.add_argument("--views", required=True)
    sp.add_argument("--cams", required=True)
    sp.add_argument("--model", default=None)
    sp.add_argument("--oracle-ply", default=None)
    sp.add_argument("--per-segment", type=int, default=4)
    sp.add_argument("--ode-steps", type=int, default=50)
    sp.add_argument("--iters", type=int, default=1000)
    sp.add_argument("--out", required=True)
    common(sp)
    sp.set_defaults(func=cmd_update)

    sp = sub.add_parser("eval", help="score held-out views")
    sp.add_argument("--ply", required=True)
    sp.add_argument("--views", required=True)
    sp.add_argument("--cams", required=True)
    sp.add_argument("--out", default=None)
    common(sp)
    sp.set_defaults(func=cmd_eval)
    return p


def apply_config(args: argparse.Namespace) -> argparse.Namespace:
    if args.config:
        overrides = json.loads(Path(args.config).read_text())
        for key, value in overrides.items():
            setattr(args, key.replace("-", "_"), value)
    return args


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = apply_config(parser.parse_args(argv))
    try:
        result = args.func(args)
    except Exception as e:  # surface errors compactly; stack only via -X dev
        print(f"error: {e}", file=sys.stderr)
        return 1
    if args.json:
        print(json.dumps(result))
    else:
        for k, v in result.items():
            print(f"{k}: {v}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
