"""Dataset builder: many paired samples on disk plus a JSON manifest.

Layout per sample directory:

    sample_00000/
      corrupted_color.gpbt  corrupted_alpha.gpbt  corrupted_depth.gpbt
      corrupted_normal.gpbt corrupted_uncert.gpbt clean_color.gpbt
      cameras.json          meta.json

The manifest lists relative paths and metadata for every completed
sample.  Sample seeds derive from (master seed, index), so resuming or
parallelizing never changes a sample's content.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict
from pathlib import Path

from ..core.cameras_json import load_cameras, save_cameras
from ..core.tensorio import read_tensor, write_tensor
from ..core.types import VideoTensor
from ..optim.fit import FitDivergence
from ..raster.render import GPVideo
from ..seeds import derive_seed
from .pairs import PairedSample, SimConfig, generate_pair

MODALITY_FILES = {
    "color": "corrupted_color.gpbt",
    "alpha": "corrupted_alpha.gpbt",
    "depth": "corrupted_depth.gpbt",
    "normal": "corrupted_normal.gpbt",
    "uncertainty": "corrupted_uncert.gpbt",
}
CLEAN_FILE = "clean_color.gpbt"


def sample_dir_name(index: int) -> str:
    return f"sample_{index:05d}"


def save_sample(sample: PairedSample, sample_dir: Path) -> None:
    sample_dir.mkdir(parents=True, exist_ok=True)
    for modality, fname in MODALITY_FILES.items():
        write_tensor(sample_dir / fname, getattr(sample.corrupted, modality).frames)
    write_tensor(sample_dir / CLEAN_FILE, sample.clean.frames)
    save_cameras(sample_dir / "cameras.json", sample.cameras)
    (sample_dir / "meta.json").write_text(json.dumps(sample.meta, indent=1))


def load_sample(sample_dir: str | Path) -> PairedSample:
    sample_dir = Path(sample_dir)
    vids = {
        modality: VideoTensor(read_tensor(sample_dir / fname))
        for modality, fname in MODALITY_FILES.items()
    }
    return PairedSample(
        corrupted=GPVideo(**vids),
        clean=VideoTensor(read_tensor(sample_dir / CLEAN_FILE)),
        cameras=load_cameras(sample_dir / "cameras.json"),
        meta=json.loads((sample_dir / "meta.json").read_text()),
    )


def _build_one(args: tuple[int, SimConfig, str]) -> tuple[int, str | None]:
    """Worker: build sample `index`; returns (index, error or None)."""
    index, cfg, out_dir = args
    sample_dir = Path(out_dir) / sample_dir_name(index)
    if (sample_dir / "meta.json").exists():
        return index, None
    try:
        sample = generate_pair(derive_seed(cfg.seed, "sample", index), cfg)
        save_sample(sample, sample_dir)
        return index, None
    except (FitDivergence, OSError) as e:
        return index, f"{type(e).__name__}: {e}"


def build_dataset(
    n_samples: int,
    cfg: SimConfig,
    out_dir: str | Path,
    workers: int = 1,
) -> dict:
    """Generate up to n_samples paired samples; returns the manifest.

    Resumable: sample directories that already contain meta.json are
    kept as-is.  Failures are logged into the manifest and skipped.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    jobs = [(i, cfg, str(out_dir)) for i in range(n_samples)]

    errors: dict[int, str] = {}
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for index, err in pool.map(_build_one, jobs):
                if err:
                    errors[index] = err
    else:
        for job in jobs:
            index, err = _build_one(job)
            if err:
                errors[index] = err

    samples = []
    for i in range(n_samples):
        sdir = out_dir / sample_dir_name(i)
        if not (sdir / "meta.json").exists():
            continue
        meta = json.loads((sdir / "meta.json").read_text())
        samples.append({
            "id": i,
            "dir": sample_dir_name(i),
            "tensors": {**MODALITY_FILES, "clean": CLEAN_FILE},
            "cameras": "cameras.json",
            "meta": meta,
        })

    manifest = {
        "version": 1,
        "config": _config_dict(cfg),
        "n_requested": n_samples,
        "n_samples": len(samples),
        "skipped": [{"id": i, "error": msg} for i, msg in sorted(errors.items())],
        "samples": samples,
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=1))
    return manifest


def _config_dict(cfg: SimConfig) -> dict:
    d = asdict(cfg)
    d["raster"] = asdict(cfg.raster)
    return d


def load_manifest(path: str | Path) -> dict:
    return json.loads(Path(path).read_text())
