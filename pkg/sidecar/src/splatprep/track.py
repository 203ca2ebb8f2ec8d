"""Segmentation + mask propagation over the replicated frame sequence.

The real models (promptable segmenter, video mask tracker) are external;
the tracker is a pluggable command so any checkpoint can slot in. The
built-in fallback is a deterministic color-quantization tracker that keeps
one label namespace across every view -- adequate for synthetic scenes and
for exercising the downstream pipeline without any model weights.

Each view's tracked map is replicated K times (a deterministic tracker on
duplicated frames yields identical outputs, so replication after tracking
is equivalent and much cheaper), producing the V x K label-map files the
engine's voting step expects.
"""
from __future__ import annotations

import shlex
import subprocess
import tempfile
from pathlib import Path

import numpy as np

from .job import PreprocessJob
from .labelmaps import read_label_map, write_label_map

QUANT_STEP = 32  # RGB quantization bucket width for the built-in tracker


def color_track(images: list[np.ndarray]) -> list[np.ndarray]:
    """Built-in tracker: label = rank of the pixel's quantized RGB color in
    the palette shared across all views; the most frequent color overall is
    the background (label 0). Deterministic and namespace-consistent."""
    quantized = [img.astype(np.int32) // QUANT_STEP for img in images]
    flat = np.concatenate([q.reshape(-1, 3) for q in quantized])
    palette, counts = np.unique(flat, axis=0, return_counts=True)
    # background first, then remaining colors in lexicographic palette order
    bg = int(np.argmax(counts))
    order = [bg] + [i for i in range(len(palette)) if i != bg]
    rank = np.empty(len(palette), dtype=np.uint16)
    rank[order] = np.arange(len(palette), dtype=np.uint16)
    keys = {tuple(c): rank[i] for i, c in enumerate(palette)}
    out = []
    for q in quantized:
        labels = np.empty(q.shape[:2], dtype=np.uint16)
        for (c0, c1, c2), label in keys.items():
            labels[(q[..., 0] == c0) & (q[..., 1] == c1) & (q[..., 2] == c2)] = label
        out.append(labels)
    return out


def _run_external(cmd_template: str, images: tuple[Path, ...]) -> list[np.ndarray]:
    """Run the configured tracker command once over all views.

    The template gets {out_dir} and {images} substituted; the command must
    write one `view{v}.png` 16-bit label map per input, sharing a single
    label namespace across views.
    """
    with tempfile.TemporaryDirectory(prefix="splatprep-track-") as tmp:
        cmd = cmd_template.format(
            out_dir=shlex.quote(tmp),
            images=" ".join(shlex.quote(str(p)) for p in images),
        )
        proc = subprocess.run(cmd, shell=True, capture_output=True, text=True)
        if proc.returncode != 0:
            raise RuntimeError(
                f"tracker command failed ({proc.returncode}): {proc.stderr.strip()}"
            )
        maps = []
        for v in range(len(images)):
            path = Path(tmp) / f"view{v}.png"
            if not path.is_file():
                raise RuntimeError(f"tracker did not produce {path.name}")
            maps.append(read_label_map(path))
        return maps


def segment_and_track(job: PreprocessJob) -> list[list[Path]]:
    """Produce the V x K replicated label maps for the engine's voting step.

    Returns paths grouped per view ([view][replicate]), written to
    job.out_dir as view{v}_rep{k}.png.
    """
    if job.tracker_cmd:
        tracked = _run_external(job.tracker_cmd, job.images)
    else:
        tracked = color_track(job.load_images())
    width, height = job.image_size
    for v, labels in enumerate(tracked):
        if labels.shape != (height, width):
            raise RuntimeError(
                f"tracker output for view {v} is {labels.shape[::-1]}, "
                f"input is {(width, height)}"
            )
    job.out_dir.mkdir(parents=True, exist_ok=True)
    out: list[list[Path]] = []
    for v, labels in enumerate(tracked):
        row = []
        for k in range(job.replicates):
            path = job.out_dir / f"view{v}_rep{k}.png"
            write_label_map(path, labels)
            row.append(path)
        out.append(row)
    return out
