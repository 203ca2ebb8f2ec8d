"""On-disk formats and pipeline plumbing.

Scene files are fixed-stride little-endian binaries (magic "SLGS") so the
Gaussian block can be memory-mapped; bank files are versioned human-readable
text with base64 embeddings; label maps are 16-bit grayscale PNGs.
"""
from __future__ import annotations

import base64
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from .bank import BankEntry, MemoryBank
from .scene import (
    Embedding,
    FeatureMap,
    GaussianCloud,
    LabelMap,
    PinholeCamera,
    validate_scene,
)

SCENE_MAGIC = b"SLGS"
SCENE_VERSION = 1
BANK_HEADER = "semsplat-bank v1"

# per-Gaussian record: mean 3, scale 3, quat 4, opacity 1, rgb 3, feature 3
RECORD_FLOATS = 17


class FormatError(ValueError):
    pass


@dataclass
class SceneBundle:
    """A full loadable scene: splats, input cameras, label maps, metadata."""

    name: str
    gaussians: GaussianCloud
    cameras: list[PinholeCamera]
    label_maps: list[LabelMap | None] = field(default_factory=list)
    bank: MemoryBank | None = None
    seed: int = 0
    pixel_aligned: bool = False

    def __post_init__(self):
        if self.label_maps and len(self.label_maps) != len(self.cameras):
            raise FormatError("label_maps must pair up with cameras")
        if self.pixel_aligned:
            expected = sum(c.width * c.height for c in self.cameras)
            if len(self.gaussians) != expected:
                raise FormatError(
                    f"pixel-aligned scene needs {expected} gaussians, has {len(self.gaussians)}"
                )


def assign_features(
    cloud: GaussianCloud, cameras: list[PinholeCamera], label_images: list[FeatureMap]
) -> GaussianCloud:
    """Set each pixel-aligned Gaussian's semantic feature from its originating
    pixel, view-major and row-major."""
    if len(cameras) != len(label_images):
        raise FormatError("one label image per camera required")
    for cam, img in zip(cameras, label_images):
        if (img.height, img.width) != (cam.height, cam.width):
            raise FormatError("label image dimensions must match the camera")
    expected = sum(c.width * c.height for c in cameras)
    if len(cloud) != expected:
        raise FormatError(
            f"gaussian count mismatch: expected {expected} (sum of view pixels), got {len(cloud)}"
        )
    features = np.concatenate([img.values.reshape(-1, 3) for img in label_images], axis=0)
    return cloud.with_features(features)


def write_scene(path, bundle: SceneBundle) -> None:
    err = validate_scene(bundle.gaussians)
    if err is not None:
        raise FormatError(f"refusing to write invalid scene: {err}")
    name_bytes = bundle.name.encode("utf-8")
    parts = [
        SCENE_MAGIC,
        struct.pack("<I", SCENE_VERSION),
        struct.pack("<H", len(name_bytes)),
        name_bytes,
        struct.pack("<Q", bundle.seed),
        struct.pack("<B", 1 if bundle.pixel_aligned else 0),
        struct.pack("<I", len(bundle.cameras)),
    ]
    label_maps = bundle.label_maps or [None] * len(bundle.cameras)
    for cam, lm in zip(bundle.cameras, label_maps):
        parts.append(struct.pack("<4d", cam.fx, cam.fy, cam.cx, cam.cy))
        parts.append(struct.pack("<II", cam.width, cam.height))
        parts.append(cam.world_to_camera.astype("<f8").tobytes())
        parts.append(struct.pack("<B", 0 if lm is None else 1))
        if lm is not None:
            if (lm.height, lm.width) != (cam.height, cam.width):
                raise FormatError("label map dimensions must match the camera")
            parts.append(lm.labels.astype("<u2").tobytes())
    g = bundle.gaussians
    parts.append(struct.pack("<Q", len(g)))
    records = np.concatenate(
        [g.means, g.scales, g.rotations, g.opacities[:, None], g.colors, g.features],
        axis=1,
    ).astype("<f4")
    parts.append(records.tobytes())
    Path(path).write_bytes(b"".join(parts))


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise FormatError("truncated scene file")
        out = self.data[self.pos : self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def read_scene(path) -> SceneBundle:
    r = _Reader(Path(path).read_bytes())
    if r.take(4) != SCENE_MAGIC:
        raise FormatError("bad magic: not a scene file")
    (version,) = r.unpack("<I")
    if version != SCENE_VERSION:
        raise FormatError(f"unsupported scene version {version}")
    (name_len,) = r.unpack("<H")
    name = r.take(name_len).decode("utf-8")
    (seed,) = r.unpack("<Q")
    (pixel_aligned,) = r.unpack("<B")
    (view_count,) = r.unpack("<I")
    cameras = []
    label_maps: list[LabelMap | None] = []
    for _ in range(view_count):
        fx, fy, cx, cy = r.unpack("<4d")
        width, height = r.unpack("<II")
        w2c = np.frombuffer(r.take(16 * 8), dtype="<f8").reshape(4, 4)
        cameras.append(
            PinholeCamera(fx=fx, fy=fy, cx=cx, cy=cy, width=width, height=height, world_to_camera=w2c)
        )
        (has_labels,) = r.unpack("<B")
        if has_labels:
            labels = np.frombuffer(r.take(width * height * 2), dtype="<u2").reshape(height, width)
            label_maps.append(LabelMap(labels))
        else:
            label_maps.append(None)
    (count,) = r.unpack("<Q")
    raw = np.frombuffer(r.take(count * RECORD_FLOATS * 4), dtype="<f4").reshape(
        count, RECORD_FLOATS
    )
    cloud = GaussianCloud(
        means=raw[:, 0:3],
        scales=raw[:, 3:6],
        rotations=raw[:, 6:10],
        opacities=raw[:, 10],
        colors=raw[:, 11:14],
        features=raw[:, 14:17],
    )
    err = validate_scene(cloud)
    if err is not None:
        raise FormatError(f"scene file violates invariants: {err}")
    return SceneBundle(
        name=name,
        gaussians=cloud,
        cameras=cameras,
        label_maps=label_maps,
        seed=seed,
        pixel_aligned=bool(pixel_aligned),
    )


def write_bank(path, bank: MemoryBank) -> None:
    lines = [
        BANK_HEADER,
        f"seed {bank.seed}",
        f"dim {bank.dim}",
        f"lattice_m {bank.lattice_m}",
        f"entries {len(bank)}",
    ]
    for e in bank.entries:
        id_txt = " ".join(f"{x:.17g}" for x in e.id)
        lines.append(f"entry {e.label} {id_txt} {len(e.views)}")
        for emb in e.views:
            if emb.is_sentinel:
                lines.append("view absent")
            else:
                payload = base64.b64encode(emb.values.astype("<f4").tobytes()).decode("ascii")
                lines.append(f"view {payload}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_bank(path) -> MemoryBank:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != BANK_HEADER:
        raise FormatError("not a bank file")
    header = {}
    i = 1
    for key in ("seed", "dim", "lattice_m", "entries"):
        k, v = lines[i].split()
        if k != key:
            raise FormatError(f"expected {key} line, got {lines[i]!r}")
        header[key] = int(v)
        i += 1
    entries = []
    for _ in range(header["entries"]):
        tok = lines[i].split()
        if tok[0] != "entry":
            raise FormatError(f"expected entry line, got {lines[i]!r}")
        label = int(tok[1])
        eid = np.array([float(t) for t in tok[2:5]])
        num_views = int(tok[5])
        i += 1
        views = []
        for _ in range(num_views):
            tok = lines[i].split()
            if tok[0] != "view":
                raise FormatError(f"expected view line, got {lines[i]!r}")
            if tok[1] == "absent":
                views.append(Embedding(np.zeros(header["dim"])))
            else:
                values = np.frombuffer(base64.b64decode(tok[1]), dtype="<f4")
                views.append(Embedding(values.astype(np.float64)))
            i += 1
        entries.append(BankEntry(label=label, id=eid, views=tuple(views)))
    return MemoryBank(
        dim=header["dim"],
        lattice_m=header["lattice_m"],
        seed=header["seed"],
        entries=tuple(entries),
    )


def write_label_map(path, lm: LabelMap) -> None:
    Image.fromarray(lm.labels.astype(np.uint16)).save(path)


def read_label_map(path) -> LabelMap:
    arr = np.array(Image.open(path))
    if arr.ndim != 2:
        raise FormatError("label map PNG must be single-channel")
    return LabelMap(arr.astype(np.uint16))
