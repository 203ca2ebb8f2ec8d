"""Command-line interface for the full pipeline: associate, bank, assign,
render, query, serve, bench."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .association import ReplicatedSequence, compact_labels, consistency_report, vote
from .bank import build_bank, label_image
from .bench import bench_query, bench_render, format_table
from .embedder import EmbedderError, MockEmbedder, RemoteEmbedder
from .formats import (
    FormatError,
    assign_features,
    read_bank,
    read_label_map,
    read_scene,
    write_bank,
    write_label_map,
    write_scene,
)
from .query import (
    DEFAULT_CANONICAL_PHRASES,
    DEFAULT_THRESHOLD,
    QuerySpec,
    localize,
    relevancy_map,
    segment,
    segment_multiclass,
)
from .rasterize import DEFAULT_TILE_SIZE, render_tiled
from .scene import Embedding, PinholeCamera


class CliError(RuntimeError):
    def __init__(self, message: str, code: int = 1):
        super().__init__(message)
        self.code = code


def _camera_from_json(path) -> PinholeCamera:
    spec = json.loads(Path(path).read_text())
    w2c = np.asarray(spec["world_to_camera"], dtype=np.float64).reshape(4, 4)
    return PinholeCamera(
        fx=spec["fx"],
        fy=spec["fy"],
        cx=spec["cx"],
        cy=spec["cy"],
        width=spec["width"],
        height=spec["height"],
        world_to_camera=w2c,
    )


def _resolve_camera(args, bundle=None) -> PinholeCamera:
    if args.camera:
        return _camera_from_json(args.camera)
    if args.view is not None:
        if bundle is None or args.view >= len(bundle.cameras):
            raise CliError(f"scene has no input view {args.view}")
        return bundle.cameras[args.view]
    raise CliError("pass --camera FILE or --view N")


def _save_png(path, arr) -> None:
    from PIL import Image

    Image.fromarray(arr).save(path)


def cmd_associate(args) -> int:
    paths = args.maps
    if len(paths) % args.views != 0:
        raise CliError(f"{len(paths)} maps do not split into {args.views} views")
    k = len(paths) // args.views
    maps = [read_label_map(p) for p in paths]
    seq = ReplicatedSequence(
        maps=tuple(tuple(maps[v * k + j] for j in range(k)) for v in range(args.views))
    )
    voted = vote(seq)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for i, lm in enumerate(voted):
        write_label_map(out_dir / f"voted_view{i}.png", lm)
    report = consistency_report(voted)
    for label, counts in report.items():
        present = ["yes" if c else "no" for c in counts]
        print(f"label {label}: pixels per view {counts}, present {present}")
    print(f"wrote {len(voted)} voted maps to {out_dir}")
    return 0


def cmd_bank(args) -> int:
    maps = [read_label_map(p) for p in args.maps]
    remapped, table = compact_labels(maps)
    spec = json.loads(Path(args.embeddings).read_text())
    dim = int(spec["dim"])
    embeddings = {}
    for rec in spec["records"]:
        old_label = int(rec["label"])
        if old_label not in table:
            print(f"warning: embedding for unused label {old_label} ignored", file=sys.stderr)
            continue
        embeddings[(int(rec["view"]), table[old_label])] = Embedding(
            np.asarray(rec["values"], dtype=np.float64)
        )
    bank = build_bank(remapped, embeddings, seed=args.seed, dim=dim, num_views=len(maps))
    write_bank(args.out, bank)
    out_dir = Path(args.remapped_dir) if args.remapped_dir else Path(args.out).parent
    out_dir.mkdir(parents=True, exist_ok=True)
    for i, lm in enumerate(remapped):
        write_label_map(out_dir / f"compact_view{i}.png", lm)
    print(f"bank with {len(bank)} entries (lattice_m={bank.lattice_m}) -> {args.out}")
    return 0


def cmd_assign(args) -> int:
    bundle = read_scene(args.scene)
    bank = read_bank(args.bank)
    if args.maps:
        maps = [read_label_map(p) for p in args.maps]
    else:
        maps = bundle.label_maps
        if not maps or any(m is None for m in maps):
            raise CliError("scene has no embedded label maps; pass --maps")
    images = [label_image(m, bank) for m in maps]
    bundle.gaussians = assign_features(bundle.gaussians, bundle.cameras, images)
    bundle.label_maps = maps
    write_scene(args.out, bundle)
    print(f"assigned features for {len(bundle.gaussians)} gaussians -> {args.out}")
    return 0


def cmd_render(args) -> int:
    bundle = read_scene(args.scene)
    cam = _resolve_camera(args, bundle)
    out = render_tiled(
        bundle.gaussians, cam, tile_size=args.tile_size, backend=args.backend
    )
    rgb8 = np.clip(out.rgb.values * 255.0 + 0.5, 0, 255).astype(np.uint8)
    _save_png(args.out, rgb8)
    if args.feature_out:
        np.save(args.feature_out, out.feature.values.astype(np.float32))
    print(f"rendered {cam.width}x{cam.height} -> {args.out}")
    return 0


def _query_embeddings(args, dim: int) -> list[Embedding]:
    if args.embedding_file:
        arr = np.atleast_2d(np.load(args.embedding_file))
        return [Embedding(row).normalized() for row in arr.astype(np.float64)]
    texts = args.text or []
    if not texts:
        raise CliError("pass --text or --embedding-file")
    if args.embedder_url:
        try:
            return RemoteEmbedder(args.embedder_url).embed(texts)
        except EmbedderError as exc:
            raise CliError(str(exc), code=1) from exc
    if args.mock_embedder:
        return MockEmbedder(dim=dim).embed(texts)
    raise CliError(
        "--text needs --embedder-url (or --mock-embedder for offline use)", code=2
    )


def cmd_query(args) -> int:
    bundle = read_scene(args.scene)
    bank_path = args.bank or Path(args.scene).with_suffix(".bank")
    bank = read_bank(bank_path)
    cam = _resolve_camera(args, bundle)
    embs = _query_embeddings(args, bank.dim)
    if args.embedder_url:
        canon = RemoteEmbedder(args.embedder_url).embed(list(DEFAULT_CANONICAL_PHRASES))
    else:
        canon = MockEmbedder(dim=bank.dim).embed(list(DEFAULT_CANONICAL_PHRASES))
    queries = [
        QuerySpec(query_embedding=e, canonical_embeddings=tuple(canon), threshold=args.threshold)
        for e in embs
    ]
    out = render_tiled(bundle.gaussians, cam, tile_size=args.tile_size)
    if args.mode == "multiclass":
        classes = segment_multiclass(out.feature, bank, queries)
        if args.out:
            _save_png(args.out, classes.astype(np.uint16))
        counts = dict(zip(*(x.tolist() for x in np.unique(classes, return_counts=True))))
        print(f"classes: {counts}")
        return 0
    if len(queries) != 1:
        raise CliError(f"mode {args.mode} takes exactly one query")
    rm = relevancy_map(out.feature, bank, queries[0])
    if args.mode == "locate":
        x, y = localize(rm)
        print(f"localized at ({x}, {y}), score {rm.scores[y, x]:.4f}")
        return 0
    mask = segment(rm, args.threshold)
    if args.out:
        _save_png(args.out, (mask * 255).astype(np.uint8))
    print(f"segment: {int(mask.sum())} pixels above {args.threshold}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    host, _, port = args.bind.partition(":")
    app = create_app(
        scenes_dir=args.scenes_dir,
        embedder_url=args.embedder_url,
        threshold=args.threshold,
        tile_size=args.tile_size,
        use_mock_embedder=args.mock_embedder,
    )
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8000))
    return 0


def cmd_bench(args) -> int:
    backends = [args.backend] if args.backend else None
    reports = [
        bench_render(
            n_gaussians=args.gaussians,
            tile_size=args.tile_size,
            runs=args.runs,
            backends=backends,
        ),
        bench_query(runs=args.runs, backends=backends),
    ]
    for report in reports:
        print(format_table(report))
    if args.out:
        Path(args.out).write_text(json.dumps(reports, indent=2))
        print(f"wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="semsplat", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("associate", help="vote over replicated label maps")
    sp.add_argument("maps", nargs="+", help="label-map PNGs, view-major order")
    sp.add_argument("--views", type=int, default=2)
    sp.add_argument("--out", required=True, help="output directory")
    sp.set_defaults(func=cmd_associate)

    sp = sub.add_parser("bank", help="build and persist the memory bank")
    sp.add_argument("maps", nargs="+", help="voted label-map PNGs, one per view")
    sp.add_argument("--embeddings", required=True, help="per-(view,label) embeddings JSON")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True, help="bank output path")
    sp.add_argument("--remapped-dir", help="where to write compacted label maps")
    sp.set_defaults(func=cmd_bank)

    sp = sub.add_parser("assign", help="assign lattice-ID features to pixel-aligned gaussians")
    sp.add_argument("--scene", required=True)
    sp.add_argument("--bank", required=True)
    sp.add_argument("--maps", nargs="*", help="compacted label maps (default: embedded)")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_assign)

    sp = sub.add_parser("render", help="render RGB (and optionally features)")
    sp.add_argument("--scene", required=True)
    sp.add_argument("--camera", help="camera JSON file")
    sp.add_argument("--view", type=int, help="use input view N's camera")
    sp.add_argument("--out", required=True)
    sp.add_argument("--feature-out", help="save feature map as .npy")
    sp.add_argument("--tile-size", type=int, default=DEFAULT_TILE_SIZE)
    sp.add_argument("--backend", choices=["numba", "numpy"])
    sp.set_defaults(func=cmd_render)

    sp = sub.add_parser("query", help="open-vocabulary query against a scene")
    sp.add_argument("--scene", required=True)
    sp.add_argument("--bank", help="bank file (default: scene path with .bank)")
    sp.add_argument("--camera", help="camera JSON file")
    sp.add_argument("--view", type=int)
    sp.add_argument("--mode", choices=["locate", "segment", "multiclass"], default="locate")
    sp.add_argument("--text", action="append", help="query text (repeat for multiclass)")
    sp.add_argument("--embedding-file", help=".npy with one embedding per row")
    sp.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD)
    sp.add_argument("--embedder-url")
    sp.add_argument("--mock-embedder", action="store_true")
    sp.add_argument("--tile-size", type=int, default=DEFAULT_TILE_SIZE)
    sp.add_argument("--out", help="output PNG for segment/multiclass")
    sp.set_defaults(func=cmd_query)

    sp = sub.add_parser("serve", help="run the HTTP service")
    sp.add_argument("--scenes-dir", required=True)
    sp.add_argument("--bind", default="127.0.0.1:8000")
    sp.add_argument("--embedder-url")
    sp.add_argument("--mock-embedder", action="store_true")
    sp.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD)
    sp.add_argument("--tile-size", type=int, default=DEFAULT_TILE_SIZE)
    sp.set_defaults(func=cmd_serve)

    sp = sub.add_parser("bench", help="latency tables for render and query")
    sp.add_argument("--gaussians", type=int, default=100_000)
    sp.add_argument("--tile-size", type=int, default=DEFAULT_TILE_SIZE)
    sp.add_argument("--runs", type=int, default=5)
    sp.add_argument("--backend", choices=["numba", "numpy"])
    sp.add_argument("--out", help="write JSON report")
    sp.set_defaults(func=cmd_bench)

    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (FormatError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
