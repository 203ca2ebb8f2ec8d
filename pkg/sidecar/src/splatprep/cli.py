"""Command-line interface: track, embed-regions, serve."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .encoder import DEFAULT_DIM, MockImageEncoder
from .job import DEFAULT_REPLICATES, PreprocessJob
from .labelmaps import read_label_map
from .regions import embed_regions, write_embeddings
from .track import segment_and_track


def cmd_track(args) -> int:
    job = PreprocessJob(
        images=tuple(args.images),
        out_dir=Path(args.out),
        replicates=args.replicates,
        tracker_cmd=args.tracker_cmd,
    )
    written = segment_and_track(job)
    total = sum(len(row) for row in written)
    print(f"wrote {total} label maps ({job.num_views} views x {job.replicates}) to {job.out_dir}")
    return 0


def cmd_embed_regions(args) -> int:
    from PIL import Image
    import numpy as np

    images = [np.asarray(Image.open(p).convert("RGB")) for p in args.images]
    maps = [read_label_map(Path(p)) for p in args.maps]
    encoder = MockImageEncoder(dim=args.dim, seed=args.seed)
    payload = embed_regions(images, maps, encoder=encoder, masked=not args.plain_crop)
    write_embeddings(Path(args.out), payload)
    print(f"{len(payload['records'])} region embeddings (dim {payload['dim']}) -> {args.out}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .server import create_app

    host, _, port = args.bind.partition(":")
    app = create_app(dim=args.dim, seed=args.seed)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8100))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="splatprep", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("track", help="segment + track the input views into replicated label maps")
    sp.add_argument("images", nargs="+", help="input RGB images, one per view")
    sp.add_argument("--out", required=True, help="output directory")
    sp.add_argument("--replicates", type=int, default=DEFAULT_REPLICATES)
    sp.add_argument(
        "--tracker-cmd",
        help="external tracker command template with {out_dir} and {images}; "
        "default: built-in color tracker",
    )
    sp.set_defaults(func=cmd_track)

    sp = sub.add_parser("embed-regions", help="encode each labeled region of the voted maps")
    sp.add_argument("images", nargs="+", help="input RGB images, one per view")
    sp.add_argument("--maps", nargs="+", required=True, help="voted label maps, one per view")
    sp.add_argument("--out", required=True, help="embeddings JSON output path")
    sp.add_argument("--dim", type=int, default=DEFAULT_DIM)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--plain-crop", action="store_true", help="crop without masking the background")
    sp.set_defaults(func=cmd_embed_regions)

    sp = sub.add_parser("serve", help="run the /embed service")
    sp.add_argument("--bind", default="127.0.0.1:8100")
    sp.add_argument("--dim", type=int, default=DEFAULT_DIM)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_serve)

    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, RuntimeError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
