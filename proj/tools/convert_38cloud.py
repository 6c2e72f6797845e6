#!/usr/bin/env python3
"""Convert 38-Cloud training patches (per-band TIFFs) to QPR1 rasters.

Expected layout under ROOT (as distributed):
    train_blue/blue_<id>.TIF   train_green/green_<id>.TIF
    train_red/red_<id>.TIF     train_nir/nir_<id>.TIF
    train_gt/gt_<id>.TIF       (0 = clear, 255 = cloud)

Each patch becomes <OUT>/<id>.qpr:
    "QPR1" | width u32 | height u32 | blue, green, red, nir as float32 planes
    | u8 label plane (0/1), row-major, little-endian.

Band values are the raw 16-bit counts divided by --scale. Margin pixels are
those with all four bands equal to zero; they keep label 0.
"""

import argparse
import struct
import sys
from pathlib import Path

import numpy as np
from PIL import Image

BANDS = ("blue", "green", "red", "nir")


def read_plane(path):
    with Image.open(path) as im:
        return np.asarray(im, dtype=np.float64)


def encode_qpr(bands, labels):
    h, w = labels.shape
    out = [b"QPR1", struct.pack("<II", w, h)]
    for b in bands:
        if b.shape != (h, w):
            raise ValueError(f"band shape {b.shape} differs from label shape {(h, w)}")
        out.append(np.ascontiguousarray(b, dtype="<f4").tobytes())
    out.append(np.ascontiguousarray(labels, dtype=np.uint8).tobytes())
    return b"".join(out)


def convert_patch(root, patch_id, scale):
    bands = [read_plane(root / f"train_{b}" / f"{b}_{patch_id}.TIF") / scale for b in BANDS]
    gt = read_plane(root / "train_gt" / f"gt_{patch_id}.TIF")
    labels = (gt > 0).astype(np.uint8)
    return encode_qpr(bands, labels)


def patch_ids(root):
    prefix = "blue_"
    return sorted(p.stem[len(prefix):] for p in (root / "train_blue").glob(f"{prefix}*.TIF"))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("root", type=Path, help="dataset directory holding train_blue/ ... train_gt/")
    ap.add_argument("out", type=Path, help="output directory for .qpr files")
    ap.add_argument("--scale", type=float, default=65535.0, help="divisor applied to raw band counts")
    ap.add_argument("--limit", type=int, default=0, help="convert at most this many patches (0 = all)")
    args = ap.parse_args(argv)

    ids = patch_ids(args.root)
    if args.limit:
        ids = ids[: args.limit]
    if not ids:
        print(f"no blue_*.TIF patches under {args.root / 'train_blue'}", file=sys.stderr)
        return 2
    args.out.mkdir(parents=True, exist_ok=True)
    for pid in ids:
        (args.out / f"{pid}.qpr").write_bytes(convert_patch(args.root, pid, args.scale))
    print(f"wrote {len(ids)} patches to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
