#!/usr/bin/env python3
"""Place MNIST IDX files where the default config expects them.

The library never downloads anything; put the data in place once with one of
these routes:

1. Official files. Download the four gzipped IDX files (train + t10k) from a
   MNIST mirror, then:

       python3 scripts/prepare_mnist.py --idx-gz DIR_WITH_GZ_FILES --out data/mnist

   This decompresses train-images/train-labels into the default pair and
   keeps t10k files alongside (point test_images_path/test_labels_path at
   them in your config to use the official test split).

2. The `mnist` npm package, which bundles 10,000 genuine MNIST digits as
   JSON (pixel values are the originals divided by 255 and rounded to three
   decimals, so round(v * 255) recovers the exact bytes):

       npm pack mnist && tar xzf mnist-1.1.0.tgz
       python3 scripts/prepare_mnist.py --npm-package package --out data/mnist

   The resulting single pair holds all 10k samples; the experiment config
   splits it into disjoint stratified train/test subsets.
"""

from __future__ import annotations

import argparse
import gzip
import json
import shutil
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from snnfault.dataset import load_idx, write_idx  # noqa: E402

OFFICIAL = {
    "train-images-idx3-ubyte.gz": "images-idx3-ubyte",
    "train-labels-idx1-ubyte.gz": "labels-idx1-ubyte",
    "t10k-images-idx3-ubyte.gz": "t10k-images-idx3-ubyte",
    "t10k-labels-idx1-ubyte.gz": "t10k-labels-idx1-ubyte",
}


def from_idx_gz(src: Path, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    for gz_name, target in OFFICIAL.items():
        gz = src / gz_name
        if not gz.exists():
            print(f"skipping {gz_name} (not found)")
            continue
        with gzip.open(gz, "rb") as fin, open(out / target, "wb") as fout:
            shutil.copyfileobj(fin, fout)
        print(f"wrote {out / target}")


def from_npm_package(src: Path, out: Path) -> None:
    digits_dir = src / "src" / "digits"
    if not digits_dir.exists():
        raise SystemExit(f"{digits_dir} not found; unpack the npm mnist tarball first")
    images = []
    labels = []
    for digit in range(10):
        data = json.loads((digits_dir / f"{digit}.json").read_text())["data"]
        arr = np.asarray(data, dtype=np.float64).reshape(-1, 784)
        images.append(np.rint(arr * 255.0).astype(np.uint8))
        labels.append(np.full(arr.shape[0], digit, dtype=np.uint8))
        print(f"digit {digit}: {arr.shape[0]} samples")
    all_images = np.concatenate(images)
    all_labels = np.concatenate(labels)
    out.mkdir(parents=True, exist_ok=True)
    write_idx(
        all_images, all_labels, out / "images-idx3-ubyte", out / "labels-idx1-ubyte"
    )
    print(f"wrote {out / 'images-idx3-ubyte'} ({all_images.shape[0]} samples)")
    loaded = load_idx(out / "images-idx3-ubyte", out / "labels-idx1-ubyte")
    assert loaded.count == all_images.shape[0]
    print("verified:", dict(enumerate(loaded.class_counts().tolist())))


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    group = parser.add_mutually_exclusive_group(required=True)
    group.add_argument("--idx-gz", type=Path, help="directory with official .gz files")
    group.add_argument("--npm-package", type=Path, help="unpacked npm mnist package dir")
    parser.add_argument("--out", type=Path, default=Path("data/mnist"))
    args = parser.parse_args()
    if args.idx_gz:
        from_idx_gz(args.idx_gz, args.out)
    else:
        from_npm_package(args.npm_package, args.out)


if __name__ == "__main__":
    main()
