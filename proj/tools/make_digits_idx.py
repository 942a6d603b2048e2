#!/usr/bin/env python3
# Copyright 2026 The daeconf Authors
# Licensed under the Apache License, Version 2.0 (see LICENSE file)
"""Writes an MNIST-layout IDX fixture built from scikit-learn's 8x8 digits.

Each 8x8 image (values 0..16) is bilinearly upsampled to 20x20, rescaled to
0..255 and centred on a 28x28 canvas, the way MNIST digits sit in their frame.
A fixed-seed shuffle splits the 1797 samples into train and test sets.
"""

import argparse
import pathlib
import struct

import numpy as np
from scipy import ndimage
from sklearn.datasets import load_digits


def write_idx(path, array):
    array = np.ascontiguousarray(array, dtype=np.uint8)
    header = struct.pack(">BBBB", 0, 0, 0x08, array.ndim)
    header += b"".join(struct.pack(">I", d) for d in array.shape)
    path.write_bytes(header + array.tobytes())


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("out_dir", type=pathlib.Path)
    ap.add_argument("--test", type=int, default=500, help="number of test samples")
    ap.add_argument("--seed", type=int, default=20170609)
    args = ap.parse_args()

    digits = load_digits()
    images = np.zeros((len(digits.images), 28, 28), dtype=np.uint8)
    for i, img in enumerate(digits.images):
        big = ndimage.zoom(img.astype(np.float64), 20 / 8, order=1)
        images[i, 4:24, 4:24] = np.clip(np.rint(big / 16.0 * 255.0), 0, 255)
    labels = digits.target.astype(np.uint8)

    order = np.random.default_rng(args.seed).permutation(len(labels))
    test, train = order[: args.test], order[args.test :]

    args.out_dir.mkdir(parents=True, exist_ok=True)
    write_idx(args.out_dir / "train-images-idx3-ubyte", images[train])
    write_idx(args.out_dir / "train-labels-idx1-ubyte", labels[train])
    write_idx(args.out_dir / "t10k-images-idx3-ubyte", images[test])
    write_idx(args.out_dir / "t10k-labels-idx1-ubyte", labels[test])
    print(f"wrote {len(train)} train / {len(test)} test samples to {args.out_dir}")


if __name__ == "__main__":
    main()
