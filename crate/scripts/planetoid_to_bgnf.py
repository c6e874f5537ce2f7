#!/usr/bin/env python3
"""Convert the raw Planetoid citation files into the bigcn dataset format.

Input: a directory holding ind.<name>.{x,y,tx,ty,allx,ally,graph,test.index},
as published with the Planetoid benchmark (Cora, CiteSeer, PubMed).

Output directory contents:
  manifest.json   name, file names, node/feature/class counts
  edges.txt       "u v" per line, 0-indexed, each undirected edge once
  features.bin    b"BGNF", u32 N, u32 d (little-endian), N*d float32 row-major
  labels.txt      one class index per line
  masks.txt       one line per node: t (train), v (validation), s (test), - (none)

The split is the standard one: the first 20 labelled nodes per class in
`ally` order form the training set (indices 0..20*C), the next 500 nodes
form the validation set and the nodes listed in test.index form the test
set. CiteSeer test indices have gaps; the missing nodes get zero features,
label 0 and no split.

Features are copied as stored (binary bag-of-words, no row normalization).

Usage: planetoid_to_bgnf.py RAW_DIR NAME OUT_DIR
Requires numpy and scipy (the raw files are pickled scipy matrices).
"""

import json
import pickle
import struct
import sys
from pathlib import Path

import numpy as np
import scipy.sparse as sp


def load_pickle(path: Path):
    with path.open("rb") as f:
        return pickle.load(f, encoding="latin1")


def convert(raw: Path, name: str, out: Path) -> dict:
    part = {k: load_pickle(raw / f"ind.{name}.{k}") for k in ("x", "y", "tx", "ty", "allx", "ally", "graph")}
    test_index = [int(line) for line in (raw / f"ind.{name}.test.index").read_text().split()]
    test_sorted = sorted(test_index)

    allx, tx = sp.csr_matrix(part["allx"]), sp.csr_matrix(part["tx"])
    ally, ty = np.asarray(part["ally"]), np.asarray(part["ty"])
    lo, hi = test_sorted[0], test_sorted[-1]
    if hi - lo + 1 != len(test_sorted):
        # Pad isolated test nodes that have no features in the raw files.
        full_tx = sp.lil_matrix((hi - lo + 1, tx.shape[1]))
        full_ty = np.zeros((hi - lo + 1, ty.shape[1]))
        full_tx[np.array(test_sorted) - lo, :] = tx
        full_ty[np.array(test_sorted) - lo, :] = ty
        tx, ty = sp.csr_matrix(full_tx), full_ty

    features = sp.vstack([allx, tx]).tolil()
    labels = np.vstack([ally, ty])
    # The raw test rows are stored in test.index order; move them into place.
    features[test_index, :] = features[test_sorted, :]
    labels[test_index, :] = labels[test_sorted, :]
    features = np.asarray(features.todense(), dtype=np.float32)
    n, d = features.shape
    classes = labels.shape[1]
    y = labels.argmax(axis=1)

    graph = part["graph"]
    edges = set()
    for u, nbrs in graph.items():
        for v in nbrs:
            if u != v and u < n and v < n:
                edges.add((min(u, v), max(u, v)))

    split = ["-"] * n
    train_end = len(part["y"])
    for i in range(train_end):
        split[i] = "t"
    for i in range(train_end, train_end + 500):
        split[i] = "v"
    for i in test_index:
        split[i] = "s"

    out.mkdir(parents=True, exist_ok=True)
    with (out / "features.bin").open("wb") as f:
        f.write(b"BGNF" + struct.pack("<II", n, d))
        f.write(features.astype("<f4").tobytes(order="C"))
    (out / "edges.txt").write_text("".join(f"{u} {v}\n" for u, v in sorted(edges)))
    (out / "labels.txt").write_text("".join(f"{c}\n" for c in y))
    (out / "masks.txt").write_text("".join(f"{s}\n" for s in split))
    manifest = {
        "name": name,
        "edges": "edges.txt",
        "features": "features.bin",
        "labels": "labels.txt",
        "masks": "masks.txt",
        "num_nodes": int(n),
        "feature_dim": int(d),
        "num_classes": int(classes),
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return {**manifest, "num_edges": len(edges)}


def main(argv: list[str]) -> int:
    if len(argv) != 4:
        print("usage: planetoid_to_bgnf.py RAW_DIR NAME OUT_DIR", file=sys.stderr)
        return 1
    summary = convert(Path(argv[1]), argv[2], Path(argv[3]))
    print(json.dumps(summary))
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
