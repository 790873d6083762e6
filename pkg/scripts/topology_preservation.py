"""Compare H1 bars of two linked circles in 3D, their torus embedding and a 2D PCA projection.

The circular coordinates keep both loops; a linear projection flattens one into a segment.
"""
import argparse

import numpy as np

from circcoords.coords import torus_embed
from circcoords.datasets import generate_two_circles_3d
from circcoords.evaluate import coranking, pca
from circcoords.persistence import persistent_cohomology
from circcoords.pipeline import PipelineConfig, compute_coordinates
from circcoords.rips import build_rips, distance_matrix


def h1_bars(cloud, k=3):
    pairs = persistent_cohomology(build_rips(distance_matrix(cloud)))
    pers = sorted((pr.persistence for pr in pairs if pr.dim == 1 and pr.is_finite), reverse=True)
    return (pers + [0.0] * k)[:k]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=150)
    ap.add_argument("--knn", type=int, default=10)
    args = ap.parse_args()

    cloud = generate_two_circles_3d(args.n)
    cfg = PipelineConfig(source="two_circles_3d", n=args.n, tau=None, top_k=2, lambdas=(1.0,))
    res = compute_coordinates(cloud, cfg)
    theta = np.column_stack([res["runs"][(cid, 1.0)].theta for cid, _ in res["lifted"]])
    views = {"original": cloud, "torus": torus_embed(theta), "pca-2": pca(cloud, 2)}
    k = args.knn
    for name, emb in views.items():
        Q = coranking(cloud, emb)
        trust = Q[:k, :k].sum() / (cloud.points.shape[0] * k)
        bars = ", ".join(f"{b:.3f}" for b in h1_bars(emb))
        print(f"{name:>9}: top H1 persistence [{bars}]  knn-{k} agreement {trust:.3f}")


if __name__ == "__main__":
    main()
