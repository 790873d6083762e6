"""Sparse circular coordinates from persistent cohomology of point clouds."""

__version__ = "0.1.0"

from .datasets import PointCloud, SamplerSpec, generate_double_ring, generate_dupin, generate_ring  # noqa: E402
from .rips import build_rips, distance_matrix, restrict_to_scale  # noqa: E402
from .persistence import persistent_cohomology, significant_cocycles  # noqa: E402
from .lift import lift, verify_integer_cocycle  # noqa: E402
from .smooth import OptimizerConfig, PenaltyConfig, smooth_generalized, smooth_l2_exact  # noqa: E402
from .coords import CircularCoordinates, classify_edges, combine_coords, extract_coords, torus_embed  # noqa: E402
from .evaluate import block_sharpness, coranking, pca  # noqa: E402

__all__ = [
    "PointCloud", "SamplerSpec", "generate_ring", "generate_double_ring", "generate_dupin",
    "distance_matrix", "build_rips", "restrict_to_scale", "persistent_cohomology", "significant_cocycles",
    "lift", "verify_integer_cocycle", "PenaltyConfig", "OptimizerConfig", "smooth_generalized",
    "smooth_l2_exact", "CircularCoordinates", "classify_edges", "combine_coords", "extract_coords",
    "torus_embed", "coranking", "block_sharpness", "pca",
]
