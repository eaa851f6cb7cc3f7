"""Category-level geometry learning for LiDAR segmentation under domain shift."""

from ._catgeo import (
    IGNORE_LABEL,
    decode_labels,
    decode_points,
    encode_labels,
    encode_points,
    gradcheck,
    run_cli,
    sinkhorn,
    synth_scene,
)

__all__ = [
    "IGNORE_LABEL",
    "decode_labels",
    "decode_points",
    "encode_labels",
    "encode_points",
    "gradcheck",
    "run_cli",
    "sinkhorn",
    "synth_scene",
]
