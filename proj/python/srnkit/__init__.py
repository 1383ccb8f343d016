"""Detection pipeline toolkit: anchors, matching, losses, post-processing."""

from srnkit._core import (
    AnchorSet,
    PyramidConfig,
    anchor_stats,
    decode,
    encode,
    evaluate,
    focal_loss,
    generate_anchors,
    iou,
    match,
    nms,
    run_inference,
    smooth_l1,
    stem_summary,
    synth_scene,
)

__all__ = [
    "AnchorSet",
    "PyramidConfig",
    "anchor_stats",
    "decode",
    "encode",
    "evaluate",
    "focal_loss",
    "generate_anchors",
    "iou",
    "match",
    "nms",
    "run_inference",
    "smooth_l1",
    "stem_summary",
    "synth_scene",
]
