"""maskseq: sequence interface to segmentation masks and boxes.

Masks become fixed-length quantized point sequences via adaptive (or
uniform) contour sampling; the package also ships the grounding wire
grammar with its parser, grounding metrics, the reconstruction
upper-bound harness, and instruction-tuning dataset converters.
"""

from ._kernels import BACKEND as KERNEL_BACKEND
from .codec import (
    BSEP,
    MSEP,
    GroundingOutput,
    QuantConfig,
    QuantSeq,
    canonicalize,
    decode_mask,
    dequantize,
    encode_contour,
    encode_mask,
    parse_grounding,
    quantize,
    serialize,
)
from .errors import EmptyMaskError, MaskSeqError, ParseError
from .geometry import (
    BBox,
    BinaryMask,
    Contour,
    Point,
    box_iou,
    extract_contours,
    largest_contour,
    mask_iou,
    rasterize_polygon,
    shoelace_area,
)
from .sampling import SamplingConfig, TurningProfile, adaptive_sample, densify, turning_angles, uniform_sample

__version__ = "0.1.0"

__all__ = [
    "KERNEL_BACKEND",
    "__version__",
    "BSEP",
    "MSEP",
    "GroundingOutput",
    "QuantConfig",
    "QuantSeq",
    "canonicalize",
    "decode_mask",
    "dequantize",
    "encode_contour",
    "encode_mask",
    "parse_grounding",
    "quantize",
    "serialize",
    "EmptyMaskError",
    "MaskSeqError",
    "ParseError",
    "BBox",
    "BinaryMask",
    "Contour",
    "Point",
    "box_iou",
    "extract_contours",
    "largest_contour",
    "mask_iou",
    "rasterize_polygon",
    "shoelace_area",
    "SamplingConfig",
    "TurningProfile",
    "adaptive_sample",
    "densify",
    "turning_angles",
    "uniform_sample",
]
