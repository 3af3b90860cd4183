"""Watermark codec and tamper localization engine for latent tensors."""

from .bitcodec import (
    RepeatFactors,
    WatermarkKey,
    WatermarkPayload,
    bit_accuracy,
    decrypt_template,
    encrypt_template,
    expand_payload,
    majority_extract,
    random_payload,
)
from .calibration import (
    AccuracySamples,
    ThresholdTable,
    derive_thresholds,
    quantile_interval,
    sample_distributions,
)
from .channel import (
    ChannelSpec,
    RegionMask,
    TemporalEdit,
    apply_channel,
    permutation_to_edits,
    random_block_region,
    tamper_spatial,
    tamper_temporal,
)
from .formats import (
    read_bits_file,
    read_latent_file,
    write_bits_file,
    write_latent_file,
)
from .metrics import MaskMetrics, auc, binary_mask_metrics, mask_metrics
from .noisemap import invert_bits, sample_noise
from .pipeline import LocalizationResult, embed, extract, localize, template_bits
from .spatial import (
    HstrConfig,
    channel_average,
    finalize_mask,
    gather_average,
    hstr,
    partial_threshold_binarize,
    repeat_expand,
)
from .temporal import (
    best_match,
    build_cmp,
    match_frames,
    score_matrix,
    temporal_accuracy,
)
from .tensors import BitGrid4D, LatentTensor, SeededRng, Shape4

__version__ = "0.1.0"

__all__ = [
    "AccuracySamples",
    "BitGrid4D",
    "ChannelSpec",
    "HstrConfig",
    "LatentTensor",
    "LocalizationResult",
    "MaskMetrics",
    "RegionMask",
    "RepeatFactors",
    "SeededRng",
    "Shape4",
    "TemporalEdit",
    "ThresholdTable",
    "WatermarkKey",
    "WatermarkPayload",
    "apply_channel",
    "auc",
    "best_match",
    "binary_mask_metrics",
    "bit_accuracy",
    "build_cmp",
    "channel_average",
    "decrypt_template",
    "derive_thresholds",
    "embed",
    "encrypt_template",
    "expand_payload",
    "extract",
    "finalize_mask",
    "gather_average",
    "hstr",
    "invert_bits",
    "localize",
    "majority_extract",
    "mask_metrics",
    "match_frames",
    "partial_threshold_binarize",
    "permutation_to_edits",
    "quantile_interval",
    "random_block_region",
    "random_payload",
    "read_bits_file",
    "read_latent_file",
    "repeat_expand",
    "sample_distributions",
    "sample_noise",
    "score_matrix",
    "tamper_spatial",
    "tamper_temporal",
    "template_bits",
    "temporal_accuracy",
    "write_bits_file",
    "write_latent_file",
]
