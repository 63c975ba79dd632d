"""Linear latent-space brain decoding toolkit."""

from .dataio import ImageSet, RoiMask, read_image_set, read_matrix, read_roi_mask, write_matrix
from .eigenimage import EigenImageModel, fit_pca, project, reconstruct
from .linmap import (
    DecodeOptions,
    EncoderMap,
    augment_bias,
    center_test_responses,
    decode_latents,
    fit_encoder,
    rescale_latents,
)
from .metrics import PairwiseReport, feature_distance, pairwise_decoding_accuracy, pearson, pixcomp
from .roi import select_voxels, union_masks
from .synth import SynthConfig, SynthDataset, generate, noise_sweep, oracle_pairwise

__version__ = "0.1.0"
