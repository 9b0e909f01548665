"""Ratio list decoding over discrete memoryless channels.

Channels, codebooks, mismatched list decoders, exact and Monte Carlo error
probabilities, and evaluators for the associated converse and
random-coding bounds.
"""

from .channel import Channel, bec, block_log_likelihood, bsc, noiseless, transmit, useless
from .codes import Codebook, RatioFunction, random_codebook, ratio_eval, replicate_codebook
from .decoding import Metric, classic_decode, list_decode_threshold, list_decode_topL, phi_count, score_all
from .information import blahut_arimoto, mutual_information

__version__ = "0.1.0"
