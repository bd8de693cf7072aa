"""Spectral graph clustering with generative-model-based selection of the number of communities."""

from .graph import Graph, largest_connected_component, parse_edge_list, volume
from .metrics import (accuracy, average_rank, avg_odf, conductance, f_measure, nmi,
                      normalized_cut, rand_index)
from .sbm import Partition, SbmParams, generate_sbm, mle_block_probabilities
from .selection import (SelectionConfig, SelectionReport, detection_loss, mismatch_r1,
                        mismatch_r2, mismatch_r3, mismatch_r4, modularity, sbm_log_likelihood,
                        select)
from .spectral import (Laplacian, Mode, SpectralBasis, build_laplacian, row_normalize,
                       sgc_detect, smallest_eigenpairs, theta)
from .kmeans import kmeans

__version__ = "0.1.0"
