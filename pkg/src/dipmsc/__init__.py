"""Multidimensional shape-based time-series clustering (dipm-SC)."""
from .centroid import update_centroid
from .dip import DipResult, check_cluster_modality, dip_pvalue, dip_statistic
from .distance import DistanceResult, ShiftBound, batch_distances, distance, pairwise_distance_matrix
from .driver import DipmConfig, DipmResult, SplitEvent, dipm_sc, split_cluster
from .io import load_tensor, save_tensor
from .kernels import BACKEND
from .metrics import (
    InterEventSample,
    burstiness,
    cluster_burstiness_memory,
    cumulative_popularity,
    extract_events,
    ks_two_sample,
    memory,
    partition_scores,
    tail_slope,
)
from .mksc import Assignment, ClusteringConfig, ClusteringResult, m_ksc, objective
from .synth import GeneratorSpec, generate
from .tensor import SeriesTensor, gaussian_smooth, smooth_tensor

__version__ = "0.1.0"
