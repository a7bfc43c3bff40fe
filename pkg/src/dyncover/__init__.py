"""Fully-dynamic submodular cover with bounded recourse."""

from .functions import (ActiveSet, Contraction, Coverage, GraphicMatroidRank, GroundSet, Junta,
                        Modular, Oracle, SubmodularFunction, Sum, bounds_of, marginal,
                        mutual_coverage, value, verify_3increasing, verify_submodular)
from .engine import Mode, PermutationEngine, stable_greedy_violations
from .dynamic import CoverConfig, DynamicCover, Event, RunRecord, run_trace
from .rjunta import JuntaCover
from .combiner import BucketRouter
from .trees import FullyDynamicMST, FullyDynamicSteiner, MetricInstance
from .traces import Trace, gen_trace

__version__ = "0.1.0"

__all__ = [
    "ActiveSet", "Contraction", "Coverage", "GraphicMatroidRank", "GroundSet", "Junta", "Modular",
    "Oracle", "SubmodularFunction", "Sum", "bounds_of", "marginal", "mutual_coverage", "value",
    "verify_3increasing", "verify_submodular", "Mode", "PermutationEngine",
    "stable_greedy_violations", "CoverConfig", "DynamicCover", "Event", "RunRecord", "run_trace",
    "JuntaCover", "BucketRouter", "FullyDynamicMST", "FullyDynamicSteiner", "MetricInstance",
    "Trace", "gen_trace",
]
