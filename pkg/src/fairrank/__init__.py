"""Sampling ex-post group-fair top-k rankings.

Rankings are drawn from the distribution that (1) keeps every group's items
in their given in-group order, (2) picks the group representation uniformly
among those meeting the per-group bounds, and (3) arranges the groups over
the ranks uniformly given that representation.  Representations come from an
exact counting sampler (``backend="dp"``) or from a polytope random walk with
rounding and rejection (``backend="walk"``).
"""

__version__ = "0.1.0"

from .assembly import FairRankingSampler, assemble_ranking, sample_assignment, sample_fair_ranking
from .dp import CountTable, DPSampler, build_count_table, count_fair_representations
from .errors import (
    BlockInfeasible,
    DeltaTooSmall,
    FairRankError,
    InfeasibleConstraints,
    InsufficientItems,
    NoFeasiblePoint,
    RejectionBudgetExceeded,
    WalkNotMixed,
)
from .model import (
    FairnessConstraints,
    InGroupRanking,
    Ranking,
    in_group_rankings,
    is_group_fair,
    representation_of,
    validate,
)
from .polytope import PolytopeGeometry, WalkConfig, WalkSampler
from .prefix import PrefixConstraints, PrefixSampler, sample_prefix_fair_ranking

__all__ = [
    "BlockInfeasible",
    "CountTable",
    "DPSampler",
    "DeltaTooSmall",
    "FairRankError",
    "FairRankingSampler",
    "FairnessConstraints",
    "InGroupRanking",
    "InfeasibleConstraints",
    "InsufficientItems",
    "NoFeasiblePoint",
    "PolytopeGeometry",
    "PrefixConstraints",
    "PrefixSampler",
    "Ranking",
    "RejectionBudgetExceeded",
    "WalkConfig",
    "WalkNotMixed",
    "WalkSampler",
    "assemble_ranking",
    "build_count_table",
    "count_fair_representations",
    "in_group_rankings",
    "is_group_fair",
    "representation_of",
    "sample_assignment",
    "sample_fair_ranking",
    "sample_prefix_fair_ranking",
    "validate",
]
