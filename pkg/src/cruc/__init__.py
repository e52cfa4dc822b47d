"""Cold-start collaborative filtering.

Offline phase: :func:`build_matrix`, :func:`select_significant_users`,
:func:`cluster_users`, :func:`smooth`, :func:`build_similarity_model`.
Online phase: :func:`predict` and the component predictors.
"""

from ._backend import NAME as BACKEND
from .coldstart import ClusterModel, SignificantUserSet, SmoothedMatrix, cluster_users, select_significant_users, smooth
from .errors import CrucError
from .evaluation import EvalReport, SplitSpec, mae, rmse, run_experiment, split
from .ingestion import DatasetStats, SensorEvent, parse_movielens, reformulate_iot
from .matrix import RatingMatrix, RatingScale, RatingTriple, TripleTable, build_matrix, density, user_rating_density
from .predictors import (
    FusionParams,
    PredictionBreakdown,
    fuse,
    predict,
    predict_hybrid,
    predict_item_based,
    predict_user_based,
)
from .similarity import Neighbor, SimilarityModel, build_similarity_model, item_similarity, pcc, user_similarity

__version__ = "0.1.0"
