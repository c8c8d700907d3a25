"""Feature-model configuration and recommendation engine.

Parse feature models from a small text DSL, translate them into Boolean
constraint tasks, solve and enumerate configurations, rank them by
user-specific utility, recommend feature values and next questions from
session logs, diagnose and repair inconsistent requirements, and predict
new-feature relevance via matrix factorization. A CLI (``fmrec``) and an
HTTP service expose the same operations.
"""

from .diagnose import all_diagnoses, analyze, min_conflict, rank_repairs, repairs
from .dsl import ParseError, parse_model, serialize_model
from .factorize import FactorPair, InteractionMatrix, TrainConfig, binarize, predict, rmse, train
from .model import CrossTreeConstraint, Feature, FeatureModel, FeatureTree, ModelError, validate_model
from .recommend import (
    EditLog,
    InterestProfile,
    SessionLog,
    UtilityTable,
    ValueRecommendation,
    consistency_filtered,
    group_utility,
    overall_utility,
    rank_configurations,
    rank_similarity,
    recommend_next_constraint,
    recommend_next_feature,
    recommend_value,
    user_similarity,
)
from .solver import (
    ValueOrdering,
    consistent_completion,
    enumerate_configurations,
    is_consistent,
    propagate,
    solve,
)
from .task import ConfigurationTask, Requirement, satisfies, translate

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "parse_model",
    "serialize_model",
    "ParseError",
    "Feature",
    "FeatureTree",
    "FeatureModel",
    "CrossTreeConstraint",
    "ModelError",
    "validate_model",
    "ConfigurationTask",
    "Requirement",
    "translate",
    "satisfies",
    "ValueOrdering",
    "propagate",
    "solve",
    "is_consistent",
    "enumerate_configurations",
    "consistent_completion",
    "UtilityTable",
    "InterestProfile",
    "SessionLog",
    "EditLog",
    "ValueRecommendation",
    "overall_utility",
    "rank_configurations",
    "group_utility",
    "user_similarity",
    "recommend_value",
    "rank_similarity",
    "recommend_next_feature",
    "recommend_next_constraint",
    "consistency_filtered",
    "min_conflict",
    "all_diagnoses",
    "analyze",
    "repairs",
    "rank_repairs",
    "InteractionMatrix",
    "FactorPair",
    "TrainConfig",
    "predict",
    "binarize",
    "train",
    "rmse",
]
