"""Matrix-factorization relevance prediction for feature extensions.

A user-by-feature interaction matrix (with missing cells) is approximated
as the product of a user-by-aspect and an aspect-by-feature matrix. The
product fills the missing cells, which ranks how relevant a newly added
feature is for each user; thresholding turns the scores into a crisp
relevance matrix.

Training is plain stochastic gradient descent on the observed cells with
L2 regularization, deterministic for a fixed seed.
"""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from . import _accel

logger = logging.getLogger(__name__)

__all__ = [
    "InteractionMatrix",
    "FactorPair",
    "TrainConfig",
    "predict",
    "binarize",
    "train",
    "relevance_ranking",
    "rmse",
    "loss",
    "loss_gradients",
    "matrix_from_csv",
    "matrix_to_csv",
    "save_factors",
    "load_factors",
]

DEFAULT_THRESHOLD = 0.8


def _frozen_array(values, dtype=np.float64, ndim: int = 2) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    if arr.ndim != ndim:
        raise ValueError(f"expected a {ndim}-dimensional array, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class InteractionMatrix:
    """Labeled user-by-feature matrix; NaN cells are unobserved."""

    users: tuple[str, ...]
    features: tuple[str, ...]
    cells: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "users", tuple(self.users))
        object.__setattr__(self, "features", tuple(self.features))
        object.__setattr__(self, "cells", _frozen_array(self.cells))
        if self.cells.shape != (len(self.users), len(self.features)):
            raise ValueError(
                f"cells shape {self.cells.shape} does not match "
                f"{len(self.users)} users x {len(self.features)} features"
            )
        if len(set(self.users)) != len(self.users) or len(set(self.features)) != len(self.features):
            raise ValueError("user and feature ids must be unique")

    def observed(self) -> np.ndarray:
        return ~np.isnan(self.cells)

    def user_row(self, user: str) -> np.ndarray:
        try:
            return self.cells[self.users.index(user)]
        except ValueError:
            raise KeyError(f"unknown user: {user!r}") from None


@dataclass(frozen=True)
class FactorPair:
    """User-by-aspect and aspect-by-feature factors sharing the inner size."""

    users: tuple[str, ...]
    features: tuple[str, ...]
    user_factors: np.ndarray  # (users, k)
    feature_factors: np.ndarray  # (k, features)

    def __post_init__(self):
        object.__setattr__(self, "users", tuple(self.users))
        object.__setattr__(self, "features", tuple(self.features))
        object.__setattr__(self, "user_factors", _frozen_array(self.user_factors))
        object.__setattr__(self, "feature_factors", _frozen_array(self.feature_factors))
        if self.user_factors.shape[0] != len(self.users):
            raise ValueError("user factor rows must match the user list")
        if self.feature_factors.shape[1] != len(self.features):
            raise ValueError("feature factor columns must match the feature list")
        if self.user_factors.shape[1] != self.feature_factors.shape[0]:
            raise ValueError(
                f"inner dimensions differ: {self.user_factors.shape[1]} vs {self.feature_factors.shape[0]}"
            )
        if self.k < 1:
            raise ValueError("latent dimension must be at least 1")
        if not (np.isfinite(self.user_factors).all() and np.isfinite(self.feature_factors).all()):
            raise ValueError("factors must be finite")

    @property
    def k(self) -> int:
        return self.user_factors.shape[1]


@dataclass(frozen=True, slots=True)
class TrainConfig:
    k: int = 2
    rate: float = 0.05
    reg: float = 0.0
    epochs: int = 2000
    seed: int = 42

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("latent dimension k must be at least 1")
        if self.rate <= 0:
            raise ValueError("learning rate must be positive")
        if self.reg < 0:
            raise ValueError("regularization weight must be nonnegative")
        if self.epochs < 1:
            raise ValueError("epoch count must be at least 1")


def predict(pair: FactorPair) -> InteractionMatrix:
    """Exact factor product as a fully observed relevance matrix."""
    return InteractionMatrix(pair.users, pair.features, pair.user_factors @ pair.feature_factors)


def binarize(matrix: InteractionMatrix, threshold: float = DEFAULT_THRESHOLD) -> InteractionMatrix:
    """Crisp relevance: 1 where the score reaches ``threshold``, else 0.
    Unobserved cells stay unobserved."""
    if not 0.0 < threshold < 1.0:
        raise ValueError(f"threshold must lie strictly between 0 and 1, got {threshold}")
    observed = ~np.isnan(matrix.cells)
    crisp = (np.where(observed, matrix.cells, 0.0) >= threshold).astype(float)
    return InteractionMatrix(matrix.users, matrix.features, np.where(observed, crisp, np.nan))


def train(matrix: InteractionMatrix, config: TrainConfig = TrainConfig()) -> FactorPair:
    """Learn factors by SGD over the observed cells.

    Per visited cell: error = value - prediction, then
    ``ua += rate * (error * af - reg * ua)`` followed by
    ``af += rate * (error * ua - reg * af)`` along the shared aspect axis.
    Factors initialize uniformly in [0, 0.1] and cells are visited in a
    freshly shuffled order each epoch, all from one seeded generator, so a
    fixed config reproduces the factors exactly.
    """
    return _run_sgd(matrix, config, _accel.active_kernel())


def _run_sgd(matrix: InteractionMatrix, config: TrainConfig, kernel) -> FactorPair:
    observed = matrix.observed()
    count = int(observed.sum())
    if count == 0:
        raise ValueError("training needs at least one observed cell")
    thin_rows = ~observed.any(axis=1)
    thin_cols = ~observed.any(axis=0)
    if thin_rows.any():
        raise ValueError(f"users without observations: {[matrix.users[i] for i in np.flatnonzero(thin_rows)]}")
    if thin_cols.any():
        raise ValueError(
            f"features without observations: {[matrix.features[i] for i in np.flatnonzero(thin_cols)]}"
        )
    rng = np.random.default_rng(config.seed)
    ua = rng.uniform(0.0, 0.1, (len(matrix.users), config.k))
    af = rng.uniform(0.0, 0.1, (config.k, len(matrix.features)))
    rows, cols = (idx.astype(np.int64) for idx in np.nonzero(observed))
    vals = matrix.cells[observed].astype(np.float64)
    previous = np.inf
    warned = False
    for epoch in range(config.epochs):
        visit = rng.permutation(count)
        kernel(ua, af, rows, cols, vals, visit, config.rate, config.reg)
        current = _observed_loss(ua, af, rows, cols, vals, config.reg)
        if current > previous and not np.isclose(current, previous) and not warned:
            logger.warning(
                "training loss increased at epoch %d (%.6g -> %.6g); the learning rate may be too high",
                epoch,
                previous,
                current,
            )
            warned = True
        previous = current
    return FactorPair(matrix.users, matrix.features, ua, af)


def _observed_loss(ua, af, rows, cols, vals, reg: float) -> float:
    errors = vals - np.einsum("ij,ji->i", ua[rows], af[:, cols])
    penalty = reg * (float(np.sum(ua * ua)) + float(np.sum(af * af)))
    return float(np.sum(errors * errors)) + penalty


def loss(matrix: InteractionMatrix, pair: FactorPair, reg: float = 0.0) -> float:
    """Squared error over observed cells plus L2 penalty on both factors."""
    observed = matrix.observed()
    rows, cols = np.nonzero(observed)
    return _observed_loss(
        pair.user_factors, pair.feature_factors, rows, cols, matrix.cells[observed], reg
    )


def loss_gradients(
    matrix: InteractionMatrix, pair: FactorPair, reg: float = 0.0
) -> tuple[np.ndarray, np.ndarray]:
    """Analytic gradient of :func:`loss` with respect to both factors."""
    observed = matrix.observed()
    errors = np.where(observed, matrix.cells - pair.user_factors @ pair.feature_factors, 0.0)
    grad_ua = -2.0 * errors @ pair.feature_factors.T + 2.0 * reg * pair.user_factors
    grad_af = -2.0 * pair.user_factors.T @ errors + 2.0 * reg * pair.feature_factors
    return grad_ua, grad_af


def relevance_ranking(
    matrix: InteractionMatrix,
    user: str,
    candidates: Iterable[str],
) -> list[tuple[str, float]]:
    """Candidate features ordered by predicted relevance for ``user``,
    best first (ties by feature id)."""
    row = matrix.user_row(user)
    wanted = list(candidates)
    unknown = [name for name in wanted if name not in matrix.features]
    if unknown:
        raise KeyError(f"unknown features: {unknown}")
    scored = [(name, float(row[matrix.features.index(name)])) for name in wanted]
    scored.sort(key=lambda pair: (-pair[1], pair[0]))
    return scored


def rmse(reference: InteractionMatrix, predicted: InteractionMatrix) -> float:
    """Root mean squared error over the reference's observed cells."""
    if reference.users != predicted.users or reference.features != predicted.features:
        raise ValueError("matrices must share user and feature labels")
    observed = reference.observed()
    if not observed.any():
        raise ValueError("rmse needs at least one observed cell")
    diff = reference.cells[observed] - predicted.cells[observed]
    return float(np.sqrt(np.mean(diff * diff)))


# -- matrix CSV ----------------------------------------------------------------


def matrix_from_csv(text: str) -> InteractionMatrix:
    """Header row holds feature ids (first column is the user id); empty
    cells are unobserved."""
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ValueError("matrix CSV is empty") from None
    features = [name.strip() for name in header[1:]]
    if not features:
        raise ValueError("matrix CSV has no feature columns")
    users: list[str] = []
    rows: list[list[float]] = []
    for row in reader:
        if not row or not any(cell.strip() for cell in row):
            continue
        if len(row) != len(features) + 1:
            raise ValueError(f"row for {row[0]!r} has {len(row) - 1} cells, expected {len(features)}")
        users.append(row[0].strip())
        rows.append([float(cell) if cell.strip() else np.nan for cell in row[1:]])
    if not users:
        raise ValueError("matrix CSV has no user rows")
    return InteractionMatrix(tuple(users), tuple(features), np.array(rows))


def matrix_to_csv(matrix: InteractionMatrix) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["user", *matrix.features])
    for user, row in zip(matrix.users, matrix.cells):
        writer.writerow([user] + ["" if np.isnan(x) else format(x, "g") for x in row])
    return out.getvalue()


def save_factors(pair: FactorPair, path) -> None:
    np.savez(
        path,
        users=np.array(pair.users),
        features=np.array(pair.features),
        user_factors=pair.user_factors,
        feature_factors=pair.feature_factors,
    )


def load_factors(path) -> FactorPair:
    with np.load(path, allow_pickle=False) as data:
        return FactorPair(
            tuple(str(u) for u in data["users"]),
            tuple(str(f) for f in data["features"]),
            data["user_factors"],
            data["feature_factors"],
        )
