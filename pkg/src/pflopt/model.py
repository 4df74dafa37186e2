"""Core data model: partitioned iterates, federated datasets, smoothness profiles.

The iterate of every objective and optimizer in this package is a
:class:`PartitionedModel`: one shared block ``w`` of length ``d0`` plus ``M``
client-local blocks ``beta_m`` of length ``d_m``.  All storage is dense,
contiguous 64-bit floating point; problem sizes are desk-scale.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "PartitionedModel",
    "ClientShard",
    "GroundTruth",
    "FederatedDataset",
    "SmoothnessProfile",
    "ShapeMismatchError",
    "flatten",
    "unflatten",
    "axpy_model",
]


class ShapeMismatchError(ValueError):
    """Raised when two partitioned values disagree in shape; names the block."""


def _as_vector(x) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"expected a 1-D vector, got shape {arr.shape}")
    return arr


@dataclass
class PartitionedModel:
    """The iterate ``(w, beta_1, ..., beta_M)``.

    ``w`` is the shared block (possibly empty); ``betas`` holds one local
    block per client (each possibly empty, as long as some block is
    non-empty).  Instances are treated as immutable values: operations return
    new models rather than mutating in place.
    """

    w: np.ndarray
    betas: list[np.ndarray]

    def __post_init__(self):
        self.w = _as_vector(self.w)
        self.betas = [_as_vector(b) for b in self.betas]
        if len(self.betas) < 1:
            raise ValueError("a PartitionedModel needs at least one client block")
        if self.d0 == 0 and all(d == 0 for d in self.dms):
            raise ValueError("at least one of d0, sum(d_m) must be positive")
        self.check_finite()

    @property
    def M(self) -> int:
        return len(self.betas)

    @property
    def d0(self) -> int:
        return self.w.shape[0]

    @property
    def dms(self) -> list[int]:
        return [b.shape[0] for b in self.betas]

    def check_finite(self) -> None:
        if not np.all(np.isfinite(self.w)):
            raise ValueError("non-finite entries in shared block w")
        for m, b in enumerate(self.betas):
            if not np.all(np.isfinite(b)):
                raise ValueError(f"non-finite entries in client block beta_{m}")

    def copy(self) -> "PartitionedModel":
        return PartitionedModel(self.w.copy(), [b.copy() for b in self.betas])

    def beta_stack(self) -> np.ndarray:
        """Client blocks as an (M, d_m) matrix; requires uniform d_m."""
        dms = self.dms
        if len(set(dms)) != 1:
            raise ValueError(f"client blocks are not uniform: {dms}")
        return np.stack(self.betas) if dms[0] > 0 else np.empty((self.M, 0))

    @staticmethod
    def zeros(d0: int, dms: list[int]) -> "PartitionedModel":
        return PartitionedModel(np.zeros(d0), [np.zeros(d) for d in dms])

    @staticmethod
    def from_stack(w: np.ndarray, beta_stack: np.ndarray) -> "PartitionedModel":
        return PartitionedModel(np.asarray(w, dtype=np.float64),
                                [row for row in np.asarray(beta_stack, dtype=np.float64)])


def flatten(model: PartitionedModel) -> np.ndarray:
    """Concatenate ``w`` then ``beta_1 ... beta_M`` into one vector."""
    return np.concatenate([model.w, *model.betas]) if model.M else model.w.copy()


def unflatten(vector: np.ndarray, d0: int, dms: list[int]) -> PartitionedModel:
    """Inverse of :func:`flatten` for the given shape."""
    vector = _as_vector(vector)
    expected = d0 + sum(dms)
    if vector.shape[0] != expected:
        raise ShapeMismatchError(
            f"flat vector has length {vector.shape[0]}, shape (d0={d0}, dms={dms}) needs {expected}"
        )
    w = vector[:d0].copy()
    betas = []
    offset = d0
    for d in dms:
        betas.append(vector[offset : offset + d].copy())
        offset += d
    return PartitionedModel(w, betas)


def axpy_model(a: float, x: PartitionedModel, y: PartitionedModel) -> PartitionedModel:
    """Blockwise ``a * x + y``; shapes must match exactly."""
    if x.d0 != y.d0:
        raise ShapeMismatchError(f"shared block: x has d0={x.d0}, y has d0={y.d0}")
    if x.M != y.M:
        raise ShapeMismatchError(f"client count: x has M={x.M}, y has M={y.M}")
    for m, (bx, by) in enumerate(zip(x.betas, y.betas)):
        if bx.shape != by.shape:
            raise ShapeMismatchError(
                f"client block beta_{m}: x has d={bx.shape[0]}, y has d={by.shape[0]}"
            )
    return PartitionedModel(
        a * x.w + y.w, [a * bx + by for bx, by in zip(x.betas, y.betas)]
    )


@dataclass
class ClientShard:
    """One client's data: an (n, d) feature matrix and an n-vector of labels."""

    features: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.float64)
        if self.features.ndim != 2:
            raise ValueError(f"features must be 2-D, got shape {self.features.shape}")
        if self.labels.shape != (self.features.shape[0],):
            raise ValueError(
                f"labels shape {self.labels.shape} does not match {self.features.shape[0]} samples"
            )
        if not np.all(np.isfinite(self.features)):
            raise ValueError("non-finite feature entries")

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]


@dataclass
class GroundTruth:
    """Generating parameters of a synthetic dataset (raw, unscaled space)."""

    w_star: np.ndarray | None
    beta_stars: list[np.ndarray]


@dataclass
class FederatedDataset:
    """M client shards with a common per-client sample count n."""

    clients: list[ClientShard]
    truth: GroundTruth | None = None

    def __post_init__(self):
        if not self.clients:
            raise ValueError("a FederatedDataset needs at least one client")
        n = self.clients[0].n
        d = self.clients[0].dim
        for m, shard in enumerate(self.clients):
            if shard.n != n:
                raise ValueError(f"client {m} has n={shard.n}, expected common n={n}")
            if shard.dim != d:
                raise ValueError(f"client {m} has dim={shard.dim}, expected {d}")
        labels = np.concatenate([c.labels for c in self.clients])
        if not np.all(np.isin(labels, (0.0, 1.0))):
            raise ValueError("labels must be binary in {0, 1}")

    @property
    def M(self) -> int:
        return len(self.clients)

    @property
    def n(self) -> int:
        return self.clients[0].n

    @property
    def dim(self) -> int:
        return self.clients[0].dim

    def feature_tensor(self) -> np.ndarray:
        """All features as an (M, n, d) tensor."""
        return np.stack([c.features for c in self.clients])

    def label_matrix(self) -> np.ndarray:
        """All labels as an (M, n) matrix."""
        return np.stack([c.labels for c in self.clients])


@dataclass
class SmoothnessProfile:
    """Constants (mu, L^w, L^beta, per-sample LL^w, LL^beta) of an objective.

    Conventions: ``F`` is jointly ``mu``-strongly convex; each per-client
    summand ``f_m`` is ``l_w``-smooth in ``w`` and ``(M * l_beta)``-smooth in
    ``beta_m`` (equivalently, F's beta_m block is ``l_beta``-smooth); the
    ``ll_*`` fields are the analogous per-sample constants.
    """

    mu: float
    l_w: float
    l_beta: float
    ll_w: float
    ll_beta: float
    n: int = 1

    def __post_init__(self):
        for name in ("mu", "l_w", "l_beta", "ll_w", "ll_beta"):
            value = getattr(self, name)
            if not np.isfinite(value) or value < 0:
                raise ValueError(f"smoothness constant {name}={value} must be finite and >= 0")
        slack = 1 + 1e-12
        if self.l_w > self.ll_w * slack or self.ll_w > self.l_w * self.n * slack:
            raise ValueError(
                f"per-sample ordering violated for w: need ll_w >= l_w >= ll_w/n, "
                f"got l_w={self.l_w}, ll_w={self.ll_w}, n={self.n}"
            )
        if self.l_beta > self.ll_beta * slack or self.ll_beta > self.l_beta * self.n * slack:
            raise ValueError(
                f"per-sample ordering violated for beta: need ll_beta >= l_beta >= ll_beta/n, "
                f"got l_beta={self.l_beta}, ll_beta={self.ll_beta}, n={self.n}"
            )
        positive = [v for v in (self.l_w, self.l_beta) if v > 0]
        if positive and self.mu > min(positive) * (1 + 1e-9):
            warnings.warn(
                f"strong-convexity constant mu={self.mu} exceeds the smallest positive "
                f"smoothness constant {min(positive)}; the profile is outside the usual regime",
                stacklevel=2,
            )
