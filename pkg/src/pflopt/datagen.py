"""Synthetic federated dataset generators and CSV ingestion.

Both generators draw from a single sequential :class:`~pflopt.rng.RngStream`
addressed as ``(seed, "datagen")``; the draw order is part of the contract so
seeds are portable: first the shared truth ``w*``, then the client centers
``mu_1..mu_M``, then the local truths client by client, then features client
by client, then labels client by client.

Labels follow the logistic convention of the loss module:
``P(y = 1) = 1 / (1 + exp(theta' x))``.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .model import ClientShard, FederatedDataset, GroundTruth
from .rng import RngStream

__all__ = ["SynthConfig", "gen_mixture", "gen_weightshare", "load_csv"]


@dataclass
class SynthConfig:
    """Parameters of a synthetic dataset.

    ``kind`` selects the generator: "mixture" uses a single feature space of
    dimension ``d`` with client truths clustered around a shared ``w*``;
    "weightshare" splits features into ``d_g`` globally-predicted and ``d_l``
    locally-predicted coordinates.
    """

    kind: str
    n: int
    M: int
    sigma_h: float
    seed: int
    d: int | None = None
    d_g: int | None = None
    d_l: int | None = None

    def __post_init__(self):
        if self.kind not in ("mixture", "weightshare"):
            raise ValueError(f"unknown kind {self.kind!r}")
        if self.n < 1 or self.M < 1:
            raise ValueError("n and M must be >= 1")
        if not np.isfinite(self.sigma_h) or self.sigma_h < 0:
            raise ValueError("sigma_h must be finite and >= 0")
        if self.kind == "mixture" and (self.d is None or self.d < 1):
            raise ValueError("mixture requires d >= 1")
        if self.kind == "weightshare" and (
            self.d_g is None or self.d_l is None or self.d_g < 1 or self.d_l < 1
        ):
            raise ValueError("weightshare requires d_g >= 1 and d_l >= 1")


def gen_mixture(config: SynthConfig) -> FederatedDataset:
    """Clustered logistic data: ``beta*_m = w* + delta_m`` around a shared truth.

    ``w*`` has i.i.d. entries on U[0.49, 0.51]; client centers
    ``mu_m ~ N(0, sigma_h^2)`` set the heterogeneity scale; each
    ``delta_m`` has entries on U[mu_m - 0.01, mu_m + 0.01]; features are
    U[0.2, 0.5]; labels are Bernoulli with p = 1/(1 + exp(beta*' x)).
    """
    if config.kind != "mixture":
        raise ValueError("gen_mixture requires kind='mixture'")
    d, n, M = config.d, config.n, config.M
    stream = RngStream(config.seed, "datagen")
    w_star = stream.uniform(size=d, low=0.49, high=0.51)
    mus = stream.normal(size=M, scale=config.sigma_h)
    beta_stars = [
        w_star + stream.uniform(size=d, low=mus[m] - 0.01, high=mus[m] + 0.01)
        for m in range(M)
    ]
    features = [stream.uniform(size=(n, d), low=0.2, high=0.5) for _ in range(M)]
    clients = []
    for m in range(M):
        p = expit(-features[m] @ beta_stars[m])
        labels = stream.bernoulli(p, size=n)
        clients.append(ClientShard(features[m], labels.astype(np.float64)))
    return FederatedDataset(clients, truth=GroundTruth(w_star, beta_stars))


def gen_weightshare(config: SynthConfig) -> FederatedDataset:
    """Split-feature logistic data: global truth on d_g features, local on d_l.

    ``w* ~ N(0,1)^{d_g}``; client centers ``mu_m ~ N(0, sigma_h^2)``; local
    truths ``beta*_m`` have entries on U[mu_m - 0.01, mu_m + 0.01]; features
    (dimension d_g + d_l) are U[0, 0.1]; labels are Bernoulli with
    p = 1/(1 + exp([w*, beta*_m]' x)).
    """
    if config.kind != "weightshare":
        raise ValueError("gen_weightshare requires kind='weightshare'")
    d_g, d_l, n, M = config.d_g, config.d_l, config.n, config.M
    stream = RngStream(config.seed, "datagen")
    w_star = stream.normal(size=d_g)
    mus = stream.normal(size=M, scale=config.sigma_h)
    beta_stars = [
        stream.uniform(size=d_l, low=mus[m] - 0.01, high=mus[m] + 0.01) for m in range(M)
    ]
    features = [stream.uniform(size=(n, d_g + d_l), low=0.0, high=0.1) for _ in range(M)]
    clients = []
    for m in range(M):
        theta = np.concatenate([w_star, beta_stars[m]])
        p = expit(-features[m] @ theta)
        labels = stream.bernoulli(p, size=n)
        clients.append(ClientShard(features[m], labels.astype(np.float64)))
    return FederatedDataset(clients, truth=GroundTruth(w_star, beta_stars))


def load_csv(path, label_column: str, M: int, partition_column: str | None = None) -> FederatedDataset:
    """Load a headered CSV into M equally-sized client shards.

    Shards come from ``partition_column`` (values mapped to clients in
    first-appearance order) or round-robin when absent.  Shards are trimmed
    to a common size n (dropped remainder rows produce a warning).  Features
    are normalized in two steps: columns to zero mean / unit variance, then
    rows to unit Euclidean norm.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file, header row required") from None
        rows = list(reader)
    if label_column not in header:
        raise ValueError(f"{path}: label column {label_column!r} not in header {header}")
    label_idx = header.index(label_column)
    part_idx = None
    if partition_column is not None:
        if partition_column not in header:
            raise ValueError(f"{path}: partition column {partition_column!r} not in header")
        part_idx = header.index(partition_column)
    feature_idx = [i for i in range(len(header)) if i not in (label_idx, part_idx)]

    features, labels, parts = [], [], []
    for r, row in enumerate(rows):
        if len(row) != len(header):
            raise ValueError(f"{path}: row {r + 2} has {len(row)} fields, expected {len(header)}")
        try:
            values = [float(row[i]) for i in feature_idx]
            label = float(row[label_idx])
        except ValueError as exc:
            raise ValueError(f"{path}: row {r + 2}: {exc}") from None
        if not all(np.isfinite(values)):
            raise ValueError(f"{path}: row {r + 2}: non-finite feature value")
        if label not in (0.0, 1.0):
            raise ValueError(f"{path}: row {r + 2}: label {label} is not binary")
        features.append(values)
        labels.append(label)
        if part_idx is not None:
            parts.append(row[part_idx])

    X = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    # Two-step normalization: columns to zero mean / unit variance, rows to unit norm.
    X = X - X.mean(axis=0)
    std = X.std(axis=0)
    std[std == 0] = 1.0
    X = X / std
    norms = np.linalg.norm(X, axis=1)
    norms[norms == 0] = 1.0
    X = X / norms[:, None]

    if part_idx is not None:
        order = {}
        for value in parts:
            order.setdefault(value, len(order))
        if len(order) != M:
            raise ValueError(
                f"{path}: partition column has {len(order)} distinct values, expected M={M}"
            )
        assignment = np.array([order[value] for value in parts])
    else:
        assignment = np.arange(X.shape[0]) % M

    shard_indices = [np.flatnonzero(assignment == m) for m in range(M)]
    n = min(len(idx) for idx in shard_indices)
    if n < 1:
        raise ValueError(f"{path}: some client shard is empty for M={M}")
    dropped = sum(len(idx) - n for idx in shard_indices)
    if dropped:
        warnings.warn(f"{path}: dropped {dropped} trailing rows to equalize shards at n={n}",
                      stacklevel=2)
    clients = [ClientShard(X[idx[:n]], y[idx[:n]]) for idx in shard_indices]
    return FederatedDataset(clients)
