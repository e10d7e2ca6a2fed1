"""Model aggregation in class-probability space.

A head (or the base station, the operations are level-agnostic) evaluates
every member model on a shared probe set, combines the resulting
probability matrices, and forwards one representative model. Four methods:
plain weighted averaging, per-class adaptive weighting, a shallow stacking
meta-learner, and pooled retraining.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .clustering import DataSignature, check_homogeneity
from .errors import (
    DimensionMismatch,
    EmptyDataset,
    EmptyMemberList,
    MissingLabels,
    SignatureMismatch,
)
from .ml_core import (
    ClassifierConfig,
    DenseNetwork,
    predict_proba,
    train_classifier,
)

ADAPTIVE_GRID_STEP = 0.05
ADAPTIVE_MAX_SWEEPS = 50


class AggregationMethod(Enum):
    WEIGHTED_AVERAGING = "weighted"
    ADAPTIVE_WEIGHTED_AVERAGING = "adaptive"
    META_LEARNING = "meta"
    RETRAINING = "retrain"


@dataclass(frozen=True)
class ModelArtifact:
    """A trained model plus the context needed to evaluate it.

    ``feature_indices`` (column projection) and ``encoder`` (latent
    mapping) describe the device's input pipeline; both are applied before
    the network when computing probabilities. ``signature.feature_dim`` is
    always the raw probe-feature dimensionality the artifact consumes.
    Meta artifacts additionally carry the member models their stacker
    feeds on.
    """

    network: DenseNetwork
    source_id: int
    round_index: int
    signature: DataSignature
    encoder: DenseNetwork | None = None
    feature_indices: tuple[int, ...] | None = None
    is_meta: bool = False
    meta_members: tuple["ModelArtifact", ...] | None = None

    def __post_init__(self):
        if len(self.signature.label_set) != self.network.output_dim:
            raise SignatureMismatch(
                f"network outputs {self.network.output_dim} classes, signature has "
                f"{len(self.signature.label_set)} labels"
            )
        if self.is_meta and not self.meta_members:
            raise ValueError("meta artifacts need their member models")


@dataclass(frozen=True)
class ProbeSet:
    features: np.ndarray
    labels: np.ndarray | None = None

    def __post_init__(self):
        x = np.asarray(self.features, dtype=np.float64)
        if x.ndim != 2 or x.shape[0] == 0:
            raise EmptyDataset("probe set must be a non-empty 2-D sample matrix")
        object.__setattr__(self, "features", x)
        if self.labels is not None:
            y = np.asarray(self.labels)
            if y.shape[0] != x.shape[0]:
                raise DimensionMismatch("probe labels must align with probe features")
            object.__setattr__(self, "labels", y)


def artifact_probabilities(artifact: ModelArtifact, features: np.ndarray) -> np.ndarray:
    """Class probabilities of an artifact on raw probe features.

    Applies, in order: the artifact's feature-column projection, its
    encoder, and its network. Meta artifacts first evaluate their members
    and stack the concatenated probabilities.
    """
    x = np.asarray(features, dtype=np.float64)
    if artifact.is_meta:
        assert artifact.meta_members is not None
        stacked = np.hstack(
            [artifact_probabilities(m, x) for m in artifact.meta_members]
        )
        return predict_proba(artifact.network, stacked)
    if x.ndim != 2 or x.shape[1] != artifact.signature.feature_dim:
        raise DimensionMismatch(
            f"artifact consumes {artifact.signature.feature_dim} features, "
            f"got {x.shape[1] if x.ndim == 2 else 'non-matrix'}"
        )
    if artifact.feature_indices is not None:
        x = x[:, list(artifact.feature_indices)]
    if artifact.encoder is not None:
        x = artifact.encoder.forward(x)
    return predict_proba(artifact.network, x)


def _check_members(members: list[ModelArtifact]) -> None:
    if not members:
        raise EmptyMemberList("aggregation needs at least one member model")
    first = members[0].signature
    for m in members[1:]:
        if not check_homogeneity(first, m.signature):
            raise SignatureMismatch(
                f"member {m.source_id} signature differs from member "
                f"{members[0].source_id}"
            )


def member_probabilities(
    members: list[ModelArtifact], probe: ProbeSet
) -> np.ndarray:
    """Stack of per-member probability matrices, shape (members, samples, classes)."""
    _check_members(members)
    return np.stack([artifact_probabilities(m, probe.features) for m in members])


def aggregate_weighted(
    members: list[ModelArtifact],
    probe: ProbeSet,
    weights: np.ndarray | None = None,
) -> tuple[ModelArtifact, np.ndarray]:
    """Average member class probabilities; forward the member closest to it.

    ``weights`` is a point on the member simplex (uniform when omitted).
    Returns (selected member, averaged probability matrix); the selected
    member minimizes the Frobenius distance to the average, ties going to
    the lower source_id.
    """
    probs = member_probabilities(members, probe)
    m = len(members)
    if weights is None:
        w = np.full(m, 1.0 / m)
    else:
        w = np.asarray(weights, dtype=np.float64)
        if w.shape != (m,):
            raise DimensionMismatch(f"expected {m} weights, got shape {w.shape}")
        if np.any(w < 0) or abs(float(w.sum()) - 1.0) > 1e-9:
            raise ValueError("weights must be nonnegative and sum to 1")
    avg = np.tensordot(w, probs, axes=1)
    selected = closest_member(members, probs, avg)
    return selected, avg


def closest_member(
    members: list[ModelArtifact], probs: np.ndarray, target: np.ndarray
) -> ModelArtifact:
    """Member whose probability matrix is Frobenius-closest to ``target``."""
    best_idx = 0
    best_key = None
    for i, member in enumerate(members):
        d = float(np.linalg.norm(probs[i] - target))
        key = (d, member.source_id)
        if best_key is None or key < best_key:
            best_key = key
            best_idx = i
    return members[best_idx]


def _simplex_grid(m: int, step: float = ADAPTIVE_GRID_STEP):
    """All weight vectors over m members on the step-resolution simplex."""
    ticks = round(1.0 / step)

    def rec(remaining: int, parts: int):
        if parts == 1:
            yield (remaining,)
            return
        for first in range(remaining + 1):
            for rest in rec(remaining - first, parts - 1):
                yield (first,) + rest

    for combo in rec(ticks, m):
        yield np.array(combo, dtype=np.float64) / ticks


def adaptive_accuracy(
    probs: np.ndarray, weight_matrix: np.ndarray, labels: np.ndarray
) -> float:
    """Probe accuracy of the per-class weighted probability average."""
    avg = np.einsum("cm,mnc->nc", weight_matrix, probs)
    return float(np.mean(avg.argmax(axis=1) == labels))


def adaptive_average(probs: np.ndarray, weight_matrix: np.ndarray) -> np.ndarray:
    """Per-class weighted average, renormalized to a valid probability matrix."""
    avg = np.einsum("cm,mnc->nc", weight_matrix, probs)
    return avg / avg.sum(axis=1, keepdims=True)


def optimize_adaptive_weights(
    members: list[ModelArtifact], probe: ProbeSet
) -> np.ndarray:
    """Per-class member weights (classes x members) tuned on the probe set.

    Coordinate ascent over one class row at a time on a 0.05-resolution
    simplex grid, starting from uniform weights, in deterministic sweep
    order; a row changes only when it strictly improves probe accuracy, so
    the result never scores below uniform.
    """
    if probe.labels is None:
        raise MissingLabels("adaptive weighting needs probe labels")
    probs = member_probabilities(members, probe)
    m, _, num_classes = probs.shape
    labels = np.asarray(probe.labels)
    weights = np.full((num_classes, m), 1.0 / m)
    if m == 1:
        return weights
    grid = list(_simplex_grid(m))
    current = adaptive_accuracy(probs, weights, labels)
    for _ in range(ADAPTIVE_MAX_SWEEPS):
        improved = False
        for cls in range(num_classes):
            best_row = weights[cls].copy()
            best_acc = current
            trial = weights.copy()
            for row in grid:
                trial[cls] = row
                acc = adaptive_accuracy(probs, trial, labels)
                if acc > best_acc:
                    best_acc = acc
                    best_row = row.copy()
            if best_acc > current:
                weights[cls] = best_row
                current = best_acc
                improved = True
        if not improved:
            break
    return weights


def train_meta(
    members: list[ModelArtifact],
    probe: ProbeSet,
    config: ClassifierConfig,
    source_id: int = -1,
) -> ModelArtifact:
    """Stacking: a shallow classifier over concatenated member probabilities.

    The returned artifact is flagged as a meta-model and keeps references
    to its members, since inference has to evaluate them first.
    """
    if probe.labels is None:
        raise MissingLabels("meta-learning needs probe labels")
    probs = member_probabilities(members, probe)
    m, n, num_classes = probs.shape
    stacked = np.hstack(list(probs))
    cfg = dataclasses.replace(
        config, input_dim=m * num_classes, num_classes=num_classes, hidden_units=0
    )
    net = train_classifier(cfg, stacked, np.asarray(probe.labels))
    return ModelArtifact(
        network=net,
        source_id=source_id,
        round_index=max(mb.round_index for mb in members),
        signature=members[0].signature,
        is_meta=True,
        meta_members=tuple(members),
    )


def retrain_pooled(
    member_data: list[tuple[np.ndarray, np.ndarray]],
    config: ClassifierConfig,
    source_id: int = -1,
    signature: DataSignature | None = None,
) -> ModelArtifact:
    """One classifier trained on the concatenation of all member datasets."""
    if not member_data:
        raise EmptyDataset("no member datasets to pool")
    dims = {np.asarray(x).shape[1] for x, _ in member_data}
    if len(dims) != 1:
        raise SignatureMismatch(f"member feature dimensions differ: {sorted(dims)}")
    features = np.vstack([np.asarray(x, dtype=np.float64) for x, _ in member_data])
    labels = np.concatenate([np.asarray(y) for _, y in member_data])
    net = train_classifier(config, features, labels)
    sig = signature or DataSignature(dims.pop(), tuple(range(config.num_classes)))
    return ModelArtifact(network=net, source_id=source_id, round_index=0, signature=sig)
