"""Device-to-device cluster formation.

Clusters are size-capped groups of data-compatible devices, each anchored
by a BS-connectable seed that later hosts aggregation. ``form_clusters``
solves the formation problem exactly for the small fleets simulated here:
among all feasible partitions it returns the one minimizing, in order,

1. the number of devices left out (isolated),
2. the number of clusters,
3. the total member-to-seed distance,
4. a canonical encoding (each device's cluster anchor id, compared in
   ascending device-id order),

so the output is reproducible and checkable against exhaustive
enumeration. Distance totals within ``COST_TOL`` of each other count as
ties and fall through to the next level.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import DimensionMismatch, NoConnectableDevice
from .topology import DeviceNode, distance_m

COST_TOL = 1e-9


@dataclass(frozen=True)
class ClusterPolicy:
    max_size: int = 3
    require_bs_member: bool = True

    def __post_init__(self):
        if self.max_size < 1:
            raise ValueError("max_size must be >= 1")


@dataclass(frozen=True)
class DataSignature:
    """What must match for two devices to share a cluster.

    The label set is stored sorted, so construction order does not affect
    equality.
    """

    feature_dim: int
    label_set: tuple[int, ...]

    def __post_init__(self):
        if self.feature_dim < 1:
            raise ValueError("feature_dim must be positive")
        labels = tuple(sorted(self.label_set))
        if not labels:
            raise ValueError("label_set must be non-empty")
        if len(set(labels)) != len(labels):
            raise ValueError("label_set must not contain duplicates")
        object.__setattr__(self, "label_set", labels)


def check_homogeneity(a: DataSignature, b: DataSignature) -> bool:
    """True iff the two signatures agree on feature dimension and labels."""
    return a.feature_dim == b.feature_dim and a.label_set == b.label_set


@dataclass(frozen=True)
class Cluster:
    cluster_id: int
    member_ids: tuple[int, ...]
    seed_id: int | None
    participating: bool = True

    def __post_init__(self):
        if not self.member_ids:
            raise ValueError("a cluster needs at least one member")
        if len(set(self.member_ids)) != len(self.member_ids):
            raise ValueError("duplicate member ids in cluster")
        if self.seed_id is not None and self.seed_id not in self.member_ids:
            raise ValueError("seed must be a cluster member")
        if self.participating and self.seed_id is None:
            raise ValueError("participating clusters need a seed")


@dataclass(frozen=True)
class ClusterAssignment:
    clusters: tuple[Cluster, ...]

    def __post_init__(self):
        seen: set[int] = set()
        for cluster in self.clusters:
            for member in cluster.member_ids:
                if member in seen:
                    raise ValueError(f"device {member} appears in more than one cluster")
                seen.add(member)

    def device_ids(self) -> list[int]:
        return sorted(m for c in self.clusters for m in c.member_ids)

    def participating_ids(self) -> list[int]:
        return sorted(m for c in self.clusters if c.participating for m in c.member_ids)

    def isolated_ids(self) -> list[int]:
        return sorted(m for c in self.clusters if not c.participating for m in c.member_ids)

    def cluster_of(self, device_id: int) -> Cluster:
        for cluster in self.clusters:
            if device_id in cluster.member_ids:
                return cluster
        raise KeyError(f"device {device_id} is not in any cluster")


def _dist_tie(a: float, b: float) -> bool:
    return abs(a - b) <= COST_TOL * max(1.0, abs(a), abs(b))


def _group_devices(
    devices: list[DeviceNode], signatures: list[DataSignature]
) -> list[list[int]]:
    groups: dict[tuple, list[int]] = {}
    for idx, sig in enumerate(signatures):
        groups.setdefault((sig.feature_dim, sig.label_set), []).append(idx)
    return [groups[key] for key in sorted(groups)]


def _solve_seed_set(
    seed_ids: tuple[int, ...],
    rest: list[int],
    dist: dict[tuple[int, int], float],
    in_range: dict[tuple[int, int], bool],
    max_size: int,
) -> tuple[int, float, dict[int, int]] | None:
    """Optimal capacitated assignment of ``rest`` onto the given seeds.

    Returns (isolated count, total distance, anchor map for rest) with the
    minimum-isolation assignment of minimum distance, or None when the
    solver cannot produce one (never happens: isolation is always open).
    Anchor map values are seed ids, or the device's own id when isolated.
    """
    slots_per_seed = max_size - 1
    seed_cols = [s for s in seed_ids for _ in range(slots_per_seed)]
    n = len(rest)
    if n == 0:
        return 0, 0.0, {}

    max_dist = max((dist[(r, s)] for r in rest for s in seed_ids), default=0.0)
    penalty = (n + 1) * (max_dist + 1.0)

    cost = np.full((n, len(seed_cols) + n), np.inf)
    for i, r in enumerate(rest):
        for j, s in enumerate(seed_cols):
            if in_range[(r, s)]:
                cost[i, j] = dist[(r, s)]
        cost[i, len(seed_cols) + i] = penalty

    rows, cols = linear_sum_assignment(cost)
    anchors: dict[int, int] = {}
    isolated = 0
    total = 0.0
    for i, j in zip(rows, cols):
        r = rest[i]
        if j >= len(seed_cols):
            anchors[r] = r
            isolated += 1
        else:
            anchors[r] = seed_cols[j]
            total += cost[i, j]
    return isolated, total, anchors


def _lex_fix(
    seed_ids: tuple[int, ...],
    rest: list[int],
    dist: dict[tuple[int, int], float],
    in_range: dict[tuple[int, int], bool],
    max_size: int,
    target_iso: int,
    target_dist: float,
) -> dict[int, int]:
    """Re-derive the optimum while fixing devices in id order to their
    smallest workable anchor, yielding the canonical tie-broken solution."""
    capacity = {s: max_size - 1 for s in seed_ids}
    iso_left = target_iso
    dist_left = target_dist
    fixed: dict[int, int] = {}
    for pos, r in enumerate(rest):
        remaining = rest[pos + 1 :]
        options = sorted(
            [s for s in seed_ids if capacity[s] > 0 and in_range[(r, s)]] + [r]
        )
        chosen = None
        for candidate in options:
            if candidate == r:
                cand_iso, cand_dist = 1, 0.0
                cand_capacity = dict(capacity)
            else:
                cand_iso, cand_dist = 0, dist[(r, candidate)]
                cand_capacity = dict(capacity)
                cand_capacity[candidate] -= 1
            seeds_left = tuple(s for s in seed_ids if cand_capacity[s] >= 0)
            sub = _solve_seed_set_with_capacity(
                seeds_left, remaining, dist, in_range, cand_capacity
            )
            if sub is None:
                continue
            sub_iso, sub_dist, _ = sub
            if cand_iso + sub_iso == iso_left and _dist_tie(
                cand_dist + sub_dist, dist_left
            ):
                chosen = candidate
                capacity = cand_capacity
                iso_left -= cand_iso
                dist_left -= cand_dist
                break
        if chosen is None:  # numerically drifted; fall back to any optimum
            sub = _solve_seed_set_with_capacity(
                tuple(seed_ids), rest[pos:], dist, in_range, capacity
            )
            assert sub is not None
            fixed.update(sub[2])
            return fixed
        fixed[r] = chosen
    return fixed


def _solve_seed_set_with_capacity(
    seed_ids: tuple[int, ...],
    rest: list[int],
    dist: dict[tuple[int, int], float],
    in_range: dict[tuple[int, int], bool],
    capacity: dict[int, int],
) -> tuple[int, float, dict[int, int]] | None:
    seed_cols = [s for s in seed_ids for _ in range(capacity[s])]
    n = len(rest)
    if n == 0:
        return 0, 0.0, {}
    max_dist = max((dist[(r, s)] for r in rest for s in seed_ids), default=0.0)
    penalty = (n + 1) * (max_dist + 1.0)
    cost = np.full((n, len(seed_cols) + n), np.inf)
    for i, r in enumerate(rest):
        for j, s in enumerate(seed_cols):
            if in_range[(r, s)]:
                cost[i, j] = dist[(r, s)]
        cost[i, len(seed_cols) + i] = penalty
    rows, cols = linear_sum_assignment(cost)
    anchors: dict[int, int] = {}
    isolated = 0
    total = 0.0
    for i, j in zip(rows, cols):
        r = rest[i]
        if j >= len(seed_cols):
            anchors[r] = r
            isolated += 1
        else:
            anchors[r] = seed_cols[j]
            total += cost[i, j]
    return isolated, total, anchors


def _solve_group(
    ids: list[int],
    by_id: dict[int, DeviceNode],
    connectable: dict[int, bool],
    max_size: int,
    max_member_distance_m: float | None,
    require_bs_member: bool,
) -> dict[int, int]:
    """Optimal anchor map for one signature-homogeneous device group."""
    seeds_avail = [d for d in ids if connectable[d] or not require_bs_member]
    if not seeds_avail:
        return {d: d for d in ids}

    dist: dict[tuple[int, int], float] = {}
    in_range: dict[tuple[int, int], bool] = {}
    for r in ids:
        for s in seeds_avail:
            d = distance_m(by_id[r].pos, by_id[s].pos)
            dist[(r, s)] = d
            in_range[(r, s)] = (
                max_member_distance_m is None or d <= max_member_distance_m
            )

    best: tuple[int, int, float, tuple[int, ...]] | None = None
    best_anchors: dict[int, int] | None = None
    for k in range(1, len(seeds_avail) + 1):
        for seed_ids in itertools.combinations(seeds_avail, k):
            rest = [d for d in ids if d not in seed_ids]
            solved = _solve_seed_set(seed_ids, rest, dist, in_range, max_size)
            if solved is None:
                continue
            iso, total, anchors = solved
            coarse = (iso, k, total)
            if best is not None:
                b_iso, b_k, b_total, _ = best
                if (iso, k) > (b_iso, b_k):
                    continue
                if (iso, k) == (b_iso, b_k) and total > b_total and not _dist_tie(total, b_total):
                    continue
            anchors = _lex_fix(seed_ids, rest, dist, in_range, max_size, iso, total)
            full = dict(anchors)
            for s in seed_ids:
                full[s] = s
            encoding = tuple(full[d] for d in ids)
            candidate = (iso, k, total, encoding)
            if best is None or _objective_less(candidate, best):
                best = candidate
                best_anchors = full
    assert best_anchors is not None
    return best_anchors


def _objective_less(a: tuple, b: tuple) -> bool:
    a_iso, a_k, a_total, a_enc = a
    b_iso, b_k, b_total, b_enc = b
    if (a_iso, a_k) != (b_iso, b_k):
        return (a_iso, a_k) < (b_iso, b_k)
    if not _dist_tie(a_total, b_total):
        return a_total < b_total
    return a_enc < b_enc


def form_clusters(
    devices: list[DeviceNode],
    connectable: list[bool],
    signatures: list[DataSignature],
    policy: ClusterPolicy,
    max_member_distance_m: float | None = None,
) -> ClusterAssignment:
    """Partition devices into valid clusters, optimally for small fleets.

    ``connectable`` and ``signatures`` align with ``devices``.
    ``max_member_distance_m`` caps the member-to-seed distance (the D2D
    range); None disables the cap. Devices that no valid cluster can take
    (wrong signature group, out of range, or over capacity) come back as
    singleton clusters flagged non-participating.

    Runs in time exponential in the number of BS-connectable devices per
    signature group; intended for small fleets (n <= ~10).

    Raises NoConnectableDevice when no device can reach the BS at all.
    """
    if not (len(devices) == len(connectable) == len(signatures)):
        raise DimensionMismatch("devices, connectable and signatures must align")
    ids = [d.id for d in devices]
    if len(set(ids)) != len(ids):
        raise ValueError("device ids must be unique")
    if not any(connectable):
        raise NoConnectableDevice("no device can reach the base station")

    by_id = {d.id: d for d in devices}
    conn = {d.id: c for d, c in zip(devices, connectable)}

    anchor_of: dict[int, int] = {}
    for group_idx in _group_devices(devices, signatures):
        group_ids = sorted(devices[i].id for i in group_idx)
        anchor_of.update(
            _solve_group(
                group_ids,
                by_id,
                conn,
                policy.max_size,
                max_member_distance_m,
                policy.require_bs_member,
            )
        )

    members_of: dict[int, list[int]] = {}
    for device_id in sorted(anchor_of):
        members_of.setdefault(anchor_of[device_id], []).append(device_id)

    clusters: list[Cluster] = []
    isolated: list[Cluster] = []
    for anchor in sorted(members_of):
        member_ids = tuple(sorted(members_of[anchor]))
        # With the BS requirement, a device anchored at itself is a chosen
        # seed when connectable and an isolated leftover otherwise. Without
        # it every device is seed-eligible, so nothing ends up isolated.
        if conn[anchor] or not policy.require_bs_member:
            clusters.append(
                Cluster(
                    cluster_id=0, member_ids=member_ids, seed_id=anchor, participating=True
                )
            )
        else:
            isolated.append(
                Cluster(
                    cluster_id=0, member_ids=member_ids, seed_id=None, participating=False
                )
            )
    ordered = clusters + isolated
    final = tuple(
        Cluster(i, c.member_ids, c.seed_id, c.participating)
        for i, c in enumerate(ordered)
    )
    return ClusterAssignment(final)
