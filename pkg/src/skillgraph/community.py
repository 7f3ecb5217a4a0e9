"""Random-walk flow, two-level codebook cost, and community detection.

The walk combines each node's per-relation edge weights (uniform average over
the relations present), teleports to the uniform distribution with a fixed
probability, and treats dangling nodes as teleporting with their whole mass.
A partition is scored by the expected per-step description length, in bits,
of a two-level codebook: one index codebook over community exits plus one
codebook per community over its exits and node visits.

Detection is greedy and multi-level: starting from singletons, nodes move to
the neighboring community with the best cost decrease (seeded shuffled sweeps
until a sweep makes no move), communities aggregate into supernodes, and the
cycle repeats until an aggregation level stops merging.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Mapping

import numpy as np

from . import kernels
from .errors import CommunityError
from .graph import GraphIndex, HeteroGraph, NodeKind, skill_key

DEFAULT_TELEPORT = 0.15
POWER_TOL = 1e-12
POWER_MAX_ITER = 10_000
MOVE_EPS = 1e-10
_MAX_SWEEPS = 1_000


@dataclass
class FlowModel:
    """Node visit rates of the teleporting walk, plus per-community rates.

    ``exit_rate``/``internal_use`` are per-partition quantities; they are
    filled by :func:`community_rates` and left ``None`` until then.
    """

    visit_rate: dict[str, float]
    teleport: float
    exit_rate: dict[int, float] | None = None
    internal_use: dict[int, float] | None = None


@dataclass
class CommunityPartition:
    assignment: dict[str, int]
    description_length: float
    num_communities: int


def _plogp(x: float) -> float:
    return x * math.log2(x) if x > 0.0 else 0.0


class FlowGraph:
    """Array bundle consumed by the kernels.

    Units are graph nodes at level 0 and supernodes after aggregation; every
    unit carries its visit rate, teleport mass, and original-node count, and
    sparse inter-unit flows exclude nothing (self-flows stay, they are simply
    never counted as exits).
    """

    def __init__(self, ids: list[str], visit: np.ndarray, tele: np.ndarray,
                 size: np.ndarray, esrc: np.ndarray, edst: np.ndarray,
                 eflow: np.ndarray, n_orig: int, node_plogp_sum: float) -> None:
        self.ids = ids
        self.visit = visit
        self.tele = tele
        self.size = size
        self.esrc = esrc
        self.edst = edst
        self.eflow = eflow
        self.n_orig = n_orig
        self.node_plogp_sum = node_plogp_sum
        self.n_units = visit.shape[0]
        order_out = np.lexsort((edst, esrc))
        self.out_idx = edst[order_out]
        self.out_flow = eflow[order_out]
        self.out_ptr = np.zeros(self.n_units + 1, dtype=np.int64)
        np.add.at(self.out_ptr[1:], esrc, 1)
        np.cumsum(self.out_ptr, out=self.out_ptr)
        order_in = np.lexsort((esrc, edst))
        self.in_idx = esrc[order_in]
        self.in_flow = eflow[order_in]
        self.in_ptr = np.zeros(self.n_units + 1, dtype=np.int64)
        np.add.at(self.in_ptr[1:], edst, 1)
        np.cumsum(self.in_ptr, out=self.in_ptr)
        not_self = esrc != edst
        self.sout = np.bincount(esrc[not_self], weights=eflow[not_self],
                                minlength=self.n_units)

    @classmethod
    def from_graph(cls, g: HeteroGraph, teleport: float,
                   visit: np.ndarray | None = None) -> "FlowGraph":
        if g.num_nodes() == 0:
            raise CommunityError("graph is empty")
        if not 0.0 <= teleport < 1.0:
            raise CommunityError(f"teleport {teleport!r} outside [0, 1)")
        index = GraphIndex(g)
        src, dst, wgt, dangling = index.combined_transition()
        if visit is None:
            visit, _iters, resid = kernels.power_iterate(
                src, dst, wgt, dangling, index.n, teleport, POWER_TOL, POWER_MAX_ITER)
            if resid > POWER_TOL:
                raise CommunityError(
                    f"stationary distribution did not converge after {POWER_MAX_ITER} "
                    f"iterations (residual {resid:.3e})")
        visit = np.asarray(visit, dtype=np.float64)
        tele = np.where(dangling, visit, teleport * visit)
        eflow = (1.0 - teleport) * visit[src] * wgt
        keep = eflow > 0.0
        node_plogp_sum = float(sum(_plogp(v) for v in visit))
        return cls(index.ids, visit, tele, np.ones(index.n, dtype=np.float64),
                   src[keep], dst[keep], eflow[keep], index.n, node_plogp_sum)

    def partition_cost(self, labels: np.ndarray) -> float:
        labels = np.asarray(labels, dtype=np.int64)
        return float(kernels.partition_cost(
            labels, self.visit, self.tele, self.size, self.esrc, self.edst,
            self.eflow, float(self.n_orig), self.node_plogp_sum))

    def aggregate(self, labels: np.ndarray, k: int) -> "FlowGraph":
        labels = np.asarray(labels, dtype=np.int64)
        visit = np.bincount(labels, weights=self.visit, minlength=k)
        tele = np.bincount(labels, weights=self.tele, minlength=k)
        size = np.bincount(labels, weights=self.size, minlength=k)
        keys = labels[self.esrc] * k + labels[self.edst]
        ukeys, inverse = np.unique(keys, return_inverse=True)
        flow = np.bincount(inverse, weights=self.eflow, minlength=ukeys.size)
        return FlowGraph([f"unit{i}" for i in range(k)], visit, tele, size,
                         (ukeys // k).astype(np.int64), (ukeys % k).astype(np.int64),
                         flow, self.n_orig, self.node_plogp_sum)

    def singleton_module_state(self) -> dict:
        """Aggregate arrays for the all-singletons labeling."""
        mod_exit = self.tele * (self.n_orig - self.size) / self.n_orig + self.sout
        return {
            "mod_visit": self.visit.copy(),
            "mod_tele": self.tele.copy(),
            "mod_size": self.size.copy(),
            "mod_cross": self.sout.copy(),
            "mod_exit": mod_exit,
            "exit_sum": float(mod_exit.sum()),
        }


def stationary_distribution(g: HeteroGraph, teleport: float = DEFAULT_TELEPORT,
                            ) -> dict[str, float]:
    """Visit rates of the teleporting walk, by power iteration (sums to 1)."""
    if g.num_nodes() == 0:
        raise CommunityError("graph is empty")
    if not 0.0 < teleport < 1.0:
        raise CommunityError(f"teleport {teleport!r} outside (0, 1)")
    index = GraphIndex(g)
    src, dst, wgt, dangling = index.combined_transition()
    visit, _iters, resid = kernels.power_iterate(
        src, dst, wgt, dangling, index.n, teleport, POWER_TOL, POWER_MAX_ITER)
    if resid > POWER_TOL:
        raise CommunityError(
            f"stationary distribution did not converge after {POWER_MAX_ITER} "
            f"iterations (residual {resid:.3e})")
    return {node_id: float(p) for node_id, p in zip(index.ids, visit)}


def compute_flow(g: HeteroGraph, teleport: float = DEFAULT_TELEPORT) -> FlowModel:
    return FlowModel(visit_rate=stationary_distribution(g, teleport), teleport=teleport)


def _labels_array(g: HeteroGraph, assignment: Mapping[str, int]) -> np.ndarray:
    ids = g.node_ids()
    missing = [i for i in ids if i not in assignment]
    if missing:
        raise CommunityError(f"assignment misses {len(missing)} nodes, e.g. {missing[0]!r}")
    raw = np.asarray([assignment[i] for i in ids], dtype=np.int64)
    _, dense = np.unique(raw, return_inverse=True)
    return dense.astype(np.int64)


def _flow_graph_for(g: HeteroGraph, flow: FlowModel) -> FlowGraph:
    ids = g.node_ids()
    if set(flow.visit_rate) != set(ids):
        raise CommunityError("flow model and graph disagree on the node set")
    visit = np.asarray([flow.visit_rate[i] for i in ids], dtype=np.float64)
    total = float(visit.sum())
    if abs(total - 1.0) > 1e-6:
        raise CommunityError(f"visit rates sum to {total!r}, not 1")
    return FlowGraph.from_graph(g, flow.teleport, visit=visit)


def map_equation(g: HeteroGraph, flow: FlowModel, assignment: Mapping[str, int]) -> float:
    """Description length (bits) of the partition under the two-level codebook."""
    return _flow_graph_for(g, flow).partition_cost(_labels_array(g, assignment))


def community_rates(g: HeteroGraph, flow: FlowModel, assignment: Mapping[str, int],
                    ) -> tuple[dict[int, float], dict[int, float]]:
    """Per-community exit rate q_i and codebook usage p_i (exit + visits).

    Also fills ``flow.exit_rate`` / ``flow.internal_use`` in place.
    """
    fg = _flow_graph_for(g, flow)
    labels = _labels_array(g, assignment)
    k = int(labels.max()) + 1
    mod_visit = np.bincount(labels, weights=fg.visit, minlength=k)
    mod_tele = np.bincount(labels, weights=fg.tele, minlength=k)
    mod_size = np.bincount(labels, weights=fg.size, minlength=k)
    lsrc = labels[fg.esrc]
    cross = lsrc != labels[fg.edst]
    mod_cross = np.bincount(lsrc[cross], weights=fg.eflow[cross], minlength=k)
    q = mod_tele * (fg.n_orig - mod_size) / fg.n_orig + mod_cross
    exit_rate = {m: float(q[m]) for m in range(k)}
    internal = {m: float(q[m] + mod_visit[m]) for m in range(k)}
    flow.exit_rate = exit_rate
    flow.internal_use = internal
    return exit_rate, internal


def _renumber(labels: np.ndarray) -> tuple[np.ndarray, int]:
    _, dense = np.unique(labels, return_inverse=True)
    return dense.astype(np.int64), int(dense.max()) + 1 if dense.size else 0


def _sweep_to_convergence(fg: FlowGraph, labels: np.ndarray,
                          rng: np.random.Generator, tracked: float) -> float:
    state = fg.singleton_module_state()
    exit_sum = state["exit_sum"]
    for _sweep in range(_MAX_SWEEPS):
        order = rng.permutation(fg.n_units).astype(np.int64)
        moves, delta, exit_sum = kernels.local_move_pass(
            order, labels, fg.visit, fg.tele, fg.size, fg.sout,
            fg.out_ptr, fg.out_idx, fg.out_flow, fg.in_ptr, fg.in_idx, fg.in_flow,
            state["mod_visit"], state["mod_tele"], state["mod_size"],
            state["mod_cross"], state["mod_exit"], exit_sum,
            float(fg.n_orig), MOVE_EPS)
        tracked += delta
        if moves == 0:
            return tracked
    raise CommunityError("local moves failed to converge")  # pragma: no cover


def detect_communities(g: HeteroGraph, seed: int = 0,
                       teleport: float = DEFAULT_TELEPORT) -> CommunityPartition:
    """Greedy multi-level minimization of the codebook description length.

    Local-move sweeps run until quiet, communities aggregate into supernodes,
    and the cycle repeats until an aggregation level produces no further
    merge. Deterministic for a fixed seed: node numbering is sorted-id based,
    sweep order comes from a seeded generator, zero-gain moves are rejected,
    and gain ties resolve to the lowest community index.
    """
    fg = FlowGraph.from_graph(g, teleport)
    labels = np.arange(fg.n_units, dtype=np.int64)
    tracked = fg.partition_cost(labels)
    rng = np.random.default_rng(seed)
    level = fg
    final = np.arange(fg.n_units, dtype=np.int64)
    while True:
        labels = np.arange(level.n_units, dtype=np.int64)
        tracked = _sweep_to_convergence(level, labels, rng, tracked)
        dense, k = _renumber(labels)
        final = dense[final]
        if k == level.n_units:
            break
        level = level.aggregate(dense, k)
    recomputed = fg.partition_cost(final)
    if abs(recomputed - tracked) > 1e-6:
        raise CommunityError(
            f"incremental cost tracking drifted: {tracked!r} vs {recomputed!r}")
    # canonical labels: first appearance over sorted node ids
    relabel: dict[int, int] = {}
    assignment: dict[str, int] = {}
    for node_id, lab in zip(fg.ids, final):
        assignment[node_id] = relabel.setdefault(int(lab), len(relabel))
    return CommunityPartition(assignment=assignment,
                              description_length=float(recomputed),
                              num_communities=len(relabel))


def _skill_keys_by_community(part: CommunityPartition, g: HeteroGraph,
                             identity: Callable[[str], str]) -> dict[int, set[str]]:
    out: dict[int, set[str]] = {}
    for sid in g.node_ids(NodeKind.SKILL):
        out.setdefault(part.assignment[sid], set()).add(identity(g.node_name(sid)))
    return out


def merge_partitions(edu_part: CommunityPartition, edu_graph: HeteroGraph,
                     car_part: CommunityPartition, car_graph: HeteroGraph,
                     skill_identity: Callable[[str], str] = skill_key,
                     ) -> dict[str, int]:
    """Pair education and career communities by shared-skill count.

    Greedy one-to-one matching by descending overlap (ties to the lower
    education index, then lower career index); zero overlap never merges.
    Returns merged labels keyed by union-graph node ids (courses, jobs, and
    skill identity keys). A skill present in both graphs takes the label of
    its education-side community.
    """
    edu_skills = _skill_keys_by_community(edu_part, edu_graph, skill_identity)
    car_skills = _skill_keys_by_community(car_part, car_graph, skill_identity)
    candidates: list[tuple[int, int, int]] = []
    for e in sorted(edu_skills):
        for c in sorted(car_skills):
            overlap = len(edu_skills[e] & car_skills[c])
            if overlap > 0:
                candidates.append((-overlap, e, c))
    candidates.sort()
    edu_final: dict[int, int] = {}
    car_final: dict[int, int] = {}
    next_label = 0
    for _neg, e, c in candidates:
        if e in edu_final or c in car_final:
            continue
        edu_final[e] = car_final[c] = next_label
        next_label += 1
    for e in range(edu_part.num_communities):
        if e not in edu_final:
            edu_final[e] = next_label
            next_label += 1
    for c in range(car_part.num_communities):
        if c not in car_final:
            car_final[c] = next_label
            next_label += 1
    labels: dict[str, int] = {}
    for node_id in edu_graph.node_ids():
        final = edu_final[edu_part.assignment[node_id]]
        if edu_graph.node_kind(node_id) is NodeKind.SKILL:
            labels.setdefault(skill_identity(edu_graph.node_name(node_id)), final)
        else:
            labels[node_id] = final
    for node_id in car_graph.node_ids():
        final = car_final[car_part.assignment[node_id]]
        if car_graph.node_kind(node_id) is NodeKind.SKILL:
            labels.setdefault(skill_identity(car_graph.node_name(node_id)), final)
        else:
            labels[node_id] = final
    return labels


# ---------------------------------------------------------------------------
# partition / label files
# ---------------------------------------------------------------------------

def write_labels(path: str | Path, labels: Mapping[str, int]) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["node_id", "community"])
    for node_id in sorted(labels):
        writer.writerow([node_id, labels[node_id]])
    Path(path).write_text(buf.getvalue(), encoding="utf-8", newline="")


def read_labels(path: str | Path) -> dict[str, int]:
    text = Path(path).read_text(encoding="utf-8")
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header != ["node_id", "community"]:
        raise CommunityError(f"{path}: bad header {header!r}")
    out: dict[str, int] = {}
    for row in reader:
        if len(row) != 2:
            raise CommunityError(f"{path}: bad row {row!r}")
        out[row[0]] = int(row[1])
    return out


def write_partition(path: str | Path, summary_path: str | Path,
                    partition: CommunityPartition, seed: int) -> None:
    write_labels(path, partition.assignment)
    summary = (f"L={partition.description_length:.17g} "
               f"k={partition.num_communities} seed={seed}\n")
    Path(summary_path).write_text(summary, encoding="utf-8", newline="")
