"""Independent reference implementations used as test oracles.

Everything here is written from definitions, by a deliberately different
route than the package: dense matrices instead of sparse flows, recursive
tour enumeration instead of layered propagation, and plain entropy formulas
instead of the plogp decomposition. Keep it that way.
"""
from __future__ import annotations

import math

import numpy as np

from skillgraph.graph import HeteroGraph, Relation


# ---------------------------------------------------------------------------
# ranked-retrieval metrics, straight from the definitions
# ---------------------------------------------------------------------------

def ref_average_precision(flags: list[int], total_relevant: int,
                          cutoff: int | None = None) -> float:
    """AP of a 0/1 relevance sequence; total_relevant counts all judged-relevant."""
    denom = total_relevant if cutoff is None else min(total_relevant, cutoff)
    if denom == 0:
        return 0.0
    considered = flags if cutoff is None else flags[:cutoff]
    acc = 0.0
    hits = 0
    for rank, flag in enumerate(considered, start=1):
        if flag:
            hits += 1
            acc += hits / rank
    return acc / denom


def ref_precision(flags: list[int]) -> float:
    return sum(flags) / len(flags) if flags else 0.0


def ref_precision_at(flags: list[int], k: int) -> float:
    return sum(flags[:k]) / k


# ---------------------------------------------------------------------------
# dense walk matrix, stationary solve, map equation from the entropy form
# ---------------------------------------------------------------------------

def dense_transition(g: HeteroGraph, teleport: float) -> tuple[list[str], np.ndarray]:
    """Full transition matrix: relation-averaged edges, teleport, dangling=uniform."""
    ids = g.node_ids()
    n = len(ids)
    pos = {node_id: i for i, node_id in enumerate(ids)}
    P = np.zeros((n, n))
    for i, node_id in enumerate(ids):
        rels = g.out_relations(node_id)
        if not rels:
            P[i, :] = 1.0 / n
            continue
        row = np.zeros(n)
        for rel in rels:
            for target, weight in g.out_edges(node_id, rel):
                row[pos[target]] += weight / len(rels)
        P[i, :] = teleport / n + (1.0 - teleport) * row
    return ids, P


def ref_stationary(g: HeteroGraph, teleport: float) -> dict[str, float]:
    """Left eigenvector of the dense transition, by linear solve."""
    ids, P = dense_transition(g, teleport)
    n = len(ids)
    A = np.vstack([P.T - np.eye(n), np.ones((1, n))])
    b = np.zeros(n + 1)
    b[-1] = 1.0
    p, *_ = np.linalg.lstsq(A, b, rcond=None)
    return dict(zip(ids, p))


def _entropy_term(p: float, total: float) -> float:
    if p <= 0.0 or total <= 0.0:
        return 0.0
    return -p * math.log2(p / total)


def ref_map_equation(g: HeteroGraph, visit: dict[str, float],
                     assignment: dict[str, int], teleport: float) -> float:
    """Two-level description length: index codebook + per-community codebooks."""
    ids, P = dense_transition(g, teleport)
    pos = {node_id: i for i, node_id in enumerate(ids)}
    p = np.array([visit[node_id] for node_id in ids])
    flow = p[:, None] * P
    modules = sorted(set(assignment[node_id] for node_id in ids))
    q = {}
    members = {m: [pos[i] for i in ids if assignment[i] == m] for m in modules}
    for m in modules:
        inside = np.zeros(len(ids), dtype=bool)
        inside[members[m]] = True
        q[m] = float(flow[np.ix_(inside, ~inside)].sum())
    q_total = sum(q.values())
    index_len = sum(_entropy_term(q[m], q_total) for m in modules)
    module_len = 0.0
    for m in modules:
        usage = q[m] + float(p[members[m]].sum())
        module_len += _entropy_term(q[m], usage)
        for i in members[m]:
            module_len += _entropy_term(float(p[i]), usage)
    return index_len + module_len


def set_partitions(n: int):
    """All set partitions of range(n) as restricted-growth strings."""
    a = [0] * n
    b = [1] * n
    while True:
        yield tuple(a)
        i = n - 1
        while i > 0 and a[i] == b[i]:
            i -= 1
        if i == 0:
            return
        a[i] += 1
        fill = b[i] + (1 if a[i] == b[i] else 0)
        for j in range(i + 1, n):
            a[j] = 0
            b[j] = fill


# ---------------------------------------------------------------------------
# meta-path scoring by explicit depth-first tour enumeration
# ---------------------------------------------------------------------------

def ref_score_metapath(g: HeteroGraph, steps, seeds: dict[str, float],
                       labels: dict[str, int] | None = None,
                       community: int | None = None) -> dict[str, float]:
    """steps: list of (Relation, reverse: bool, restricted: bool) triples."""
    out: dict[str, float] = {}

    def walk(node: str, depth: int, prob: float) -> None:
        if depth == len(steps):
            out[node] = out.get(node, 0.0) + prob
            return
        relation, reverse, restricted = steps[depth]
        edges = g.in_edges(node, relation) if reverse else g.out_edges(node, relation)
        for nbr, weight in edges:
            if restricted and community is not None and labels.get(nbr) != community:
                continue
            walk(nbr, depth + 1, prob * weight)

    for seed, weight in seeds.items():
        walk(seed, 0, weight)
    return {node: score for node, score in out.items() if score > 0.0}


BASE_STEPS = [(Relation.REQUIRED, False, True), (Relation.LINKED, False, True),
              (Relation.COVERED, True, True)]
TAKEN_STEPS = [(Relation.COVERED, False, True), (Relation.COVERED, True, True)]
UPSKILL_STEPS = BASE_STEPS + [(Relation.PRE_REQUIRED, True, False)]


def ref_scenario_scores(g: HeteroGraph, labels: dict[str, int], scenario: int,
                        seeds: dict[str, float], taken: tuple[str, ...] = (),
                        depth: int = 1) -> dict[str, float]:
    """Scenario composition, fully re-derived over the DFS scorer."""
    groups: dict[int, dict[str, float]] = {}
    for job, weight in seeds.items():
        groups.setdefault(labels[job], {})[job] = weight
    total: dict[str, float] = {}

    def add(part: dict[str, float]) -> None:
        for node, score in part.items():
            total[node] = total.get(node, 0.0) + score

    for comm, group in sorted(groups.items()):
        if scenario in (1, 2):
            base = ref_score_metapath(g, BASE_STEPS, group, labels, comm)
            add(base)
            frontier = dict(base)
            for _ in range(depth):
                nxt: dict[str, float] = {}
                for course, score in frontier.items():
                    for prereq, weight in g.out_edges(course, Relation.PRE_REQUIRED):
                        nxt[prereq] = nxt.get(prereq, 0.0) + score * weight
                add(nxt)
                frontier = nxt
                if not frontier:
                    break
            if scenario == 2:
                tseeds = {c: 1.0 / len(taken) for c in taken}
                add(ref_score_metapath(g, TAKEN_STEPS, tseeds, labels, comm))
        else:
            add(ref_score_metapath(g, UPSKILL_STEPS, group, labels, comm))
    if scenario == 2:
        for course in taken:
            total.pop(course, None)
    return {node: score for node, score in total.items() if score > 0.0}


# ---------------------------------------------------------------------------
# random graphs for oracle-vs-implementation sweeps
# ---------------------------------------------------------------------------

def flow_isolated_nodes(g: HeteroGraph) -> list[str]:
    """Nodes with no edges in any relation, either direction.

    Such nodes have no neighboring community, so neighbor-limited greedy
    detection must leave them as singletons even when teleport flow would
    make a merge cheaper; optimality claims exclude them.
    """
    isolated = []
    for node in g.node_ids():
        if not any(g.out_edges(node, r) or g.in_edges(node, r) for r in Relation):
            isolated.append(node)
    return isolated


def random_hetero_graph(rng: np.random.Generator, max_nodes: int = 50,
                        n_labels: int = 2) -> tuple[HeteroGraph, dict[str, int]]:
    """Random typed graph (normalized weights) plus random community labels."""
    from skillgraph.graph import NodeKind

    n_courses = int(rng.integers(2, 11))
    n_jobs = int(rng.integers(1, 7))
    n_skills = int(rng.integers(2, 13))
    while n_courses + n_jobs + n_skills > max_nodes:
        n_skills -= 1
    g = HeteroGraph()
    courses = [f"C{i}" for i in range(n_courses)]
    jobs = [f"J{i}" for i in range(n_jobs)]
    skills = [f"S{i}" for i in range(n_skills)]
    for c in courses:
        g.add_node(c, NodeKind.COURSE)
    for j in jobs:
        g.add_node(j, NodeKind.JOB)
    for s in skills:
        g.add_node(s, NodeKind.SKILL)

    def add_normalized(source: str, relation: Relation, pool: list[str]) -> None:
        count = int(rng.integers(1, min(5, len(pool)) + 1))
        targets = sorted(rng.choice(len(pool), size=count, replace=False).tolist())
        raws = rng.uniform(0.2, 1.0, size=count)
        total = raws.sum()
        for t, raw in zip(targets, raws):
            g.add_edge(source, relation, pool[t], float(raw / total))

    for c in courses:
        if rng.random() < 0.9:
            add_normalized(c, Relation.COVERED, skills)
        others = [x for x in courses if x != c]
        if others and rng.random() < 0.7:
            add_normalized(c, Relation.PRE_REQUIRED, others)
    for j in jobs:
        add_normalized(j, Relation.REQUIRED, skills)
    for s in skills:
        others = [x for x in skills if x != s]
        if others and rng.random() < 0.85:
            add_normalized(s, Relation.LINKED, others)
    g.validate()
    labels = {node_id: int(rng.integers(0, n_labels)) for node_id in g.node_ids()}
    return g, labels
