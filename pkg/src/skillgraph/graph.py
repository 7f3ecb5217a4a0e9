"""Typed directed weighted graph over courses, jobs, and skills.

Four relations exist, each fixing its endpoint kinds:

* ``p`` pre-required: course -> course
* ``c`` covered:      course -> skill
* ``r`` required:     job    -> skill
* ``l`` linked:       skill  -> skill

Per node and relation, outgoing weights always sum to 1 when any edge of
that relation exists.
"""
from __future__ import annotations

import enum
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterator, Sequence

import numpy as np

from .errors import GraphError
from .ingest import Course, EnrollmentRecord, Job, Skill, tokenize

log = logging.getLogger(__name__)

WEIGHT_SUM_TOL = 1e-9


class NodeKind(enum.Enum):
    COURSE = "course"
    JOB = "job"
    SKILL = "skill"


class Relation(enum.Enum):
    PRE_REQUIRED = "p"
    COVERED = "c"
    REQUIRED = "r"
    LINKED = "l"


RELATION_SIGNATURE: dict[Relation, tuple[NodeKind, NodeKind]] = {
    Relation.PRE_REQUIRED: (NodeKind.COURSE, NodeKind.COURSE),
    Relation.COVERED: (NodeKind.COURSE, NodeKind.SKILL),
    Relation.REQUIRED: (NodeKind.JOB, NodeKind.SKILL),
    Relation.LINKED: (NodeKind.SKILL, NodeKind.SKILL),
}


@dataclass(frozen=True)
class Edge:
    source: str
    target: str
    relation: Relation
    weight: float


@dataclass
class GraphStats:
    node_counts: dict[NodeKind, int]
    edge_counts: dict[Relation, int]

    @property
    def total_nodes(self) -> int:
        return sum(self.node_counts.values())

    @property
    def total_edges(self) -> int:
        return sum(self.edge_counts.values())


def skill_key(name: str) -> str:
    """Canonical cross-corpus identity of a skill name."""
    return "_".join(tokenize(name))


class HeteroGraph:
    """Directed weighted multigraph with typed nodes and relations.

    At most one edge exists per (source, target, relation). Node payload is a
    display name (course name, job title, skill name) defaulting to the id.
    """

    def __init__(self) -> None:
        self._kind: dict[str, NodeKind] = {}
        self._name: dict[str, str] = {}
        self._out: dict[Relation, dict[str, dict[str, float]]] = {r: {} for r in Relation}
        self._in: dict[Relation, dict[str, dict[str, float]]] = {r: {} for r in Relation}
        self.counts: dict[str, dict] = {}

    # -- construction -------------------------------------------------------

    def add_node(self, node_id: str, kind: NodeKind, name: str | None = None) -> None:
        existing = self._kind.get(node_id)
        if existing is not None:
            if existing is not kind:
                raise GraphError(f"node id {node_id!r} used as both {existing.value} and {kind.value}")
            return
        self._kind[node_id] = kind
        self._name[node_id] = name if name is not None else node_id

    def add_edge(self, source: str, relation: Relation, target: str, weight: float,
                 combine: bool = False) -> None:
        if weight <= 0.0:
            raise GraphError(f"edge {source}-{relation.value}->{target} has non-positive weight")
        src_kind, dst_kind = RELATION_SIGNATURE[relation]
        if self._kind.get(source) is not src_kind:
            raise GraphError(f"edge {source}-{relation.value}->{target}: source is not a {src_kind.value}")
        if self._kind.get(target) is not dst_kind:
            raise GraphError(f"edge {source}-{relation.value}->{target}: target is not a {dst_kind.value}")
        row = self._out[relation].setdefault(source, {})
        if target in row and not combine:
            raise GraphError(f"duplicate edge {source}-{relation.value}->{target}")
        row[target] = row.get(target, 0.0) + weight
        col = self._in[relation].setdefault(target, {})
        col[source] = row[target]

    # -- queries ------------------------------------------------------------

    def __contains__(self, node_id: str) -> bool:
        return node_id in self._kind

    def node_ids(self, kind: NodeKind | None = None) -> list[str]:
        if kind is None:
            return sorted(self._kind)
        return sorted(i for i, k in self._kind.items() if k is kind)

    def node_kind(self, node_id: str) -> NodeKind:
        try:
            return self._kind[node_id]
        except KeyError:
            raise GraphError(f"unknown node {node_id!r}") from None

    def node_name(self, node_id: str) -> str:
        return self._name[node_id]

    def set_node_name(self, node_id: str, name: str) -> None:
        """Attach a display name, e.g. after loading a name-less snapshot."""
        if node_id not in self._kind:
            raise GraphError(f"unknown node {node_id!r}")
        self._name[node_id] = name

    def out_edges(self, node_id: str, relation: Relation) -> list[tuple[str, float]]:
        return sorted(self._out[relation].get(node_id, {}).items())

    def in_edges(self, node_id: str, relation: Relation) -> list[tuple[str, float]]:
        return sorted(self._in[relation].get(node_id, {}).items())

    def out_relations(self, node_id: str) -> list[Relation]:
        return [r for r in Relation if self._out[r].get(node_id)]

    def edges(self) -> Iterator[Edge]:
        for relation in Relation:
            for source in sorted(self._out[relation]):
                for target, weight in sorted(self._out[relation][source].items()):
                    yield Edge(source, target, relation, weight)

    def num_nodes(self) -> int:
        return len(self._kind)

    def num_edges(self) -> int:
        return sum(len(row) for rel in Relation for row in self._out[rel].values())

    def copy(self) -> "HeteroGraph":
        g = HeteroGraph()
        g._kind = dict(self._kind)
        g._name = dict(self._name)
        for rel in Relation:
            g._out[rel] = {s: dict(ts) for s, ts in self._out[rel].items()}
            g._in[rel] = {t: dict(ss) for t, ss in self._in[rel].items()}
        g.counts = {k: dict(v) for k, v in self.counts.items()}
        return g

    def stats(self) -> GraphStats:
        node_counts = {k: 0 for k in NodeKind}
        for kind in self._kind.values():
            node_counts[kind] += 1
        edge_counts = {r: sum(len(row) for row in self._out[r].values()) for r in Relation}
        return GraphStats(node_counts=node_counts, edge_counts=edge_counts)

    def validate(self) -> None:
        """Check kind discipline, weight positivity, normalization, adjacency mirror."""
        for rel in Relation:
            src_kind, dst_kind = RELATION_SIGNATURE[rel]
            for source, row in self._out[rel].items():
                if self._kind.get(source) is not src_kind:
                    raise GraphError(f"{source!r} has {rel.value}-edges but is not a {src_kind.value}")
                total = 0.0
                for target, weight in row.items():
                    if self._kind.get(target) is not dst_kind:
                        raise GraphError(f"{target!r} targeted by {rel.value} but is not a {dst_kind.value}")
                    if weight <= 0.0:
                        raise GraphError(f"non-positive weight on {source}-{rel.value}->{target}")
                    if self._in[rel].get(target, {}).get(source) != weight:
                        raise GraphError(f"reverse adjacency out of sync at {source}-{rel.value}->{target}")
                    total += weight
                if row and abs(total - 1.0) > WEIGHT_SUM_TOL:
                    raise GraphError(
                        f"outgoing {rel.value}-weights of {source!r} sum to {total!r}, not 1")
            for target, col in self._in[rel].items():
                for source, weight in col.items():
                    if self._out[rel].get(source, {}).get(target) != weight:
                        raise GraphError(f"forward adjacency out of sync at {source}-{rel.value}->{target}")


def prereq_counts(enrollments: Sequence[EnrollmentRecord],
                  ) -> tuple[dict[tuple[str, str], int], dict[str, int]]:
    """Count who-took-what-first over an enrollment log.

    Returns ``(pair, total)`` where ``pair[(ci, cj)]`` is the number of
    distinct students with some enrollment in ``cj`` at a strictly earlier
    term than some enrollment in ``ci``, and ``total[ci]`` the number of
    distinct students with any strictly earlier enrollment in a different
    course. Retakes of the same course never count.
    """
    by_student: dict[str, list[tuple[int, str]]] = {}
    for rec in enrollments:
        by_student.setdefault(rec.student, []).append((rec.term, rec.course))
    pair: dict[tuple[str, str], int] = {}
    total: dict[str, int] = {}
    for student in sorted(by_student):
        history = by_student[student]
        last_term = {c: max(t for t, cc in history if cc == c) for _, c in history}
        contributed: set[tuple[str, str]] = set()
        for ci, t_late in last_term.items():
            for cj, _ in {(c, None) for t, c in history if t < t_late and c != ci}:
                contributed.add((ci, cj))
        for ci in {c for c, _ in contributed}:
            total[ci] = total.get(ci, 0) + 1
        for key in contributed:
            pair[key] = pair.get(key, 0) + 1
    return pair, total


def build_education_graph(courses: Sequence[Course], enrollments: Sequence[EnrollmentRecord],
                          catalog: Sequence[Skill] | None = None) -> HeteroGraph:
    """Course + skill graph with covered and pre-required edges.

    Covered weight is 1/(number of skills the course covers); pre-required
    weights are proportional to distinct-student precedence counts and
    normalized to sum to 1 per course.
    """
    g = HeteroGraph()
    ids = [c.id for c in courses]
    if len(set(ids)) != len(ids):
        raise GraphError("duplicate course ids")
    skill_names = {s.id: s.name for s in catalog} if catalog else {}
    for course in courses:
        g.add_node(course.id, NodeKind.COURSE, course.name)
    for course in courses:
        for sid in sorted(course.skills):
            g.add_node(sid, NodeKind.SKILL, skill_names.get(sid, sid))
    cover_counts: dict[str, int] = {}
    for course in courses:
        d = len(course.skills)
        cover_counts[course.id] = d
        if d == 0:
            continue
        for sid in sorted(course.skills):
            g.add_edge(course.id, Relation.COVERED, sid, 1.0 / d)
    known = set(ids)
    kept = []
    skipped = 0
    for rec in enrollments:
        if rec.course in known:
            kept.append(rec)
        else:
            skipped += 1
    if skipped:
        log.warning("skipped %d enrollment records naming unknown courses", skipped)
    pair, total = prereq_counts(kept)
    out_sum: dict[str, int] = {}
    for (ci, _cj), n in pair.items():
        out_sum[ci] = out_sum.get(ci, 0) + n
    for (ci, cj), n in sorted(pair.items()):
        g.add_edge(ci, Relation.PRE_REQUIRED, cj, n / out_sum[ci])
    g.counts = {
        "covered_total": cover_counts,
        "prereq_pair": {f"{ci}->{cj}": n for (ci, cj), n in sorted(pair.items())},
        "prereq_total": dict(sorted(total.items())),
    }
    g.validate()
    return g


def build_career_graph(jobs: Sequence[Job], aggregate_by_title: bool = False) -> HeteroGraph:
    """Job + skill graph with required edges.

    One node per posting by default; with ``aggregate_by_title`` postings
    sharing a normalized title collapse into one node whose edge weights are
    skill frequencies over the merged postings.
    """
    ids = [j.id for j in jobs]
    if len(set(ids)) != len(ids):
        raise GraphError("duplicate job ids")
    g = HeteroGraph()
    if aggregate_by_title:
        groups: dict[str, list[Job]] = {}
        for job in jobs:
            groups.setdefault(" ".join(tokenize(job.title)), []).append(job)
        for title in sorted(groups):
            node_id = "_".join(title.split()) or "untitled"
            g.add_node(node_id, NodeKind.JOB, title)
            counts: dict[str, int] = {}
            for job in groups[title]:
                for sid in job.skills:
                    counts[sid] = counts.get(sid, 0) + 1
            denom = sum(counts.values())
            for sid in sorted(counts):
                g.add_node(sid, NodeKind.SKILL, sid)
                g.add_edge(node_id, Relation.REQUIRED, sid, counts[sid] / denom)
        g.counts = {"required_total": {"_".join(t.split()) or "untitled":
                                       sum(len(j.skills) for j in grp)
                                       for t, grp in groups.items()}}
        g.validate()
        return g
    for job in jobs:
        g.add_node(job.id, NodeKind.JOB, job.title)
        if not job.skills:
            raise GraphError(f"job {job.id!r} has no skills")
        d = len(job.skills)
        for sid in sorted(job.skills):
            g.add_node(sid, NodeKind.SKILL, sid)
            g.add_edge(job.id, Relation.REQUIRED, sid, 1.0 / d)
    g.counts = {"required_total": {j.id: len(j.skills) for j in jobs}}
    g.validate()
    return g


def merge_graphs(education: HeteroGraph, career: HeteroGraph,
                 skill_identity: Callable[[str], str] = skill_key) -> HeteroGraph:
    """Union of both graphs with skill nodes fused by name identity.

    Every skill node's id is rewritten to ``skill_identity(name)``; edges that
    become parallel under the rewrite have their weights added, so per-source
    out-weight totals are preserved.
    """
    merged = HeteroGraph()

    def remap(g: HeteroGraph) -> dict[str, str]:
        mapping = {}
        for node_id in g.node_ids():
            if g.node_kind(node_id) is NodeKind.SKILL:
                key = skill_identity(g.node_name(node_id))
                if not key:
                    raise GraphError(f"skill {node_id!r} normalizes to an empty key")
                mapping[node_id] = key
            else:
                mapping[node_id] = node_id
        return mapping

    edu_map, car_map = remap(education), remap(career)
    edu_course_jobs = {i for i in education.node_ids()
                       if education.node_kind(i) is not NodeKind.SKILL}
    for node_id in career.node_ids():
        if career.node_kind(node_id) is not NodeKind.SKILL and node_id in edu_course_jobs:
            raise GraphError(f"node id {node_id!r} appears in both corpora")
    for g, mapping in ((education, edu_map), (career, car_map)):
        for node_id in g.node_ids():
            kind = g.node_kind(node_id)
            name = mapping[node_id] if kind is NodeKind.SKILL else g.node_name(node_id)
            merged.add_node(mapping[node_id], kind, name)
    for g, mapping in ((education, edu_map), (career, car_map)):
        for edge in g.edges():
            merged.add_edge(mapping[edge.source], edge.relation, mapping[edge.target],
                            edge.weight, combine=True)
    merged.validate()
    return merged


def graph_stats(g: HeteroGraph) -> GraphStats:
    return g.stats()


# ---------------------------------------------------------------------------
# snapshot serialization
# ---------------------------------------------------------------------------
# One line per node (``N <id> <kind>``) and edge
# (``E <src> <relation> <dst> <weight>``, 17 significant digits), sorted
# lexicographically. Ids are percent-encoded (space and '%' only) so the
# line format stays whitespace-delimited.

def _encode_id(node_id: str) -> str:
    return node_id.replace("%", "%25").replace(" ", "%20")


def _decode_id(token: str) -> str:
    return token.replace("%20", " ").replace("%25", "%")


def snapshot_lines(g: HeteroGraph) -> list[str]:
    lines = [f"N {_encode_id(i)} {g.node_kind(i).value}" for i in g.node_ids()]
    for edge in g.edges():
        lines.append(f"E {_encode_id(edge.source)} {edge.relation.value} "
                     f"{_encode_id(edge.target)} {edge.weight:.17g}")
    return sorted(lines)


def write_snapshot(g: HeteroGraph, path: str | Path) -> None:
    Path(path).write_text("\n".join(snapshot_lines(g)) + "\n", encoding="utf-8", newline="")


def read_snapshot(path: str | Path) -> HeteroGraph:
    g = HeteroGraph()
    kind_by_value = {k.value: k for k in NodeKind}
    rel_by_value = {r.value: r for r in Relation}
    edges: list[tuple[str, Relation, str, float]] = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split(" ")
        if parts[0] == "N" and len(parts) == 3 and parts[2] in kind_by_value:
            g.add_node(_decode_id(parts[1]), kind_by_value[parts[2]])
        elif parts[0] == "E" and len(parts) == 5 and parts[2] in rel_by_value:
            edges.append((_decode_id(parts[1]), rel_by_value[parts[2]],
                          _decode_id(parts[3]), float(parts[4])))
        else:
            raise GraphError(f"{path}: line {lineno}: unparseable snapshot line {line!r}")
    for source, relation, target, weight in edges:
        g.add_edge(source, relation, target, weight)
    g.validate()
    return g


# ---------------------------------------------------------------------------
# array view used by the kernels
# ---------------------------------------------------------------------------

class GraphIndex:
    """Stable array numbering of a graph (sorted ids) plus per-relation COO."""

    def __init__(self, g: HeteroGraph) -> None:
        self.graph = g
        self.ids: list[str] = g.node_ids()
        self.pos: dict[str, int] = {node_id: i for i, node_id in enumerate(self.ids)}
        self.n = len(self.ids)
        self.rel_edges: dict[Relation, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}
        for rel in Relation:
            src, dst, wgt = [], [], []
            for source in sorted(g._out[rel]):
                for target, weight in sorted(g._out[rel][source].items()):
                    src.append(self.pos[source])
                    dst.append(self.pos[target])
                    wgt.append(weight)
            self.rel_edges[rel] = (np.asarray(src, dtype=np.int64),
                                   np.asarray(dst, dtype=np.int64),
                                   np.asarray(wgt, dtype=np.float64))

    def combined_transition(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Row-stochastic walk matrix averaging each node's relations uniformly.

        Returns COO arrays (src, dst, weight) plus a dangling mask for nodes
        with no outgoing edges in any relation.
        """
        rel_count = np.zeros(self.n, dtype=np.int64)
        for rel in Relation:
            src, _dst, _w = self.rel_edges[rel]
            if src.size:
                present = np.zeros(self.n, dtype=bool)
                present[src] = True
                rel_count += present
        combined: dict[tuple[int, int], float] = {}
        for rel in Relation:
            src, dst, wgt = self.rel_edges[rel]
            for e in range(src.size):
                key = (int(src[e]), int(dst[e]))
                combined[key] = combined.get(key, 0.0) + wgt[e] / rel_count[src[e]]
        items = sorted(combined.items())
        src = np.asarray([k[0] for k, _ in items], dtype=np.int64)
        dst = np.asarray([k[1] for k, _ in items], dtype=np.int64)
        wgt = np.asarray([v for _, v in items], dtype=np.float64)
        return src, dst, wgt, rel_count == 0
