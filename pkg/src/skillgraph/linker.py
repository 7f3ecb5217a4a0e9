"""Intra-community skill-to-skill links weighted by BM25 name similarity.

Each skill's document is its own name tokens; the query is the other skill's
tokens. Corpus statistics (N, document frequencies, average length) are
computed per community, so identical names in different communities never
link. Kept links are the per-source top-k positive scores, renormalized to
sum to 1.
"""
from __future__ import annotations

import csv
import io
import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

from .errors import GraphError
from .graph import HeteroGraph, NodeKind, Relation

DEFAULT_TOP_K = 10


@dataclass(frozen=True)
class SkillDocument:
    skill: str
    tokens: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.tokens:
            raise GraphError(f"skill {self.skill!r} has no tokens")

    @property
    def length(self) -> int:
        return len(self.tokens)


@dataclass(frozen=True)
class Bm25Params:
    k1: float = 1.2
    b: float = 0.75

    def __post_init__(self) -> None:
        if self.k1 < 0.0:
            raise GraphError(f"k1 must be >= 0, got {self.k1!r}")
        if not 0.0 <= self.b <= 1.0:
            raise GraphError(f"b must be in [0, 1], got {self.b!r}")


@dataclass(frozen=True)
class CorpusStats:
    n_docs: int
    df: Mapping[str, int]
    avgdl: float

    @classmethod
    def from_documents(cls, docs: Sequence[SkillDocument]) -> "CorpusStats":
        df: Counter[str] = Counter()
        for doc in docs:
            df.update(set(doc.tokens))
        avgdl = sum(d.length for d in docs) / len(docs)
        return cls(n_docs=len(docs), df=dict(df), avgdl=avgdl)


def bm25(query: Sequence[str], doc: SkillDocument, stats: CorpusStats,
         params: Bm25Params = Bm25Params()) -> float:
    """Okapi score with the +1-inside-log idf, so results are never negative."""
    tf = Counter(doc.tokens)
    norm = params.k1 * (1.0 - params.b + params.b * doc.length / stats.avgdl)
    score = 0.0
    for token in query:
        f = tf.get(token, 0)
        if f == 0:
            continue
        df = stats.df.get(token, 0)
        idf = math.log(1.0 + (stats.n_docs - df + 0.5) / (df + 0.5))
        score += idf * (f * (params.k1 + 1.0)) / (f + norm)
    return score


@dataclass(frozen=True)
class LinkRecord:
    source: str
    target: str
    raw_score: float
    weight: float


def _skill_tokens(g: HeteroGraph, skill_id: str) -> tuple[str, ...]:
    # tokenize splits on '_', so identity-key names from snapshots work too
    from .ingest import tokenize

    return tuple(tokenize(g.node_name(skill_id)))


def link_skills(g: HeteroGraph, communities: Mapping[str, int],
                params: Bm25Params = Bm25Params(), top_k: int = DEFAULT_TOP_K,
                ) -> tuple[HeteroGraph, list[LinkRecord]]:
    """Return a copy of ``g`` with linked edges added, plus the kept links.

    Self-links are forbidden and cross-community pairs are never scored.
    """
    if top_k < 1:
        raise GraphError(f"top_k must be >= 1, got {top_k!r}")
    skills = g.node_ids(NodeKind.SKILL)
    missing = [s for s in skills if s not in communities]
    if missing:
        raise GraphError(f"skill {missing[0]!r} has no community label")
    by_community: dict[int, list[str]] = {}
    for sid in skills:
        by_community.setdefault(communities[sid], []).append(sid)
    linked = g.copy()
    records: list[LinkRecord] = []
    for community in sorted(by_community):
        members = by_community[community]
        if len(members) < 2:
            continue
        docs = {sid: SkillDocument(sid, _skill_tokens(g, sid)) for sid in members}
        stats = CorpusStats.from_documents([docs[sid] for sid in members])
        for source in members:
            query = docs[source].tokens
            scored = []
            for target in members:
                if target == source:
                    continue
                raw = bm25(query, docs[target], stats, params)
                if raw > 0.0:
                    scored.append((-raw, target))
            scored.sort()
            kept = scored[:top_k]
            total = sum(-neg for neg, _ in kept)
            for neg, target in kept:
                raw = -neg
                weight = raw / total
                linked.add_edge(source, Relation.LINKED, target, weight)
                records.append(LinkRecord(source, target, raw, weight))
    linked.validate()
    return linked, records


def write_link_dump(path: str | Path, records: Sequence[LinkRecord]) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["source", "target", "raw_bm25", "weight"])
    for rec in records:
        writer.writerow([rec.source, rec.target, f"{rec.raw_score:.12g}", f"{rec.weight:.12g}"])
    Path(path).write_text(buf.getvalue(), encoding="utf-8", newline="")
