"""Ranked-retrieval metrics, judgment files, and the vector-space baseline.

Conventions, pinned so every number is unambiguous:

* AP sums precision at each relevant rank; the denominator is the total
  number of relevant items in the judgments, or ``min(total, k)`` for the
  @k variants.
* Uncut Precision is relevant-retrieved over retrieved, across the whole
  returned list; Precision@k divides by k.
* A ranked id without a judgment is an error unless the caller opts into
  treating missing judgments as not relevant.
"""
from __future__ import annotations

import csv
import io
import json
import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

from .errors import EvalError
from .ingest import Course, Job, Skill, tokenize
from .ranker import RankedList, to_ranked_list


@dataclass(frozen=True)
class JudgedRun:
    query: str
    ranking: tuple[str, ...]
    judgments: Mapping[str, bool]

    def relevance(self, node_id: str) -> bool:
        try:
            return self.judgments[node_id]
        except KeyError:
            raise EvalError(f"query {self.query!r}: ranked id {node_id!r} has no judgment") from None


@dataclass(frozen=True)
class MetricReport:
    per_query_ap: dict[str, float]
    per_query_precision: dict[str, float]
    precision: float
    map: float
    map_at_5: float
    precision_at_10: float
    map_at_10: float

    def to_json(self) -> str:
        payload = {
            "precision": self.precision,
            "map": self.map,
            "map_at_5": self.map_at_5,
            "precision_at_10": self.precision_at_10,
            "map_at_10": self.map_at_10,
        }
        return json.dumps(payload, sort_keys=True, indent=2) + "\n"

    def render_table(self) -> str:
        header = f"{'Precision':>10} {'MAP':>8} {'MAP@5':>8} {'P@10':>8} {'MAP@10':>8}"
        row = (f"{self.precision:>10.4f} {self.map:>8.4f} {self.map_at_5:>8.4f} "
               f"{self.precision_at_10:>8.4f} {self.map_at_10:>8.4f}")
        note = "Precision is uncut (relevant retrieved / retrieved over the full list)."
        return "\n".join([header, row, note])


def average_precision(run: JudgedRun, cutoff: int | None = None) -> float:
    total_relevant = sum(1 for rel in run.judgments.values() if rel)
    denom = min(total_relevant, cutoff) if cutoff is not None else total_relevant
    if denom == 0:
        return 0.0
    limit = len(run.ranking) if cutoff is None else min(cutoff, len(run.ranking))
    hits = 0
    acc = 0.0
    for rank in range(1, limit + 1):
        if run.relevance(run.ranking[rank - 1]):
            hits += 1
            acc += hits / rank
    return acc / denom


def precision(run: JudgedRun) -> float:
    if not run.ranking:
        return 0.0
    hits = sum(1 for node_id in run.ranking if run.relevance(node_id))
    return hits / len(run.ranking)


def precision_at(run: JudgedRun, k: int) -> float:
    hits = sum(1 for node_id in run.ranking[:k] if run.relevance(node_id))
    return hits / k


def metric_report(runs: Sequence[JudgedRun]) -> MetricReport:
    if not runs:
        raise EvalError("no judged runs to report on")
    ap = {r.query: average_precision(r) for r in runs}
    prec = {r.query: precision(r) for r in runs}
    mean = lambda values: sum(values) / len(values)  # noqa: E731
    return MetricReport(
        per_query_ap=ap,
        per_query_precision=prec,
        precision=mean(list(prec.values())),
        map=mean(list(ap.values())),
        map_at_5=mean([average_precision(r, 5) for r in runs]),
        precision_at_10=mean([precision_at(r, 10) for r in runs]),
        map_at_10=mean([average_precision(r, 10) for r in runs]),
    )


# ---------------------------------------------------------------------------
# judgment / run files
# ---------------------------------------------------------------------------

def load_judgments(path: str | Path) -> dict[str, dict[str, bool]]:
    """CSV ``query_id,node_id,relevant`` with relevant in {0,1}."""
    text = Path(path).read_text(encoding="utf-8")
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header != ["query_id", "node_id", "relevant"]:
        raise EvalError(f"{path}: bad header {header!r}")
    out: dict[str, dict[str, bool]] = {}
    for i, row in enumerate(reader, start=1):
        if len(row) != 3 or row[2] not in ("0", "1"):
            raise EvalError(f"{path}: row {i}: expected query_id,node_id,relevant(0|1)")
        out.setdefault(row[0], {})[row[1]] = row[2] == "1"
    return out


def write_judgments(path: str | Path, judgments: Mapping[str, Mapping[str, bool]]) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["query_id", "node_id", "relevant"])
    for query in sorted(judgments):
        for node_id in sorted(judgments[query]):
            writer.writerow([query, node_id, int(judgments[query][node_id])])
    Path(path).write_text(buf.getvalue(), encoding="utf-8", newline="")


def load_runs(path: str | Path) -> dict[str, list[str]]:
    """Combined run file: CSV ``query_id,rank,node_id,score``, ranks 1-based."""
    text = Path(path).read_text(encoding="utf-8")
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header != ["query_id", "rank", "node_id", "score"]:
        raise EvalError(f"{path}: bad header {header!r}")
    staged: dict[str, list[tuple[int, str]]] = {}
    for i, row in enumerate(reader, start=1):
        if len(row) != 4:
            raise EvalError(f"{path}: row {i}: expected 4 fields")
        try:
            rank = int(row[1])
        except ValueError:
            raise EvalError(f"{path}: row {i}: bad rank {row[1]!r}") from None
        staged.setdefault(row[0], []).append((rank, row[2]))
    out: dict[str, list[str]] = {}
    for query, pairs in staged.items():
        pairs.sort()
        if [rank for rank, _ in pairs] != list(range(1, len(pairs) + 1)):
            raise EvalError(f"run for query {query!r} has gaps or duplicate ranks")
        out[query] = [node_id for _rank, node_id in pairs]
    return out


def write_runs(path: str | Path, runs: Mapping[str, Sequence[tuple[str, float]]]) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["query_id", "rank", "node_id", "score"])
    for query in sorted(runs):
        for rank, (node_id, score) in enumerate(runs[query], start=1):
            writer.writerow([query, rank, node_id, f"{score:.12g}"])
    Path(path).write_text(buf.getvalue(), encoding="utf-8", newline="")


def judged_runs(rankings: Mapping[str, Sequence[str]],
                judgments: Mapping[str, Mapping[str, bool]],
                missing: str = "error") -> list[JudgedRun]:
    """Pair rankings with judgments; ``missing`` is 'error' or 'irrelevant'."""
    if missing not in ("error", "irrelevant"):
        raise EvalError(f"missing policy {missing!r} not in ('error', 'irrelevant')")
    runs = []
    for query in sorted(rankings):
        if query not in judgments:
            raise EvalError(f"no judgments for query {query!r}")
        judged = dict(judgments[query])
        if missing == "irrelevant":
            for node_id in rankings[query]:
                judged.setdefault(node_id, False)
        runs.append(JudgedRun(query=query, ranking=tuple(rankings[query]), judgments=judged))
    return runs


# ---------------------------------------------------------------------------
# vector-space baseline
# ---------------------------------------------------------------------------

def _resolve_jobs_by_title(jobs: Sequence[Job], text: str) -> list[Job]:
    # shares the ranker's containment rule so both systems see one query set
    from .ranker import title_contains

    query = tokenize(text)
    if not query:
        raise EvalError("empty job query")
    matched = [job for job in jobs if title_contains(job.title, query)]
    if not matched:
        raise EvalError(f"no job title matches {text!r}")
    return matched


def _tfidf_vector(tokens: Sequence[str], idf: Mapping[str, float]) -> dict[str, float]:
    vec = {}
    for token, count in Counter(tokens).items():
        if token in idf:
            vec[token] = (1.0 + math.log(count)) * idf[token]
    return vec


def _cosine(a: Mapping[str, float], b: Mapping[str, float]) -> float:
    if not a or not b:
        return 0.0
    dot = sum(v * b[t] for t, v in a.items() if t in b)
    na = math.sqrt(sum(v * v for v in a.values()))
    nb = math.sqrt(sum(v * v for v in b.values()))
    return dot / (na * nb) if dot else 0.0


def course_text_tokens(course: Course, skill_names: Mapping[str, str]) -> list[str]:
    tokens = tokenize(course.name) + tokenize(course.description)
    for sid in sorted(course.skills):
        tokens += tokenize(skill_names.get(sid, sid))
    return tokens


def baseline_vector_space(jobs: Sequence[Job], courses: Sequence[Course], query: str,
                          cutoff: int | None = None,
                          catalog: Sequence[Skill] | None = None) -> RankedList:
    """TF-IDF cosine between matched-job text and each course's text.

    Log-scaled term frequency, idf = ln(N/df) over the course corpus; courses
    sharing no token with the query score 0 and are excluded.
    """
    if not jobs or not courses:
        raise EvalError("baseline needs non-empty corpora")
    skill_names = {s.id: s.name for s in catalog} if catalog else {}
    docs = {c.id: course_text_tokens(c, skill_names) for c in courses}
    df: Counter[str] = Counter()
    for tokens in docs.values():
        df.update(set(tokens))
    n = len(courses)
    idf = {t: math.log(n / d) for t, d in df.items()}
    matched = _resolve_jobs_by_title(jobs, query)
    query_tokens: list[str] = []
    for job in matched:
        query_tokens += tokenize(job.title)
        for sid in sorted(job.skills):
            query_tokens += tokenize(sid)
    qvec = _tfidf_vector(query_tokens, idf)
    scores = {cid: _cosine(qvec, _tfidf_vector(tokens, idf)) for cid, tokens in docs.items()}
    return to_ranked_list(scores, query, "baseline-vector-space", cutoff)
