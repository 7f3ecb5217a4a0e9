"""Seeded synthetic corpus with planted topic structure.

Each topic owns a disjoint pool of pseudo-words. Skill names are two-word
phrases from their topic's pool; the course-side and job-side vocabularies
share exactly an ``alignment`` fraction of names. Courses embed their
skills' phrases in the description (so greedy matching recovers them), job
titles carry a ``topic-<t>`` tag plus a role word, and enrollment sequences
run down each topic's course chain so prerequisite edges appear. Ground
truth marks every course of a job's topic as relevant to that job.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import EvalError
from .ingest import (Course, EnrollmentRecord, Job, Skill, write_courses,
                     write_enrollments, write_jobs, write_skills)
from .metrics import write_judgments

_SYLLABLES = [c + v for c in "bdklmnprstvz" for v in "aeiou"]
_ROLES = ["engineer", "analyst", "developer", "specialist"]
_LEVELS = ["", "junior", "senior", "lead"]
_COMPANIES = ["acme", "globex", "initech", "umbrella", "hooli"]
_LOCATIONS = ["springfield", "shelbyville", "ogdenville", "capital city"]
_FILLER = ["covers", "practice", "introduces", "with", "methods", "applied",
           "topics", "in", "weekly", "labs", "projects", "and", "studio"]


def _new_word(rng: np.random.Generator, used: set[str]) -> str:
    while True:
        word = "".join(_SYLLABLES[int(rng.integers(len(_SYLLABLES)))] for _ in range(3))
        if word not in used:
            used.add(word)
            return word


def _new_phrase(rng: np.random.Generator, pool: list[str], used: set[str]) -> str:
    for _ in range(10_000):
        i = int(rng.integers(len(pool)))
        j = int(rng.integers(len(pool)))
        if i == j:
            continue
        phrase = f"{pool[i]} {pool[j]}"
        if phrase not in used:
            used.add(phrase)
            return phrase
    raise EvalError("topic word pool exhausted")  # pragma: no cover


def _spread(total: int, bins: int) -> list[int]:
    base, extra = divmod(total, bins)
    return [base + (1 if i < extra else 0) for i in range(bins)]


@dataclass
class SynthCorpus:
    out_dir: Path
    courses: list[Course]
    jobs: list[Job]
    skills: list[Skill]
    enrollments: list[EnrollmentRecord]
    course_topic: dict[str, int]
    job_topic: dict[str, int]
    shared_names: list[str]
    paths: dict[str, Path] = field(default_factory=dict)


def generate_synthetic_corpus(seed: int, n_jobs: int, n_courses: int, n_skills: int,
                              alignment: float, out_dir: str | Path,
                              n_topics: int | None = None) -> SynthCorpus:
    """Write courses/jobs/skills/enrollments plus ground truth; return records."""
    if min(n_jobs, n_courses, n_skills) < 1:
        raise EvalError("corpus sizes must be >= 1")
    if not 0.0 <= alignment <= 1.0:
        raise EvalError(f"alignment {alignment!r} outside [0, 1]")
    if n_topics is None:
        n_topics = max(2, min(10, n_skills // 10))
    n_topics = max(1, min(n_topics, n_jobs, n_courses, n_skills))
    rng = np.random.default_rng(seed)
    used_words: set[str] = set(_FILLER) | set(_ROLES) | {"topic", "course"}
    used_phrases: set[str] = set()

    # Each topic's word pool splits into shared, course-side, and job-side
    # words: the two corpora describe one topic in partly different terms.
    # Skill names shared across corpora (the alignment fraction) are built
    # from shared words only; the rest mix their side's words in.
    skills_per_topic = _spread(n_skills, n_topics)
    shared_per_topic = _spread(round(alignment * n_skills), n_topics)
    course_words: list[list[str]] = []   # per topic: shared + course-side
    job_words: list[list[str]] = []      # per topic: shared + job-side
    course_vocab: list[list[str]] = []   # per topic, course-side skill names
    job_vocab: list[list[str]] = []      # per topic, job-side skill names
    shared_names: list[str] = []
    for t in range(n_topics):
        need = skills_per_topic[t] * 2
        pool_size = max(8, int(np.ceil(np.sqrt(max(need * 2, 1)))) + 4)
        n_shared_words = max(3, round(pool_size * 0.4))
        n_side_words = max(2, (pool_size - n_shared_words + 1) // 2)
        shared_pool = [_new_word(rng, used_words) for _ in range(n_shared_words)]
        course_words.append(shared_pool + [_new_word(rng, used_words)
                                           for _ in range(n_side_words)])
        job_words.append(shared_pool + [_new_word(rng, used_words)
                                        for _ in range(n_side_words)])
        shared = [_new_phrase(rng, shared_pool, used_phrases)
                  for _ in range(min(shared_per_topic[t], skills_per_topic[t]))]
        course_only = [_new_phrase(rng, course_words[t], used_phrases)
                       for _ in range(skills_per_topic[t] - len(shared))]
        job_only = [_new_phrase(rng, job_words[t], used_phrases)
                    for _ in range(skills_per_topic[t] - len(shared))]
        course_vocab.append(shared + course_only)
        job_vocab.append(shared + job_only)
        shared_names.extend(shared)

    skills = [Skill.from_name(f"SK{idx:04d}", name)
              for idx, name in enumerate(n for t in range(n_topics) for n in course_vocab[t])]

    course_topics = _spread(n_courses, n_topics)
    courses: list[Course] = []
    course_topic: dict[str, int] = {}
    chains: list[list[str]] = [[] for _ in range(n_topics)]
    idx = 0
    for t in range(n_topics):
        vocab = course_vocab[t]
        picks: list[list[str]] = [[] for _ in range(course_topics[t])]
        for i, name in enumerate(vocab[:shared_per_topic[t]]):
            if picks:
                picks[i % len(picks)].append(name)
        for ci in range(course_topics[t]):
            extra = min(3 + int(rng.integers(3)), len(vocab))
            while len(picks[ci]) < extra:
                cand = vocab[int(rng.integers(len(vocab)))]
                if cand not in picks[ci]:
                    picks[ci].append(cand)
            cid = f"C{idx:03d}"
            words: list[str] = [_FILLER[int(rng.integers(len(_FILLER)))]]
            for phrase in picks[ci]:
                words += phrase.split() + [_FILLER[int(rng.integers(len(_FILLER)))]]
            # cross-topic lexical noise: lone words from other pools, each
            # padded with filler so they never form a matchable skill phrase
            if n_topics > 1 and rng.random() < 0.8:
                for _ in range(3 + int(rng.integers(4))):
                    other = (t + 1 + int(rng.integers(n_topics - 1))) % n_topics
                    pool = course_words[other]
                    words += [pool[int(rng.integers(len(pool)))],
                              _FILLER[int(rng.integers(len(_FILLER)))]]
            courses.append(Course(id=cid, name=f"Course {idx:03d}",
                                  description=" ".join(words)))
            course_topic[cid] = t
            chains[t].append(cid)
            idx += 1

    job_topics = _spread(n_jobs, n_topics)
    jobs: list[Job] = []
    job_topic: dict[str, int] = {}
    idx = 0
    for t in range(n_topics):
        vocab = job_vocab[t]
        picks = [[] for _ in range(job_topics[t])]
        for i, name in enumerate(vocab[:shared_per_topic[t]]):
            if picks:
                picks[i % len(picks)].append(name)
        for ji in range(job_topics[t]):
            want = 3 + int(rng.integers(4))
            while len(picks[ji]) < min(want, len(vocab)):
                cand = vocab[int(rng.integers(len(vocab)))]
                if cand not in picks[ji]:
                    picks[ji].append(cand)
            jid = f"J{idx:05d}"
            role = _ROLES[int(rng.integers(len(_ROLES)))]
            level = _LEVELS[int(rng.integers(len(_LEVELS)))]
            title = f"topic-{t} {role}" + (f" {level}" if level else "")
            jobs.append(Job(id=jid, title=title,
                            company=_COMPANIES[int(rng.integers(len(_COMPANIES)))],
                            location=_LOCATIONS[int(rng.integers(len(_LOCATIONS)))],
                            skills=frozenset(picks[ji])))
            job_topic[jid] = t
            idx += 1

    # students take a random subset of their topic's courses in curriculum
    # order; sampling across the whole chain keeps precedence pairs dense so
    # a topic's courses cohere instead of fragmenting into chain segments
    enrollments: list[EnrollmentRecord] = []
    n_students = max(12, n_courses * 3)
    for s in range(n_students):
        t = s % n_topics
        chain = chains[t]
        if not chain:
            continue
        k = min(2 + int(rng.integers(3)), len(chain))
        picks = sorted(int(i) for i in rng.choice(len(chain), size=k, replace=False))
        t0 = int(rng.integers(3))
        for j, ci in enumerate(picks):
            enrollments.append(EnrollmentRecord(student=f"S{s:04d}",
                                                course=chain[ci], term=t0 + j))

    truth = {job.id: {cid: True for cid in chains[job_topic[job.id]]} for job in jobs}

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    corpus = SynthCorpus(out_dir=out, courses=courses, jobs=jobs, skills=skills,
                         enrollments=enrollments, course_topic=course_topic,
                         job_topic=job_topic, shared_names=shared_names)
    corpus.paths = {
        "courses": out / "courses.csv",
        "jobs": out / "jobs.csv",
        "skills": out / "skills.csv",
        "enrollments": out / "enrollments.csv",
        "ground_truth": out / "ground_truth.csv",
    }
    write_courses(corpus.paths["courses"], courses)
    write_jobs(corpus.paths["jobs"], jobs)
    write_skills(corpus.paths["skills"], skills)
    write_enrollments(corpus.paths["enrollments"], enrollments)
    write_judgments(corpus.paths["ground_truth"], truth)
    return corpus
