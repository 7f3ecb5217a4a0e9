"""Command-line pipeline: ingest -> build -> communities -> link -> recommend.

Stages hand data to each other only through files in the output directory,
so each one can be rerun in isolation:

* ingest       corpus CSVs -> validated canonical corpus (+ matched skills)
* build        corpus -> education.graph, career.graph, merged.graph
* communities  domain graphs -> partition CSVs + merged_labels.csv
* link         merged graph + labels -> linked.graph
* recommend    linked graph + labels -> ranked CSV on stdout
* evaluate     judgments + run file -> metric table + metrics.json
* synth        seeded synthetic corpus + ground truth

Exit codes: 0 success, 1 user error, 2 internal error.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import community as community_mod
from . import graph as graph_mod
from . import ingest as ingest_mod
from . import linker as linker_mod
from . import metrics as metrics_mod
from . import ranker as ranker_mod
from . import synth as synth_mod
from .config import PipelineConfig, load_config
from .errors import ConfigError, SkillGraphError

F_COURSES = "courses.csv"
F_COURSE_SKILLS = "course_skills.csv"
F_JOBS = "jobs.csv"
F_SKILLS = "skills.csv"
F_ENROLLMENTS = "enrollments.csv"
F_EDU_GRAPH = "education.graph"
F_CAR_GRAPH = "career.graph"
F_MERGED_GRAPH = "merged.graph"
F_LINKED_GRAPH = "linked.graph"
F_EDU_PART = "education.partition.csv"
F_EDU_PART_SUMMARY = "education.partition.summary"
F_CAR_PART = "career.partition.csv"
F_CAR_PART_SUMMARY = "career.partition.summary"
F_LABELS = "merged_labels.csv"
F_LINK_DUMP = "links_dump.csv"
F_METRICS = "metrics.json"


class _UsageError(SkillGraphError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise _UsageError(f"{self.prog}: {message}")


def _load_canonical_corpus(out: Path):
    courses = ingest_mod.load_courses(out / F_COURSES)
    pairs = ingest_mod.load_course_skills(out / F_COURSE_SKILLS)
    skills = ingest_mod.load_skills(out / F_SKILLS)
    courses = ingest_mod.apply_skill_matching(courses, skills, pre_matched=pairs)
    jobs = ingest_mod.load_jobs(out / F_JOBS)
    enrollments = ingest_mod.load_enrollments(out / F_ENROLLMENTS)
    return courses, jobs, skills, enrollments


def cmd_ingest(cfg: PipelineConfig) -> str:
    cfg.require_paths("courses", "jobs", "skills", "enrollments")
    courses = ingest_mod.load_courses(cfg.courses)
    skills = ingest_mod.load_skills(cfg.skills)
    pre = ingest_mod.load_course_skills(cfg.course_skills) if cfg.course_skills else None
    courses = ingest_mod.apply_skill_matching(courses, skills, pre_matched=pre)
    jobs = ingest_mod.load_jobs(cfg.jobs)
    enrollments = ingest_mod.load_enrollments(cfg.enrollments)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ingest_mod.write_courses(out / F_COURSES, courses)
    ingest_mod.write_course_skills(out / F_COURSE_SKILLS, courses)
    ingest_mod.write_jobs(out / F_JOBS, jobs)
    ingest_mod.write_skills(out / F_SKILLS, skills)
    ingest_mod.write_enrollments(out / F_ENROLLMENTS, enrollments)
    matched = sum(1 for c in courses if c.skills)
    return (f"ingest: {len(courses)} courses ({matched} with skills), {len(jobs)} jobs, "
            f"{len(skills)} catalog skills, {len(enrollments)} enrollments -> {out}")


def cmd_build(cfg: PipelineConfig) -> str:
    out = Path(cfg.out_dir)
    courses, jobs, skills, enrollments = _load_canonical_corpus(out)
    education = graph_mod.build_education_graph(courses, enrollments, catalog=skills)
    career = graph_mod.build_career_graph(jobs, aggregate_by_title=cfg.aggregate_jobs_by_title)
    merged = graph_mod.merge_graphs(education, career)
    graph_mod.write_snapshot(education, out / F_EDU_GRAPH)
    graph_mod.write_snapshot(career, out / F_CAR_GRAPH)
    graph_mod.write_snapshot(merged, out / F_MERGED_GRAPH)
    s = merged.stats()
    return (f"build: merged graph has {s.total_nodes} nodes "
            f"({s.node_counts[graph_mod.NodeKind.COURSE]} courses, "
            f"{s.node_counts[graph_mod.NodeKind.JOB]} jobs, "
            f"{s.node_counts[graph_mod.NodeKind.SKILL]} skills) and {s.total_edges} edges")


def _attach_skill_names(g, catalog) -> None:
    names = {s.id: s.name for s in catalog}
    for sid in g.node_ids(graph_mod.NodeKind.SKILL):
        if sid in names:
            g.set_node_name(sid, names[sid])


def cmd_communities(cfg: PipelineConfig) -> str:
    out = Path(cfg.out_dir)
    education = graph_mod.read_snapshot(out / F_EDU_GRAPH)
    career = graph_mod.read_snapshot(out / F_CAR_GRAPH)
    _attach_skill_names(education, ingest_mod.load_skills(out / F_SKILLS))
    edu_part = community_mod.detect_communities(education, seed=cfg.seed, teleport=cfg.teleport)
    car_part = community_mod.detect_communities(career, seed=cfg.seed, teleport=cfg.teleport)
    labels = community_mod.merge_partitions(edu_part, education, car_part, career)
    community_mod.write_partition(out / F_EDU_PART, out / F_EDU_PART_SUMMARY, edu_part, cfg.seed)
    community_mod.write_partition(out / F_CAR_PART, out / F_CAR_PART_SUMMARY, car_part, cfg.seed)
    community_mod.write_labels(out / F_LABELS, labels)
    return (f"communities: education L={edu_part.description_length:.6f} bits "
            f"k={edu_part.num_communities}; career L={car_part.description_length:.6f} bits "
            f"k={car_part.num_communities}; merged labels -> {out / F_LABELS}")


def cmd_link(cfg: PipelineConfig, dump_links: bool = False) -> str:
    out = Path(cfg.out_dir)
    merged = graph_mod.read_snapshot(out / F_MERGED_GRAPH)
    labels = community_mod.read_labels(out / F_LABELS)
    params = linker_mod.Bm25Params(k1=cfg.bm25_k1, b=cfg.bm25_b)
    linked, records = linker_mod.link_skills(merged, labels, params, top_k=cfg.link_top_k)
    graph_mod.write_snapshot(linked, out / F_LINKED_GRAPH)
    if dump_links:
        linker_mod.write_link_dump(out / F_LINK_DUMP, records)
    return f"link: added {len(records)} skill links -> {out / F_LINKED_GRAPH}"


def _attach_job_titles(g, jobs) -> None:
    titles = {j.id: j.title for j in jobs}
    for jid in g.node_ids(graph_mod.NodeKind.JOB):
        if jid in titles:
            g.set_node_name(jid, titles[jid])


def cmd_recommend(cfg: PipelineConfig, args: argparse.Namespace) -> str:
    taken = tuple(t for t in (args.taken or "").split(",") if t)
    inp = ranker_mod.ScenarioInput(scenario=args.scenario, career_goal=args.goal,
                                   taken_courses=taken, current_job=args.current_job)
    out = Path(cfg.out_dir)
    g = graph_mod.read_snapshot(out / F_LINKED_GRAPH)
    labels = community_mod.read_labels(out / F_LABELS)
    _attach_job_titles(g, ingest_mod.load_jobs(out / F_JOBS))
    if args.debug:
        ranked, prov = ranker_mod.recommend(g, labels, inp, cutoff=args.top,
                                            prereq_depth=cfg.prereq_depth, debug=True)
        for community in sorted(prov.base):
            base = prov.base[community]
            print(f"# community {community}: {len(prov.seeds[community])} seeds, "
                  f"{len(base)} base candidates", file=sys.stderr)
        if prov.prereq:
            print(f"# prerequisite route: {len(prov.prereq)} candidates", file=sys.stderr)
    else:
        ranked = ranker_mod.recommend(g, labels, inp, cutoff=args.top,
                                      prereq_depth=cfg.prereq_depth)
    return ranker_mod.format_ranked_list(ranked).rstrip("\n")


def cmd_evaluate(cfg: PipelineConfig, args: argparse.Namespace) -> str:
    judgments = metrics_mod.load_judgments(args.judgments)
    rankings = metrics_mod.load_runs(args.runs)
    runs = metrics_mod.judged_runs(rankings, judgments, missing=args.missing)
    report = metrics_mod.metric_report(runs)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / F_METRICS).write_text(report.to_json(), encoding="utf-8", newline="")
    return (report.render_table() +
            f"\nevaluate: {len(runs)} queries -> {out / F_METRICS}")


def cmd_synth(args: argparse.Namespace) -> str:
    corpus = synth_mod.generate_synthetic_corpus(
        seed=args.seed, n_jobs=args.jobs, n_courses=args.courses,
        n_skills=args.skills, alignment=args.alignment, out_dir=args.out,
        n_topics=args.topics)
    return (f"synth: seed={args.seed} wrote {len(corpus.courses)} courses, "
            f"{len(corpus.jobs)} jobs, {len(corpus.skills)} skills, "
            f"{len(corpus.enrollments)} enrollments -> {corpus.out_dir}")


def build_parser() -> _Parser:
    parser = _Parser(prog="skillgraph",
                     description="Course/job graph integration and recommendation pipeline")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: _Parser) -> None:
        p.add_argument("--config", help="key=value config file (default: $SKILLGRAPH_CONFIG)")
        p.add_argument("--out", help="output directory (config key out_dir)")

    p = sub.add_parser("ingest", help="validate corpora and match course skills")
    add_common(p)
    p.add_argument("--courses", help="course CSV/JSON path")
    p.add_argument("--jobs", help="job CSV/JSON path")
    p.add_argument("--skills", help="skill catalog CSV/JSON path")
    p.add_argument("--enrollments", help="enrollment CSV/JSON path")
    p.add_argument("--course-skills", dest="course_skills",
                   help="optional pre-matched course_id,skill_id file")

    p = sub.add_parser("build", help="build education, career, and merged graphs")
    add_common(p)
    p.add_argument("--aggregate-jobs-by-title", action="store_true", default=None,
                   help="collapse postings sharing a normalized title into one node")

    p = sub.add_parser("communities", help="detect and merge skill communities")
    add_common(p)
    p.add_argument("--seed", type=int, help="detection shuffle seed")
    p.add_argument("--teleport", type=float, help="walk teleport probability")

    p = sub.add_parser("link", help="add BM25 skill links inside communities")
    add_common(p)
    p.add_argument("--k1", type=float, help="BM25 k1")
    p.add_argument("--b", type=float, help="BM25 b")
    p.add_argument("--top-k", dest="top_k", type=int, help="links kept per skill")
    p.add_argument("--dump-links", action="store_true", help="also write links_dump.csv")

    p = sub.add_parser("recommend", help="rank courses for a scenario query")
    add_common(p)
    p.add_argument("--scenario", type=int, choices=(1, 2, 3), required=True,
                   help="1 goal, 2 goal+taken courses, 3 upskilling")
    p.add_argument("--goal", help="career-goal job query text (scenarios 1 and 2)")
    p.add_argument("--taken", help="comma-separated taken course ids (scenario 2)")
    p.add_argument("--current-job", dest="current_job", help="current job text (scenario 3)")
    p.add_argument("--top", type=int, default=10, help="list length cutoff")
    p.add_argument("--debug", action="store_true",
                   help="print per-route provenance counts to stderr")

    p = sub.add_parser("evaluate", help="score judged runs and write metrics.json")
    add_common(p)
    p.add_argument("--judgments", required=True, help="query_id,node_id,relevant CSV")
    p.add_argument("--runs", required=True, help="query_id,rank,node_id,score CSV")
    p.add_argument("--missing", choices=("error", "irrelevant"), default="error",
                   help="policy for ranked ids without judgments")

    p = sub.add_parser("synth", help="generate a seeded synthetic corpus")
    p.add_argument("--seed", type=int, default=0, help="generator seed")
    p.add_argument("--jobs", type=int, default=100, help="number of jobs")
    p.add_argument("--courses", type=int, default=30, help="number of courses")
    p.add_argument("--skills", type=int, default=60, help="skills per vocabulary")
    p.add_argument("--alignment", type=float, default=0.2,
                   help="fraction of skill names shared across corpora")
    p.add_argument("--topics", type=int, default=None, help="planted topic count")
    p.add_argument("--out", required=True, help="corpus output directory")
    return parser


def _config_from(args: argparse.Namespace) -> PipelineConfig:
    overrides: dict[str, object] = {}
    mapping = {
        "out": "out_dir", "courses": "courses", "jobs": "jobs", "skills": "skills",
        "enrollments": "enrollments", "course_skills": "course_skills",
        "seed": "seed", "teleport": "teleport", "k1": "bm25_k1", "b": "bm25_b",
        "top_k": "link_top_k", "aggregate_jobs_by_title": "aggregate_jobs_by_title",
    }
    for flag, key in mapping.items():
        if hasattr(args, flag) and getattr(args, flag) is not None:
            overrides[key] = getattr(args, flag)
    return load_config(getattr(args, "config", None), overrides)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        if args.command == "synth":
            print(cmd_synth(args))
        elif args.command == "ingest":
            print(cmd_ingest(_config_from(args)))
        elif args.command == "build":
            print(cmd_build(_config_from(args)))
        elif args.command == "communities":
            print(cmd_communities(_config_from(args)))
        elif args.command == "link":
            print(cmd_link(_config_from(args), dump_links=args.dump_links))
        elif args.command == "recommend":
            print(cmd_recommend(_config_from(args), args))
        elif args.command == "evaluate":
            print(cmd_evaluate(_config_from(args), args))
        else:  # pragma: no cover - argparse enforces choices
            raise ConfigError(f"unknown command {args.command!r}")
    except (SkillGraphError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
