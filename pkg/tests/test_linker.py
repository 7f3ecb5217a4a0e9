from __future__ import annotations

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from skillgraph.errors import GraphError
from skillgraph.graph import HeteroGraph, NodeKind, Relation
from skillgraph.linker import (Bm25Params, CorpusStats, SkillDocument, bm25, link_skills,
                               write_link_dump)


def doc(skill, text):
    return SkillDocument(skill, tuple(text.split()))


class TestBm25:
    def test_two_identical_one_token_docs(self):
        # N=2, df=2, avgdl=1: idf=ln(1.2), tf term = 2.2/2.2 = 1
        docs = [doc("s1", "sql"), doc("s2", "sql")]
        stats = CorpusStats.from_documents(docs)
        score = bm25(("sql",), docs[0], stats)
        assert score == pytest.approx(math.log(1.2), abs=1e-12)
        assert score == pytest.approx(0.1823215567939546, abs=1e-9)

    def test_disjoint_query_scores_zero(self):
        docs = [doc("s1", "sql server")]
        stats = CorpusStats.from_documents(docs)
        assert bm25(("python",), docs[0], stats) == 0.0

    def test_self_corpus_positive(self):
        d = doc("s1", "machine learning")
        stats = CorpusStats.from_documents([d])
        score = bm25(d.tokens, d, stats)
        assert score > 0.0
        # idf = ln(1 + 0.5/1.5) per token; doc length equals avgdl so the
        # tf factor is (1*2.2)/(1+1.2) = 1
        assert score == pytest.approx(2 * math.log(4 / 3), abs=1e-12)

    def test_never_negative_even_for_common_terms(self):
        docs = [doc(f"s{i}", "sql") for i in range(50)]
        stats = CorpusStats.from_documents(docs)
        assert bm25(("sql",), docs[0], stats) > 0.0

    def test_parameter_validation(self):
        with pytest.raises(GraphError):
            Bm25Params(k1=-1.0)
        with pytest.raises(GraphError):
            Bm25Params(b=1.5)
        with pytest.raises(GraphError):
            SkillDocument("s", ())

    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.sampled_from(["sql", "python", "data", "etl"]), min_size=1, max_size=5),
           st.sampled_from(["spark", "hadoop", "graphs"]))
    def test_extra_query_token_never_decreases_score(self, query, extra):
        docs = [doc("s1", "sql data pipelines"), doc("s2", "python etl data")]
        stats = CorpusStats.from_documents(docs)
        for d in docs:
            base = bm25(tuple(query), d, stats)
            assert bm25(tuple(query) + (extra,), d, stats) >= base - 1e-15


def skill_graph(names, labels):
    g = HeteroGraph()
    for n in names:
        g.add_node(n, NodeKind.SKILL)
    return g, {n: labels[i] for i, n in enumerate(names)}


class TestLinkSkills:
    def test_pair_community_gets_unit_weights(self):
        g, labels = skill_graph(["data mining", "data analysis"], [0, 0])
        linked, records = link_skills(g, labels)
        assert linked.out_edges("data mining", Relation.LINKED) == [("data analysis", 1.0)]
        assert linked.out_edges("data analysis", Relation.LINKED) == [("data mining", 1.0)]
        assert len(records) == 2

    def test_identical_names_across_communities_never_link(self):
        g = HeteroGraph()
        g.add_node("s1", NodeKind.SKILL, name="sql basics")
        g.add_node("s2", NodeKind.SKILL, name="sql basics")
        linked, records = link_skills(g, {"s1": 0, "s2": 1})
        assert records == []
        assert linked.out_edges("s1", Relation.LINKED) == []

    def test_weights_proportional_to_raw_scores(self):
        g, labels = skill_graph(["data mining", "data warehousing", "stream mining"], [0, 0, 0])
        linked, records = link_skills(g, labels)
        for source in labels:
            edges = linked.out_edges(source, Relation.LINKED)
            raws = {r.target: r.raw_score for r in records if r.source == source}
            total = sum(raws.values())
            for target, weight in edges:
                assert weight == pytest.approx(raws[target] / total, abs=1e-12)
            assert sum(w for _t, w in edges) == pytest.approx(1.0, abs=1e-9)

    def test_top_k_limits_out_degree(self):
        names = [f"data skill{i}" for i in range(8)]
        g, labels = skill_graph(names, [0] * 8)
        linked, _records = link_skills(g, labels, top_k=3)
        for n in names:
            assert len(linked.out_edges(n, Relation.LINKED)) <= 3

    def test_no_self_links(self):
        g, labels = skill_graph(["sql", "sql server"], [0, 0])
        linked, _ = link_skills(g, labels)
        for n in labels:
            assert all(t != n for t, _w in linked.out_edges(n, Relation.LINKED))

    def test_missing_label_rejected(self):
        g, _ = skill_graph(["sql"], [0])
        with pytest.raises(GraphError, match="no community label"):
            link_skills(g, {})

    def test_underscore_key_names_tokenize(self):
        # snapshot-loaded merged graphs name skills by identity key
        g = HeteroGraph()
        g.add_node("data_mining", NodeKind.SKILL)
        g.add_node("data_update", NodeKind.SKILL)
        linked, records = link_skills(g, {"data_mining": 0, "data_update": 0})
        assert len(records) == 2
        assert linked.out_edges("data_mining", Relation.LINKED) == [("data_update", 1.0)]

    def test_all_links_within_community(self):
        names = [f"skill number{i}" for i in range(9)]
        g, labels = skill_graph(names, [i % 3 for i in range(9)])
        linked, records = link_skills(g, labels)
        for rec in records:
            assert labels[rec.source] == labels[rec.target]

    def test_dump_format(self, tmp_path):
        g, labels = skill_graph(["data mining", "data analysis"], [0, 0])
        _linked, records = link_skills(g, labels)
        p = tmp_path / "links.csv"
        write_link_dump(p, records)
        lines = p.read_text().splitlines()
        assert lines[0] == "source,target,raw_bm25,weight"
        assert len(lines) == 3
