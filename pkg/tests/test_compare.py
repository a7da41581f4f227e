from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from forumlens.compare import (
    Relatedness,
    classify,
    classify_overlap,
    compare_all,
    extract_jargon,
    histogram_rows,
    keyword_cosine,
)
from forumlens.ingest import Language
from forumlens.topics import TopicCluster


def cluster(cluster_id, words, language=Language.ENGLISH, kept=True):
    weights = [(len(words) - i) / 100.0 for i in range(len(words))]
    return TopicCluster(
        cluster_id=cluster_id,
        language=language,
        member_paragraphs=[f"x:{cluster_id}:0"],
        label_words=[words[0]],
        keywords=list(zip(words, weights)),
        kept=kept,
    )


def words(prefix, n):
    return [f"{prefix}{i:02d}" for i in range(n)]


class TestKeywordCosine:
    def test_identical_sets(self):
        assert keyword_cosine(words("a", 20), words("a", 20)) == 1.0

    def test_disjoint_sets(self):
        assert keyword_cosine(words("a", 20), words("b", 20)) == 0.0

    def test_eight_of_twenty(self):
        a = words("s", 8) + words("a", 12)
        b = words("s", 8) + words("b", 12)
        assert keyword_cosine(a, b) == pytest.approx(0.40)

    def test_unequal_sizes(self):
        assert keyword_cosine(["x", "y"], ["x"]) == pytest.approx(1 / 2**0.5)

    def test_empty_set_rejected(self):
        with pytest.raises(ValueError):
            keyword_cosine([], ["x"])

    def test_symmetry(self):
        a, b = words("a", 20), words("a", 7) + words("b", 13)
        assert keyword_cosine(a, b) == keyword_cosine(b, a)

    def test_quantized_to_twentieths(self):
        for k in range(21):
            a = words("s", k) + words("a", 20 - k)
            b = words("s", k) + words("b", 20 - k)
            assert keyword_cosine(a, b) == pytest.approx(k / 20, abs=1e-12)


class TestClassify:
    def test_examples(self):
        assert classify(0.40) is Relatedness.HIGHLY_RELATED
        assert classify(0.35) is Relatedness.SOMEWHAT_RELATED
        assert classify(0.20) is Relatedness.SOMEWHAT_RELATED
        assert classify(0.15) is Relatedness.NOT_RELATED

    def test_exact_boundaries_via_overlap(self):
        assert classify_overlap(7, 20, 20) is Relatedness.SOMEWHAT_RELATED
        assert classify_overlap(8, 20, 20) is Relatedness.HIGHLY_RELATED
        assert classify_overlap(4, 20, 20) is Relatedness.SOMEWHAT_RELATED
        assert classify_overlap(3, 20, 20) is Relatedness.NOT_RELATED

    def test_float_and_exact_agree_on_the_grid(self):
        for k in range(21):
            assert classify(k / 20) is classify_overlap(k, 20, 20)

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            classify(1.5)

    @given(st.floats(min_value=0.0, max_value=1.0))
    def test_total_partition(self, s):
        assert classify(s) in (
            Relatedness.HIGHLY_RELATED,
            Relatedness.SOMEWHAT_RELATED,
            Relatedness.NOT_RELATED,
        )


class TestCompareAll:
    def test_single_pair_half_overlap(self):
        ru = [cluster(0, words("s", 10) + words("r", 10), Language.RUSSIAN)]
        en = [cluster(0, words("s", 10) + words("e", 10))]
        report = compare_all(ru, en)
        assert len(report.records) == 1
        assert report.records[0].score == pytest.approx(0.5)
        assert report.records[0].level is Relatedness.HIGHLY_RELATED
        assert report.common_topics == [(0, 0)]
        assert report.unique_russian == [] and report.unique_english == []

    def test_all_unrelated_marks_uniques(self):
        ru = [cluster(0, words("r", 20), Language.RUSSIAN)]
        en = [cluster(0, words("e", 20)), cluster(1, words("f", 20))]
        report = compare_all(ru, en)
        assert report.unique_russian == [0]
        assert report.unique_english == [0, 1]
        assert report.common_topics == []

    def test_cluster_paired_more_than_once(self):
        shared = words("s", 10)
        ru = [cluster(0, shared + words("r", 10), Language.RUSSIAN)]
        en = [cluster(0, shared + words("e", 10)), cluster(1, shared + words("f", 10))]
        report = compare_all(ru, en)
        assert report.common_topics == [(0, 0), (0, 1)]

    def test_record_count_is_product(self):
        ru = [cluster(i, words(f"r{i}", 20), Language.RUSSIAN) for i in range(3)]
        en = [cluster(i, words(f"e{i}", 20)) for i in range(4)]
        report = compare_all(ru, en)
        assert len(report.records) == 12
        assert sum(pairs for pairs, _, _ in report.histogram.values()) == 12

    def test_histogram_max_columns_partition_clusters(self):
        shared = words("s", 9)
        ru = [
            cluster(0, shared + words("r", 11), Language.RUSSIAN),
            cluster(1, words("q", 20), Language.RUSSIAN),
        ]
        en = [cluster(0, shared + words("e", 11)), cluster(1, words("f", 20))]
        report = compare_all(ru, en)
        assert sum(r for _, r, _ in report.histogram.values()) == len(ru)
        assert sum(e for _, _, e in report.histogram.values()) == len(en)
        # the 9/20 bucket holds each side's best-matched cluster
        assert report.histogram[0.45][1] == 1
        assert report.histogram[0.45][2] == 1

    def test_every_cluster_in_exactly_one_outcome(self):
        shared = words("s", 10)
        somewhat = words("w", 5)
        ru = [
            cluster(0, shared + words("r", 10), Language.RUSSIAN),
            cluster(1, somewhat + words("p", 15), Language.RUSSIAN),
            cluster(2, words("q", 20), Language.RUSSIAN),
        ]
        en = [cluster(0, shared + somewhat + words("e", 5))]
        report = compare_all(ru, en)
        in_common = {r for r, _ in report.common_topics}
        unique = set(report.unique_russian)
        assert in_common == {0}
        assert unique == {2}
        somewhat_only = {r.russian_cluster_id for r in report.records} - in_common - unique
        assert somewhat_only == {1}

    def test_rejects_dropped_clusters(self):
        ru = [cluster(0, words("r", 20), Language.RUSSIAN, kept=False)]
        en = [cluster(0, words("e", 20))]
        with pytest.raises(ValueError):
            compare_all(ru, en)

    def test_rejects_empty_side(self):
        with pytest.raises(ValueError):
            compare_all([], [cluster(0, words("e", 20))])

    def test_histogram_rows_on_005_grid(self):
        ru = [cluster(0, words("s", 6) + words("r", 14), Language.RUSSIAN)]
        en = [cluster(0, words("s", 6) + words("e", 14))]
        report = compare_all(ru, en)
        for label, bucket, *_ in histogram_rows(report):
            assert round(bucket * 20) == pytest.approx(bucket * 20, abs=1e-9)

    def test_custom_thresholds(self):
        ru = [cluster(0, words("s", 6) + words("r", 14), Language.RUSSIAN)]
        en = [cluster(0, words("s", 6) + words("e", 14))]
        report = compare_all(ru, en, highly=Fraction(1, 4), low=Fraction(1, 10))
        assert report.records[0].level is Relatedness.HIGHLY_RELATED


class TestExtractJargon:
    def test_unknown_term_with_context(self):
        c = cluster(3, ["lockbit", "encryption", "malicious", "attack", "ransomhack"])
        out = extract_jargon([c], [{"encryption", "attack"}])
        terms = {j.term: j for j in out}
        assert "lockbit" in terms
        assert terms["lockbit"].source_clusters == (("en", 3),)
        assert set(terms["lockbit"].context_keywords) == {
            "encryption", "malicious", "attack", "ransomhack"
        }

    def test_glossary_hit_removed(self):
        c = cluster(0, ["botnet", "spam", "mailer"])
        out = extract_jargon([c], [{"botnet"}])
        assert "botnet" not in {j.term for j in out}

    def test_regular_words_survive(self):
        # a known homonym must not be filtered just for being ordinary English
        c = cluster(0, ["rat", "remote", "access"])
        out = extract_jargon([c], [{"trojan"}])
        assert "rat" in {j.term for j in out}

    def test_glossary_order_and_duplication_irrelevant(self):
        clusters = [
            cluster(0, words("a", 10)),
            cluster(1, words("a", 5) + words("b", 5), Language.RUSSIAN),
        ]
        g1 = [{"a00", "a01"}, {"b00"}]
        g2 = [{"b00"}, {"a01", "a00"}, {"a00"}]
        assert extract_jargon(clusters, g1) == extract_jargon(clusters, g2)

    def test_dropped_clusters_ignored(self):
        c = cluster(0, ["zzterm"], kept=False)
        assert extract_jargon([c], []) == []

    def test_synthetic_pool_arithmetic(self):
        pool = [f"kw{i:04d}" for i in range(8101)]
        clusters = [
            cluster(i, pool[i * 20:(i + 1) * 20] or pool[-20:], Language.ENGLISH)
            for i in range(406)
        ]
        # 406 * 20 = 8120 slots; reuse the tail so exactly 8101 distinct terms
        clusters.append(cluster(406, pool[-20:], Language.RUSSIAN))
        distinct = {w for c in clusters for w, _ in c.keywords}
        assert len(distinct) == 8101
        glossary = set(pool[:67])
        out = extract_jargon(clusters, [glossary])
        assert len(out) == 8034
