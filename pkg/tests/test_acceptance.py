"""Acceptance suite: one test per criterion, each printing a PASS line and
holding its stated tolerance and runtime budget.

The end-to-end scenario (criteria 7 and 8) drives the real CLI stage by
stage on a planted synthetic corpus and checks recovery against the emitted
ground truth.
"""

import itertools
import json
import random
import time
from collections import Counter
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from forumlens.cli import main as cli_main
from forumlens.compare import Relatedness, classify, classify_overlap, extract_jargon, keyword_cosine
from forumlens.density import ClusterParams, cluster, mst_total_weight
from forumlens.embedding import ProviderConfig, ProviderKind
from forumlens.ingest import Language, build_corpus, is_nonconversational
from forumlens.metrics import compare_models, rand_index
from forumlens.synth import SynthSpec, generate, read_truth, TopicKind
from forumlens.topics import (
    EnrichedDictionary,
    LdaParams,
    TopicCluster,
    filter_clusters,
    lda_keywords,
    tokenize,
)
from forumlens.translate import TableTranslator

from oracles import (
    brute_rand_index,
    min_spanning_weight_enumeration,
    min_spanning_weight_kruskal,
    mutual_reachability_matrix,
    tf_ranking,
)


def report(criterion: int, message: str) -> None:
    print(f"ACCEPTANCE {criterion}: PASS - {message}")


# -- criterion 1 -------------------------------------------------------------

def test_c1_noise_filter_boundary():
    started = time.perf_counter()
    rng = random.Random(101)
    symbols = "!@#$%^&*(){};:<>?/"
    letters = "abcdefghijklmnopqrstuvwxyz0123456789"

    errors = 0
    boundary_cases = 0
    for i in range(10_000):
        if i % 4 == 0:
            total = 25 * rng.randint(1, 8)  # 12% of total is an integer
            symbol_count = 12 * total // 100
            boundary_cases += 1
        else:
            total = rng.randint(10, 200)
            symbol_count = rng.randint(0, total)
        chars = [rng.choice(symbols) for _ in range(symbol_count)]
        chars += [rng.choice(letters) for _ in range(total - symbol_count)]
        rng.shuffle(chars)
        for pos in sorted(rng.sample(range(len(chars) + 1), k=rng.randint(0, 4)), reverse=True):
            chars.insert(pos, " ")
        text = "".join(chars)
        expected = 100 * symbol_count > 12 * total  # exact integer arithmetic
        if is_nonconversational(text) != expected:
            errors += 1
    assert errors == 0
    assert boundary_cases == 2500

    # conversational-only synthetic text: false-fire rate must stay under 1%
    posts, _ = generate(SynthSpec(
        shared_topic_count=4, docs_per_topic=60, noise_fraction=0.0, seed=5,
    ))
    paragraphs = []
    for p in posts:
        if p.headline:
            paragraphs.append(p.headline)
        paragraphs.extend(line for line in p.body.split("\n") if line.strip())
    fires = sum(1 for text in paragraphs if is_nonconversational(text))
    assert fires / len(paragraphs) < 0.01

    elapsed = time.perf_counter() - started
    assert elapsed < 5.0
    report(1, f"10,000 exact-ratio checks, 0 boundary errors; "
              f"false-fire {fires}/{len(paragraphs)}; {elapsed:.1f}s")


# -- criterion 2 -------------------------------------------------------------

def test_c2_hdbscan_mst_oracle():
    started = time.perf_counter()
    rng = np.random.default_rng(202)

    checked_enum = 0
    for trial in range(200):
        n = int(rng.integers(3, 13))
        points = rng.normal(size=(n, int(rng.integers(2, 4))))
        k = int(rng.integers(1, n + 1))
        ours = mst_total_weight(points, k)
        weights = mutual_reachability_matrix(points, k)
        # layered oracle: exhaustive spanning-tree enumeration where feasible
        # (n <= 7, Cayley: n^(n-2) trees), classic Kruskal everywhere
        if n <= 7:
            enum = min_spanning_weight_enumeration(weights)
            assert abs(ours - enum) <= 1e-9
            checked_enum += 1
        kruskal = min_spanning_weight_kruskal(weights)
        assert abs(ours - kruskal) <= 1e-9
    assert checked_enum >= 50

    # two far-separated blobs: exact recovery with full purity
    blob_rng = np.random.default_rng(203)
    spread = 1.0
    a = blob_rng.normal(0, spread, size=(50, 3))
    b = blob_rng.normal(0, spread, size=(50, 3))
    b[:, 0] += 100.0 * spread
    result, _ = cluster(np.vstack([a, b]), ClusterParams(min_cluster_size=10))
    assert result.cluster_count == 2
    assert result.outlier_count == 0
    assert len(set(result.labels[:50])) == 1 and len(set(result.labels[50:])) == 1

    elapsed = time.perf_counter() - started
    assert elapsed < 60.0
    report(2, f"200 MST instances vs brute force ({checked_enum} by full enumeration); "
              f"two-blob recovery exact; {elapsed:.1f}s")


# -- criterion 3 -------------------------------------------------------------

def test_c3_clustering_determinism():
    started = time.perf_counter()
    posts, truth = generate(SynthSpec(
        shared_topic_count=4, docs_per_topic=40, noise_fraction=0.0, seed=33,
    ))
    english, _, _ = build_corpus(posts, translator=TableTranslator(truth.translation_table))
    providers = {"hash": ProviderConfig(kind=ProviderKind.HASH, dimension=128, seed=7)}
    summaries = compare_models(
        english, providers, ClusterParams(min_cluster_size=24), runs=5
    )
    assert summaries[0].avg_pairwise_rand == 1.0
    elapsed = time.perf_counter() - started
    assert elapsed < 60.0
    report(3, f"5 runs on {len(english)} paragraphs, pairwise Rand exactly 1.0; {elapsed:.1f}s")


# -- criterion 4 -------------------------------------------------------------

def test_c4_lda_single_topic_exactness():
    started = time.perf_counter()
    rng = random.Random(404)
    vocab = [f"word{i:03d}" for i in range(40)]
    for beta in (0.001, 0.01, 0.1):
        for _ in range(1000):
            texts = [
                " ".join(rng.choices(vocab, k=rng.randint(3, 25)))
                for _ in range(rng.randint(1, 4))
            ]
            keywords = lda_keywords(texts, LdaParams(beta=beta), top_n=20)
            oracle = tf_ranking(texts, lambda t: tokenize(t, frozenset()), 20)
            assert [w for w, _ in keywords] == oracle

    # distribution over the whole vocabulary sums to one
    texts = [" ".join(rng.choices(vocab, k=50)) for _ in range(10)]
    full = lda_keywords(texts, LdaParams(beta=0.01), top_n=10_000)
    assert abs(sum(w for _, w in full) - 1.0) <= 1e-9

    elapsed = time.perf_counter() - started
    assert elapsed < 30.0
    report(4, f"3,000 random clusters match the term-frequency oracle for "
              f"beta in {{0.001, 0.01, 0.1}}; weights sum to 1+-1e-9; {elapsed:.1f}s")


# -- criterion 5 -------------------------------------------------------------

def test_c5_similarity_quantization_and_thresholds():
    started = time.perf_counter()
    for k in range(21):
        a = [f"s{i:02d}" for i in range(k)] + [f"a{i:02d}" for i in range(20 - k)]
        b = [f"s{i:02d}" for i in range(k)] + [f"b{i:02d}" for i in range(20 - k)]
        score = keyword_cosine(a, b)
        assert score == pytest.approx(k / 20, abs=1e-12)
        level = classify_overlap(k, 20, 20)
        if Fraction(k, 20) > Fraction(35, 100):
            assert level is Relatedness.HIGHLY_RELATED
        elif Fraction(k, 20) < Fraction(20, 100):
            assert level is Relatedness.NOT_RELATED
        else:
            assert level is Relatedness.SOMEWHAT_RELATED
        assert classify(k / 20) is level

    assert classify_overlap(7, 20, 20) is Relatedness.SOMEWHAT_RELATED  # 0.35 boundary
    assert classify_overlap(4, 20, 20) is Relatedness.SOMEWHAT_RELATED  # 0.20 boundary
    assert classify(0.40) is Relatedness.HIGHLY_RELATED
    assert classify(0.15) is Relatedness.NOT_RELATED

    elapsed = time.perf_counter() - started
    assert elapsed < 1.0
    report(5, f"all overlaps k/20 quantized and classified correctly, "
              f"boundaries 7/20 and 4/20 in the middle band; {elapsed:.2f}s")


# -- criterion 6 -------------------------------------------------------------

def _coclustering_mask(vec: tuple[int, ...]) -> int:
    bits = 0
    k = 0
    n = len(vec)
    for i in range(n):
        for j in range(i + 1, n):
            if vec[i] == vec[j] != -1:
                bits |= 1 << k
            k += 1
    return bits


def test_c6_rand_index_brute_force_oracle():
    started = time.perf_counter()
    rng = random.Random(606)

    # Exhaustive over every label vector with n <= 8 over {-1, 0, 1, 2}: each
    # vector is checked against deterministic partners. The Rand index of a
    # pair depends only on the two per-pair co-clustering masks (outliers are
    # singletons, so a pair is co-clustered iff labels match and are not -1),
    # so additionally checking every pair of distinct mask classes for n <= 6
    # covers every behavioral combination there exhaustively.
    total_checks = 0
    for n in range(2, 9):
        representatives: dict[int, tuple[int, ...]] = {}
        for vec in itertools.product((-1, 0, 1, 2), repeat=n):
            mask = _coclustering_mask(vec)
            if mask not in representatives:
                representatives[mask] = vec
            partners = [
                tuple(reversed(vec)),
                tuple(rng.choice((-1, 0, 1, 2)) for _ in range(n)),
            ]
            for partner in partners:
                assert rand_index(vec, partner) == pytest.approx(
                    brute_rand_index(vec, partner), abs=1e-12
                )
                total_checks += 1
        if n <= 6:
            reps = list(representatives.values())
            for a in reps:
                for b in reps:
                    assert rand_index(a, b) == pytest.approx(
                        brute_rand_index(a, b), abs=1e-12
                    )
                    total_checks += 1

    elapsed = time.perf_counter() - started
    assert elapsed < 60.0
    report(6, f"{total_checks} oracle comparisons across all vectors n<=8 "
              f"plus all mask-class pairs n<=6; {elapsed:.1f}s")


# -- criteria 7 and 8: the planted end-to-end scenario ----------------------

JARGON_HOSTS = {
    "zzcryptomix": 0,   # shared topic
    "qqloaderkit": 5,   # shared topic
    "xxstealthnet": 12,  # unique-Russian topic
    "wwpacketfog": 14,   # unique-Russian topic
    "vvspoofray": 16,    # unique-English topic
}

POK_CONFIG = """
seed = 77
translator_kind = table
min_cluster_size = 24
synth_shared_topics = 12
synth_unique_russian = 4
synth_unique_english = 3
synth_docs_per_topic = 150
synth_noise_fraction = 0.1
synth_jargon = {jargon}
"""


@pytest.fixture(scope="module")
def pok_run(tmp_path_factory):
    root = tmp_path_factory.mktemp("pok")
    config_path = root / "run.cfg"
    jargon = ",".join(f"{term}:{host}" for term, host in sorted(JARGON_HOSTS.items()))
    config_path.write_text(POK_CONFIG.format(jargon=jargon) + f"out = {root / 'out'}\n")

    timings = {}
    for stage in ("synth", "ingest", "embed", "cluster", "represent", "compare", "jargon"):
        t0 = time.perf_counter()
        code = cli_main([stage, "--config", str(config_path)])
        timings[stage] = time.perf_counter() - t0
        assert code == 0, f"stage {stage} failed"

    out = root / "out"
    truth = read_truth(out / "synth" / "truth.json")
    summary = json.loads((out / "compare" / "summary.json").read_text())
    topics = {}
    for suffix in ("en", "ru"):
        records = json.loads((out / "represent" / f"topics_{suffix}.json").read_text())
        topics[suffix] = records
    jargon_payload = json.loads((out / "jargon" / "jargon.json").read_text())
    return {
        "truth": truth,
        "summary": summary,
        "topics": topics,
        "jargon": jargon_payload,
        "timings": timings,
    }


def _majority_topic(cluster_record, truth) -> int:
    votes = Counter(
        truth.paragraph_topics[pid]
        for pid in cluster_record["member_paragraphs"]
        if pid in truth.paragraph_topics
    )
    if not votes:
        return -1
    return votes.most_common(1)[0][0]


def test_c7_end_to_end_pok_recovery(pok_run):
    truth = pok_run["truth"]
    summary = pok_run["summary"]
    total_time = sum(pok_run["timings"].values())

    cluster_topic = {}
    for suffix in ("en", "ru"):
        for record in pok_run["topics"][suffix]:
            cluster_topic[(suffix, record["cluster_id"])] = _majority_topic(record, truth)

    shared = {t for t, kind in truth.topic_kinds.items() if kind is TopicKind.SHARED}
    unique_ru = {t for t, kind in truth.topic_kinds.items() if kind is TopicKind.UNIQUE_RUSSIAN}
    unique_en = {t for t, kind in truth.topic_kinds.items() if kind is TopicKind.UNIQUE_ENGLISH}

    covered = set()
    for ru_id, en_id in summary["common_topics"]:
        ru_topic = cluster_topic[("ru", ru_id)]
        en_topic = cluster_topic[("en", en_id)]
        # no planted-unique topic may surface as a common pair
        assert ru_topic not in unique_ru | unique_en, (ru_id, en_id, ru_topic)
        assert en_topic not in unique_ru | unique_en, (ru_id, en_id, en_topic)
        if ru_topic == en_topic and ru_topic in shared:
            covered.add(ru_topic)
    coverage = len(covered) / len(shared)
    assert coverage >= 0.80, f"common-topic coverage {coverage:.2f}"

    recovered_ru = {
        cluster_topic[("ru", cid)]
        for cid in summary["unique_russian"]
        if cluster_topic[("ru", cid)] in unique_ru
    }
    recovered_en = {
        cluster_topic[("en", cid)]
        for cid in summary["unique_english"]
        if cluster_topic[("en", cid)] in unique_en
    }
    ru_recall = len(recovered_ru) / len(unique_ru)
    en_recall = len(recovered_en) / len(unique_en)
    assert ru_recall >= 0.75, f"unique-Russian recall {ru_recall:.2f}"
    assert en_recall >= 0.75, f"unique-English recall {en_recall:.2f}"

    assert total_time < 600.0
    report(7, f"coverage {len(covered)}/{len(shared)} shared topics, unique recall "
              f"ru {ru_recall:.2f} / en {en_recall:.2f}, no planted-unique in common; "
              f"pipeline {total_time:.0f}s")


def test_c8_jargon_extraction(pok_run):
    started = time.perf_counter()
    truth = pok_run["truth"]
    candidates = {c["term"]: c for c in pok_run["jargon"]}

    for term, host in JARGON_HOSTS.items():
        assert term in candidates, f"planted term {term} missing"
        host_vocab = set(truth.topic_core_vocab[host])
        context_hits = set(candidates[term]["context_keywords"]) & host_vocab
        assert len(context_hits) >= 3, f"{term}: host-topic context {context_hits}"

    # set-difference consistency: 8,101 distinct keywords minus 67 glossary
    # terms leaves exactly 8,034 candidates
    pool = [f"kw{i:04d}" for i in range(8101)]
    clusters = []
    for i in range(406):
        words = pool[i * 20:(i + 1) * 20] or pool[-20:]
        weights = [(len(words) - j) / 100 for j in range(len(words))]
        clusters.append(TopicCluster(
            cluster_id=i, language=Language.ENGLISH, member_paragraphs=["x"],
            label_words=[words[0]], keywords=list(zip(words, weights)),
        ))
    clusters.append(TopicCluster(
        cluster_id=406, language=Language.RUSSIAN, member_paragraphs=["x"],
        label_words=[pool[-1]], keywords=[(w, 0.01) for w in pool[-20:]],
    ))
    assert len({w for c in clusters for w, _ in c.keywords}) == 8101
    out = extract_jargon(clusters, [set(pool[:67])])
    assert len(out) == 8034

    elapsed = time.perf_counter() - started + pok_run["timings"]["jargon"]
    assert elapsed < 30.0
    report(8, f"all 5 planted neologisms recovered with >=3 host-topic context "
              f"keywords; 8101-67=8034 set difference exact; {elapsed:.1f}s")


# -- criterion 9 -------------------------------------------------------------

def test_c9_dictionary_filter_boundaries():
    dictionary = EnrichedDictionary.from_words(
        [f"known{i:02d}" for i in range(20)] + ["server"]
    )

    def build(unrecognized: int) -> TopicCluster:
        words = [f"zzunknown{i:02d}" for i in range(unrecognized)]
        words += [f"known{i:02d}" for i in range(20 - unrecognized)]
        weights = [(20 - i) / 100 for i in range(20)]
        return TopicCluster(
            cluster_id=0, language=Language.ENGLISH, member_paragraphs=["x"],
            label_words=["server"], keywords=list(zip(words, weights)),
        )

    kept_16 = filter_clusters([build(16)], dictionary)[0]
    dropped_17 = filter_clusters([build(17)], dictionary)[0]
    assert kept_16.kept and kept_16.drop_reason is None
    assert not dropped_17.kept and dropped_17.drop_reason == "KeywordsUnrecognized"
    report(9, "16/20 unrecognized kept (exactly 80%), 17/20 dropped (>80%)")
