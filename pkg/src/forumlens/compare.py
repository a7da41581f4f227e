"""Cross-corpus cluster comparison via keyword-set cosine similarity.

Every Russian cluster is scored against every English cluster on the
overlap of their top keywords. Scores classify into three relatedness
levels; highly related pairs are common topics, and clusters unrelated to
everything on the other side are unique topics (pockets of knowledge).
Keyword pooling minus known glossaries yields the dark-jargon candidates.
"""

from __future__ import annotations

import json
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from pathlib import Path

from .topics import TopicCluster

HIGHLY_RELATED_THRESHOLD = Fraction(35, 100)
NOT_RELATED_THRESHOLD = Fraction(20, 100)


class Relatedness(Enum):
    HIGHLY_RELATED = "highly_related"
    SOMEWHAT_RELATED = "somewhat_related"
    NOT_RELATED = "not_related"


@dataclass(frozen=True)
class SimilarityRecord:
    russian_cluster_id: int
    english_cluster_id: int
    score: float
    level: Relatedness


@dataclass(frozen=True)
class JargonCandidate:
    term: str
    source_clusters: tuple[tuple[str, int], ...]  # (language code, cluster id)
    context_keywords: tuple[str, ...]


@dataclass
class RelatednessReport:
    records: list[SimilarityRecord]
    common_topics: list[tuple[int, int]]  # (russian id, english id)
    unique_russian: list[int]
    unique_english: list[int]
    # score bucket (multiple of 0.05) -> (pairs, russian clusters whose max
    # score falls in the bucket, english clusters likewise)
    histogram: dict[float, tuple[int, int, int]]


def keyword_cosine(a: Iterable[str], b: Iterable[str]) -> float:
    """Cosine of the binary keyword-presence vectors: |A∩B| / sqrt(|A|·|B|).

    With the usual 20 keywords per cluster every score is a multiple of 1/20.
    """
    set_a, set_b = set(a), set(b)
    if not set_a or not set_b:
        raise ValueError("keyword sets must be non-empty")
    return len(set_a & set_b) / math.sqrt(len(set_a) * len(set_b))


def classify(
    s: float,
    highly: float = float(HIGHLY_RELATED_THRESHOLD),
    low: float = float(NOT_RELATED_THRESHOLD),
) -> Relatedness:
    """Three-way relatedness level; both boundary values fall in the middle band."""
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"similarity must lie in [0, 1], got {s}")
    if s > highly:
        return Relatedness.HIGHLY_RELATED
    if s < low:
        return Relatedness.NOT_RELATED
    return Relatedness.SOMEWHAT_RELATED


def classify_overlap(
    intersection: int,
    size_a: int,
    size_b: int,
    highly: Fraction = HIGHLY_RELATED_THRESHOLD,
    low: Fraction = NOT_RELATED_THRESHOLD,
) -> Relatedness:
    """Exact-arithmetic classification from set sizes.

    Compares the squared cosine intersection^2/(|A|·|B|) against squared
    thresholds as rationals, so boundary cases like 7/20 and 4/20 are decided
    without floating-point rounding.
    """
    squared = Fraction(intersection * intersection, size_a * size_b)
    if squared > highly * highly:
        return Relatedness.HIGHLY_RELATED
    if squared < low * low:
        return Relatedness.NOT_RELATED
    return Relatedness.SOMEWHAT_RELATED


def compare_all(
    russian: Sequence[TopicCluster],
    english: Sequence[TopicCluster],
    highly: Fraction = HIGHLY_RELATED_THRESHOLD,
    low: Fraction = NOT_RELATED_THRESHOLD,
) -> RelatednessReport:
    """Score every Russian cluster against every English cluster.

    Emits exactly len(russian) * len(english) records ordered by cluster id
    pair. Common topics are the highly related pairs; a cluster is unique
    when the best score against the whole other corpus stays below the
    not-related threshold.
    """
    if not russian or not english:
        raise ValueError("both cluster sets must be non-empty")
    for c in list(russian) + list(english):
        if not c.kept:
            raise ValueError(f"cluster {c.language.value}:{c.cluster_id} was dropped; filter first")

    ru_sets = {c.cluster_id: {w for w, _ in c.keywords} for c in russian}
    en_sets = {c.cluster_id: {w for w, _ in c.keywords} for c in english}

    records: list[SimilarityRecord] = []
    common: list[tuple[int, int]] = []
    ru_best: dict[int, float] = {c.cluster_id: 0.0 for c in russian}
    en_best: dict[int, float] = {c.cluster_id: 0.0 for c in english}
    ru_all_unrelated: dict[int, bool] = {c.cluster_id: True for c in russian}
    en_all_unrelated: dict[int, bool] = {c.cluster_id: True for c in english}
    pair_buckets: dict[int, int] = {}

    for rc in sorted(russian, key=lambda c: c.cluster_id):
        a = ru_sets[rc.cluster_id]
        for ec in sorted(english, key=lambda c: c.cluster_id):
            b = en_sets[ec.cluster_id]
            inter = len(a & b)
            score = inter / math.sqrt(len(a) * len(b))
            level = classify_overlap(inter, len(a), len(b), highly, low)
            records.append(
                SimilarityRecord(rc.cluster_id, ec.cluster_id, score, level)
            )
            if level is Relatedness.HIGHLY_RELATED:
                common.append((rc.cluster_id, ec.cluster_id))
            if level is not Relatedness.NOT_RELATED:
                ru_all_unrelated[rc.cluster_id] = False
                en_all_unrelated[ec.cluster_id] = False
            ru_best[rc.cluster_id] = max(ru_best[rc.cluster_id], score)
            en_best[ec.cluster_id] = max(en_best[ec.cluster_id], score)
            pair_buckets[_bucket(score)] = pair_buckets.get(_bucket(score), 0) + 1

    ru_max_buckets: dict[int, int] = {}
    for score in ru_best.values():
        ru_max_buckets[_bucket(score)] = ru_max_buckets.get(_bucket(score), 0) + 1
    en_max_buckets: dict[int, int] = {}
    for score in en_best.values():
        en_max_buckets[_bucket(score)] = en_max_buckets.get(_bucket(score), 0) + 1

    histogram = {
        bucket / 20.0: (
            pair_buckets.get(bucket, 0),
            ru_max_buckets.get(bucket, 0),
            en_max_buckets.get(bucket, 0),
        )
        for bucket in sorted(set(pair_buckets) | set(ru_max_buckets) | set(en_max_buckets))
    }

    return RelatednessReport(
        records=records,
        common_topics=common,
        unique_russian=sorted(cid for cid, unrelated in ru_all_unrelated.items() if unrelated),
        unique_english=sorted(cid for cid, unrelated in en_all_unrelated.items() if unrelated),
        histogram=histogram,
    )


def _bucket(score: float) -> int:
    """Nearest multiple of 0.05, as an integer count of twentieths."""
    return int(round(score * 20.0))


def extract_jargon(
    clusters: Sequence[TopicCluster], glossaries: Sequence[Iterable[str]]
) -> list[JargonCandidate]:
    """Keywords absent from every glossary, with their cluster context.

    Ordinary English words are deliberately not excluded: a known word can
    still be jargon when the community uses it as a homonym. Output does not
    depend on glossary order or duplication.
    """
    known: set[str] = set()
    for glossary in glossaries:
        known.update(w.strip().lower() for w in glossary if w.strip())

    occurrences: dict[str, list[tuple[str, int]]] = {}
    contexts: dict[str, set[str]] = {}
    for c in clusters:
        if not c.kept:
            continue
        words = [w for w, _ in c.keywords]
        for w in words:
            if w in known:
                continue
            occurrences.setdefault(w, []).append((c.language.value, c.cluster_id))
            contexts.setdefault(w, set()).update(x for x in words if x != w)

    return [
        JargonCandidate(
            term=term,
            source_clusters=tuple(sorted(occurrences[term])),
            context_keywords=tuple(sorted(contexts[term])),
        )
        for term in sorted(occurrences)
    ]


def load_glossary(path: str | Path) -> set[str]:
    with open(path, encoding="utf-8") as f:
        return {line.strip().lower() for line in f if line.strip()}


# ---------------------------------------------------------------------------
# Report files: delimiter-separated tables plus a JSON summary.

def write_pair_table(report: RelatednessReport, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write("russian_cluster\tenglish_cluster\tscore\tlevel\n")
        for r in report.records:
            f.write(
                f"{r.russian_cluster_id}\t{r.english_cluster_id}\t{r.score:.6f}\t{r.level.value}\n"
            )


def histogram_rows(report: RelatednessReport) -> list[tuple[str, float, int, int, int]]:
    """Rows of (level label, bucket, pairs, russian max count, english max count),
    buckets descending."""
    rows = []
    for bucket in sorted(report.histogram, reverse=True):
        pairs, ru_max, en_max = report.histogram[bucket]
        label = classify(bucket).value
        rows.append((label, bucket, pairs, ru_max, en_max))
    return rows


def write_histogram(report: RelatednessReport, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write("level\tscore\tpairs\tmax_score_russian\tmax_score_english\n")
        for label, bucket, pairs, ru_max, en_max in histogram_rows(report):
            f.write(f"{label}\t{bucket:.2f}\t{pairs}\t{ru_max}\t{en_max}\n")


def write_summary(report: RelatednessReport, path: str | Path) -> None:
    payload = {
        "pair_count": len(report.records),
        "common_topics": [list(pair) for pair in report.common_topics],
        "unique_russian": report.unique_russian,
        "unique_english": report.unique_english,
        "histogram": {
            f"{bucket:.2f}": list(values) for bucket, values in sorted(report.histogram.items())
        },
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")


def write_jargon_table(candidates: Sequence[JargonCandidate], path: str | Path) -> None:
    # The validation column stays empty: confirming candidates against
    # open-source intelligence is the analyst's call.
    with open(path, "w", encoding="utf-8") as f:
        f.write("term\tclusters\tcontext_keywords\tvalidation\n")
        for c in candidates:
            clusters = ",".join(f"{lang}:{cid}" for lang, cid in c.source_clusters)
            f.write(f"{c.term}\t{clusters}\t{','.join(c.context_keywords)}\t\n")
