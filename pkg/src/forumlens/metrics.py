"""Clustering agreement metrics and the repeated-run model comparison harness."""

from __future__ import annotations

from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .density import ClusterParams, cluster
from .embedding import ProviderConfig, embed_batch, normalize, vectors_matrix
from .ingest import Paragraph

# A model under comparison: either a provider config or a callable taking
# (paragraphs, run_index) and returning one vector row per paragraph.
ModelSource = ProviderConfig | Callable[[Sequence[Paragraph], int], np.ndarray]


@dataclass(frozen=True)
class ModelRunSummary:
    provider: str
    runs: int
    avg_pairwise_rand: float | None
    avg_outliers: float | None
    avg_clusters: float | None
    failed: bool = False
    error: str = ""


def _rewrite_outliers(labels: np.ndarray) -> np.ndarray:
    """Give every outlier its own fresh singleton label.

    Outliers are points not grouped into any cluster, so treating them as one
    shared class would reward dumping points into noise.
    """
    labels = np.asarray(labels, dtype=np.int64).copy()
    outliers = labels == -1
    if outliers.any():
        start = labels.max() + 1 if labels.size else 0
        labels[outliers] = np.arange(start, start + int(outliers.sum()))
    return labels


def rand_index(labels_a, labels_b) -> float:
    """Fraction of point pairs on which two labelings agree.

    A pair agrees when it is co-clustered in both labelings or separated in
    both. Outliers (-1) are first rewritten as fresh singletons on each side.
    """
    a = _rewrite_outliers(np.asarray(labels_a))
    b = _rewrite_outliers(np.asarray(labels_b))
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("labelings must be 1-d and equally long")
    n = a.size
    if n < 2:
        raise ValueError("need at least two points")

    # Pair counting via the contingency table: agreements =
    # C(n,2) + 2*sum C(n_ij,2) - sum C(a_i,2) - sum C(b_j,2).
    _, a_ids = np.unique(a, return_inverse=True)
    _, b_ids = np.unique(b, return_inverse=True)
    joint = a_ids * (b_ids.max() + 1) + b_ids
    n_ij = np.bincount(joint).astype(np.float64)
    n_i = np.bincount(a_ids).astype(np.float64)
    n_j = np.bincount(b_ids).astype(np.float64)

    def pairs(x: np.ndarray) -> float:
        return float((x * (x - 1)).sum() / 2.0)

    total = n * (n - 1) / 2.0
    agree = total + 2.0 * pairs(n_ij) - pairs(n_i) - pairs(n_j)
    return agree / total


def adjusted_rand_index(labels_a, labels_b) -> float:
    """Chance-corrected agreement; supplementary statistic, not used by the
    relatedness pipeline. Outliers get the same singleton rewrite."""
    a = _rewrite_outliers(np.asarray(labels_a))
    b = _rewrite_outliers(np.asarray(labels_b))
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("labelings must be 1-d and equally long")
    n = a.size
    if n < 2:
        raise ValueError("need at least two points")
    _, a_ids = np.unique(a, return_inverse=True)
    _, b_ids = np.unique(b, return_inverse=True)
    joint = a_ids * (b_ids.max() + 1) + b_ids
    n_ij = np.bincount(joint).astype(np.float64)
    n_i = np.bincount(a_ids).astype(np.float64)
    n_j = np.bincount(b_ids).astype(np.float64)

    def pairs(x: np.ndarray) -> float:
        return float((x * (x - 1)).sum() / 2.0)

    total = n * (n - 1) / 2.0
    index = pairs(n_ij)
    expected = pairs(n_i) * pairs(n_j) / total
    maximum = (pairs(n_i) + pairs(n_j)) / 2.0
    if maximum == expected:
        return 1.0
    return (index - expected) / (maximum - expected)


def compare_models(
    corpus: Sequence[Paragraph],
    providers: Mapping[str, ModelSource],
    params: ClusterParams = ClusterParams(),
    runs: int = 5,
) -> list[ModelRunSummary]:
    """Embed and cluster the corpus repeatedly per provider and summarize.

    Reports, per provider: the average Rand index over all run pairs (1.0 for
    deterministic providers), the average outlier count, and the average
    cluster count. A provider failure marks its summary failed and the other
    providers are still reported.
    """
    if runs < 2:
        raise ValueError("need at least two runs to compare")
    summaries = []
    for name, source in providers.items():
        try:
            labelings = []
            outliers = []
            counts = []
            for run in range(runs):
                if isinstance(source, ProviderConfig):
                    rows = vectors_matrix(embed_batch(corpus, source))
                else:
                    rows = np.asarray(source(corpus, run), dtype=np.float64)
                rows = np.stack([normalize(r) for r in rows])
                result, _ = cluster(rows, params)
                labelings.append(result.labels)
                outliers.append(result.outlier_count)
                counts.append(result.cluster_count)
            rand_values = [
                rand_index(x, y) for x, y in combinations(labelings, 2)
            ]
            summaries.append(
                ModelRunSummary(
                    provider=name,
                    runs=runs,
                    avg_pairwise_rand=float(np.mean(rand_values)),
                    avg_outliers=float(np.mean(outliers)),
                    avg_clusters=float(np.mean(counts)),
                )
            )
        except Exception as exc:
            summaries.append(
                ModelRunSummary(
                    provider=name,
                    runs=runs,
                    avg_pairwise_rand=None,
                    avg_outliers=None,
                    avg_clusters=None,
                    failed=True,
                    error=str(exc),
                )
            )
    return summaries


def write_model_report(summaries: Sequence[ModelRunSummary], path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write("provider\tavg_rand_index\tavg_outliers\tavg_clusters\tstatus\n")
        for s in summaries:
            if s.failed:
                f.write(f"{s.provider}\t\t\t\tfailed: {s.error}\n")
            else:
                f.write(
                    f"{s.provider}\t{s.avg_pairwise_rand:.4f}\t{s.avg_outliers:.1f}"
                    f"\t{s.avg_clusters:.1f}\tok\n"
                )
