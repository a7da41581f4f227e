"""Cluster representation: topic keywords, short labels, and dictionary filtering.

Each cluster is summarized by its 20 strongest topic-model keywords plus a
label of up to four words (verb, co-occurring noun, two more nouns).
Clusters whose labels and keywords are mostly unrecognized by an enriched
dictionary are flagged as non-conversational and dropped from comparison.
"""

from __future__ import annotations

import random
import re
from collections import Counter
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .ingest import Language

DEFAULT_TOP_N = 20
# Fraction of unrecognized keywords above which a cluster is dropped.
KEYWORD_RECOGNITION_LIMIT = 0.80

_TOKEN_RE = re.compile(r"[^\W_]+(?:[-.][^\W_]+)*", re.UNICODE)


class EmptyClusterError(ValueError):
    pass


@dataclass(frozen=True)
class LdaParams:
    topic_count: int = 1
    beta: float = 0.01
    alpha: float | None = None  # defaults to 50 / topic_count
    iterations: int = 500  # Gibbs sweeps; unused for a single topic
    seed: int = 0

    def __post_init__(self) -> None:
        if self.topic_count < 1:
            raise ValueError("topic_count must be >= 1")
        if self.beta <= 0:
            raise ValueError("beta must be positive")
        if self.alpha is not None and self.alpha <= 0:
            raise ValueError("alpha must be positive")

    def resolved_alpha(self) -> float:
        return self.alpha if self.alpha is not None else 50.0 / self.topic_count


@dataclass
class EnrichedDictionary:
    """Case-insensitive membership of English plus well-known IT terms."""

    words: frozenset[str]

    def __post_init__(self) -> None:
        if not self.words:
            raise ValueError("dictionary must not be empty")

    @classmethod
    def from_words(cls, words: Iterable[str]) -> "EnrichedDictionary":
        return cls(words=frozenset(w.strip().lower() for w in words if w.strip()))

    @classmethod
    def from_file(cls, path: str | Path) -> "EnrichedDictionary":
        with open(path, encoding="utf-8") as f:
            return cls.from_words(f)

    def __contains__(self, word: str) -> bool:
        return word.lower() in self.words


@dataclass
class TopicCluster:
    cluster_id: int
    language: Language
    member_paragraphs: list[str]  # paragraph ids
    label_words: list[str]
    keywords: list[tuple[str, float]]  # sorted by weight descending
    kept: bool = True
    drop_reason: str | None = None


def load_stopwords(path: str | Path | None = None) -> frozenset[str]:
    if path is None:
        text = resources.files("forumlens.data").joinpath("stopwords.txt").read_text("utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    return frozenset(w.strip().lower() for w in text.splitlines() if w.strip())


def load_pos_lexicon(path: str | Path | None = None) -> dict[str, str]:
    """Lexicon lines are "word<TAB>tag" with tags V, N, or OTHER."""
    if path is None:
        text = resources.files("forumlens.data").joinpath("pos_lexicon.txt").read_text("utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    lexicon = {}
    for line in text.splitlines():
        if not line.strip():
            continue
        word, _, tag = line.partition("\t")
        if tag not in ("V", "N", "OTHER"):
            raise ValueError(f"bad lexicon tag in line {line!r}")
        lexicon[word.strip().lower()] = tag
    return lexicon


def load_default_dictionary() -> EnrichedDictionary:
    text = resources.files("forumlens.data").joinpath("dictionary.txt").read_text("utf-8")
    return EnrichedDictionary.from_words(text.splitlines())


def tokenize(text: str, stopwords: frozenset[str] = frozenset()) -> list[str]:
    """Lowercase tokens split on non-alphanumeric boundaries.

    Hyphens and dots survive inside alphanumeric runs ("no-ip", "v2.0");
    single-character tokens and stop words are dropped.
    """
    tokens = _TOKEN_RE.findall(text.lower())
    return [t for t in tokens if len(t) > 1 and t not in stopwords]


def lda_keywords(
    cluster_texts: Sequence[str],
    params: LdaParams = LdaParams(),
    top_n: int = DEFAULT_TOP_N,
    stopwords: frozenset[str] = frozenset(),
) -> list[tuple[str, float]]:
    """Top keywords of one cluster under a Dirichlet-smoothed topic model.

    With a single topic the topic-word posterior is exact:
    phi_w = (count_w + beta) / (total + V * beta), so the ranking equals the
    term-frequency ranking; ties break lexicographically ascending. With more
    topics, collapsed Gibbs sampling estimates the distributions and keywords
    are ranked by the topic-weighted marginal word probability.
    """
    docs = [tokenize(t, stopwords) for t in cluster_texts]
    counts = Counter(token for doc in docs for token in doc)
    if not counts:
        raise EmptyClusterError("cluster has no usable tokens")

    if params.topic_count == 1:
        total = sum(counts.values())
        v = len(counts)
        denom = total + v * params.beta
        weighted = [(w, (c + params.beta) / denom) for w, c in counts.items()]
    else:
        weighted = _gibbs_marginal(docs, params)

    weighted.sort(key=lambda item: (-item[1], item[0]))
    return weighted[:top_n]


def _gibbs_marginal(docs: list[list[str]], params: LdaParams) -> list[tuple[str, float]]:
    vocab = sorted({t for doc in docs for t in doc})
    index = {w: i for i, w in enumerate(vocab)}
    tau, v = params.topic_count, len(vocab)
    alpha, beta = params.resolved_alpha(), params.beta
    rng = np.random.default_rng(params.seed)

    doc_ids: list[int] = []
    word_ids: list[int] = []
    for d, doc in enumerate(docs):
        for token in doc:
            doc_ids.append(d)
            word_ids.append(index[token])
    doc_ids = np.asarray(doc_ids)
    word_ids = np.asarray(word_ids)
    total = len(word_ids)

    z = rng.integers(0, tau, size=total)
    n_dk = np.zeros((len(docs), tau))
    n_kw = np.zeros((tau, v))
    n_k = np.zeros(tau)
    for i in range(total):
        n_dk[doc_ids[i], z[i]] += 1
        n_kw[z[i], word_ids[i]] += 1
        n_k[z[i]] += 1

    for _ in range(params.iterations):
        for i in range(total):
            d, w, k = doc_ids[i], word_ids[i], z[i]
            n_dk[d, k] -= 1
            n_kw[k, w] -= 1
            n_k[k] -= 1
            p = (n_dk[d] + alpha) * (n_kw[:, w] + beta) / (n_k + v * beta)
            k = rng.choice(tau, p=p / p.sum())
            z[i] = k
            n_dk[d, k] += 1
            n_kw[k, w] += 1
            n_k[k] += 1

    topic_share = n_k / total
    phi = (n_kw + beta) / (n_k[:, None] + v * beta)
    marginal = topic_share @ phi
    return [(w, float(marginal[index[w]])) for w in vocab]


def label_cluster(
    cluster_texts: Sequence[str],
    pos_lexicon: Mapping[str, str],
    stopwords: frozenset[str] = frozenset(),
) -> list[str]:
    """Up to four label words: top verb, a noun it co-occurs with, two more nouns.

    The co-occurring noun stands in for the verb's direct object: it is the
    most frequent noun appearing in at least one paragraph together with the
    chosen verb. Missing slots are skipped; when the lexicon tags no verbs
    and no nouns at all, the label falls back to the four most frequent
    tokens.
    """
    docs = [tokenize(t, stopwords) for t in cluster_texts]
    tf = Counter(token for doc in docs for token in doc)
    if not tf:
        raise EmptyClusterError("cluster has no usable tokens")

    def ranked(words: Iterable[str]) -> list[str]:
        return sorted(words, key=lambda w: (-tf[w], w))

    verbs = ranked(w for w in tf if pos_lexicon.get(w) == "V")
    nouns = ranked(w for w in tf if pos_lexicon.get(w) == "N")
    if not verbs and not nouns:
        return ranked(tf)[:4]

    label: list[str] = []
    used: set[str] = set()
    if verbs:
        verb = verbs[0]
        label.append(verb)
        used.add(verb)
        verb_docs = [set(doc) for doc in docs if verb in doc]
        companions = [n for n in nouns if any(n in doc for doc in verb_docs)]
        if companions:
            label.append(companions[0])
            used.add(companions[0])
    for noun in nouns:
        if len(label) >= 4:
            break
        if noun not in used:
            label.append(noun)
            used.add(noun)
    return label[:4]


def filter_clusters(
    clusters: Sequence[TopicCluster],
    dictionary: EnrichedDictionary,
    keyword_limit: float = KEYWORD_RECOGNITION_LIMIT,
) -> list[TopicCluster]:
    """Flag clusters whose labels or keywords the dictionary does not recognize.

    A cluster is dropped when none of its label words are recognized, or when
    strictly more than keyword_limit of its keywords are unrecognized. Labels
    and keywords are never altered, only the kept flag and drop reason.
    """
    out = []
    for c in clusters:
        label_hits = sum(1 for w in c.label_words if w in dictionary)
        unrecognized = sum(1 for w, _ in c.keywords if w not in dictionary)
        if label_hits == 0:
            out.append(replace_kept(c, False, "LabelUnrecognized"))
        elif unrecognized > keyword_limit * len(c.keywords):
            out.append(replace_kept(c, False, "KeywordsUnrecognized"))
        else:
            out.append(replace_kept(c, True, None))
    return out


def replace_kept(cluster: TopicCluster, kept: bool, reason: str | None) -> TopicCluster:
    return TopicCluster(
        cluster_id=cluster.cluster_id,
        language=cluster.language,
        member_paragraphs=list(cluster.member_paragraphs),
        label_words=list(cluster.label_words),
        keywords=list(cluster.keywords),
        kept=kept,
        drop_reason=reason,
    )


def sample_for_review(
    clusters: Sequence[TopicCluster], fraction: float = 0.10, seed: int = 0
) -> list[TopicCluster]:
    """Seeded sample of kept clusters for manual inspection (default 10%)."""
    kept = [c for c in clusters if c.kept]
    if not kept:
        return []
    count = max(1, int(len(kept) * fraction))
    rng = random.Random(seed)
    return sorted(rng.sample(kept, count), key=lambda c: c.cluster_id)


def represent_clusters(
    labels: Sequence[int],
    paragraph_ids: Sequence[str],
    texts: Sequence[str],
    language: Language,
    lda_params: LdaParams = LdaParams(),
    top_n: int = DEFAULT_TOP_N,
    stopwords: frozenset[str] = frozenset(),
    pos_lexicon: Mapping[str, str] | None = None,
) -> list[TopicCluster]:
    """Build a TopicCluster for every non-outlier label in one corpus.

    texts must already be in the comparison language (translated for the
    Russian corpus). Clusters whose texts tokenize to nothing are skipped.
    """
    if not (len(labels) == len(paragraph_ids) == len(texts)):
        raise ValueError("labels, paragraph ids, and texts must align")
    lexicon = pos_lexicon if pos_lexicon is not None else {}
    members: dict[int, list[int]] = {}
    for i, label in enumerate(labels):
        if label >= 0:
            members.setdefault(int(label), []).append(i)

    clusters = []
    for cluster_id in sorted(members):
        rows = members[cluster_id]
        cluster_texts = [texts[i] for i in rows]
        try:
            keywords = lda_keywords(cluster_texts, lda_params, top_n, stopwords)
            label_words = label_cluster(cluster_texts, lexicon, stopwords)
        except EmptyClusterError:
            continue
        clusters.append(
            TopicCluster(
                cluster_id=cluster_id,
                language=language,
                member_paragraphs=[paragraph_ids[i] for i in rows],
                label_words=label_words,
                keywords=keywords,
            )
        )
    return clusters


# ---------------------------------------------------------------------------
# Cluster report: one row per cluster with label, keywords, and kept flag.

def write_cluster_report(clusters: Sequence[TopicCluster], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write("cluster_id\tlanguage\tsize\tlabel\tkeywords\tkept\tdrop_reason\n")
        for c in clusters:
            keywords = ",".join(f"{w}:{weight:.6f}" for w, weight in c.keywords)
            f.write(
                "\t".join(
                    [
                        str(c.cluster_id),
                        c.language.value,
                        str(len(c.member_paragraphs)),
                        " ".join(c.label_words),
                        keywords,
                        "1" if c.kept else "0",
                        c.drop_reason or "",
                    ]
                )
                + "\n"
            )


def clusters_to_json(clusters: Sequence[TopicCluster]) -> list[dict]:
    return [
        {
            "cluster_id": c.cluster_id,
            "language": c.language.value,
            "member_paragraphs": c.member_paragraphs,
            "label_words": c.label_words,
            "keywords": [[w, weight] for w, weight in c.keywords],
            "kept": c.kept,
            "drop_reason": c.drop_reason,
        }
        for c in clusters
    ]


def clusters_from_json(records: list[dict]) -> list[TopicCluster]:
    return [
        TopicCluster(
            cluster_id=r["cluster_id"],
            language=Language(r["language"]),
            member_paragraphs=list(r["member_paragraphs"]),
            label_words=list(r["label_words"]),
            keywords=[(w, float(weight)) for w, weight in r["keywords"]],
            kept=r["kept"],
            drop_reason=r.get("drop_reason"),
        )
        for r in records
    ]
