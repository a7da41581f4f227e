"""Seeded synthetic bilingual forum corpora with planted topic structure.

Every topic owns a disjoint core vocabulary drawn from the shipped
dictionary; documents are token bags mixing core and shared background
words. Shared topics emit documents into both language corpora; the Russian
side uses per-letter Cyrillic transliterations of the same vocabulary, and
the emitted translation table maps those tokens back, so the word-for-word
translator restores comparable English text. Planted jargon terms are
injected into their host topics at boosted frequency, and code-like noise
paragraphs with symbol density above the ingest threshold can be mixed in.
"""

from __future__ import annotations

import json
import random
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .ingest import RawPost
from .topics import load_stopwords
from importlib import resources


class TopicKind(Enum):
    SHARED = "shared"
    UNIQUE_RUSSIAN = "unique_russian"
    UNIQUE_ENGLISH = "unique_english"


@dataclass(frozen=True)
class SynthSpec:
    shared_topic_count: int
    unique_russian_count: int = 0
    unique_english_count: int = 0
    docs_per_topic: int = 100
    vocab_per_topic: int = 20
    jargon_terms: Mapping[str, int] = field(default_factory=dict)  # term -> host topic
    noise_fraction: float = 0.0
    seed: int = 0
    background_vocab_size: int = 40

    def __post_init__(self) -> None:
        counts = (
            self.shared_topic_count,
            self.unique_russian_count,
            self.unique_english_count,
            self.docs_per_topic,
            self.vocab_per_topic,
        )
        if any(c < 0 for c in counts):
            raise ValueError("counts must be non-negative")
        if self.topic_count() < 1:
            raise ValueError("need at least one topic")
        if not 0.0 <= self.noise_fraction < 1.0:
            raise ValueError("noise_fraction must lie in [0, 1)")
        for term, host in self.jargon_terms.items():
            if not 0 <= host < self.topic_count():
                raise ValueError(f"jargon term {term!r} names undefined host topic {host}")

    def topic_count(self) -> int:
        return self.shared_topic_count + self.unique_russian_count + self.unique_english_count


@dataclass
class GroundTruth:
    paragraph_topics: dict[str, int]  # paragraph id -> planted topic
    topic_kinds: dict[int, TopicKind]
    jargon_terms: dict[str, int]
    noise_paragraph_ids: set[str]
    topic_core_vocab: dict[int, list[str]]
    background_vocab: list[str]
    translation_table: dict[str, str]  # cyrillic token -> english token


# Injective per-letter transliteration into the Cyrillic block, so synthetic
# Russian tokens are detected as Russian and stay distinct word-for-word.
_CYRILLIC_OF = dict(
    zip(
        "abcdefghijklmnopqrstuvwxyz",
        "абцдефгхийклмнопщрстувшжыз",
    )
)


def to_cyrillic(word: str) -> str:
    return "".join(_CYRILLIC_OF.get(ch, ch) for ch in word)


def default_word_pool() -> list[str]:
    """Usable dictionary words: ASCII, three or more letters, not stop words."""
    text = resources.files("forumlens.data").joinpath("dictionary.txt").read_text("utf-8")
    stop = load_stopwords()
    pool = [
        w.strip()
        for w in text.splitlines()
        if len(w.strip()) >= 3 and w.strip().isascii() and w.strip().isalpha()
        and w.strip() not in stop
    ]
    return sorted(set(pool))


_NOISE_NAMES = ["buf", "ptr", "tmp", "idx", "val", "arg", "ctx", "len"]
_NOISE_TEMPLATES = [
    "{a}();",
    "{a}[{i}]={j};",
    "if({a}>{i}){{{b}--;}}",
    "${a}->{b}",
    "0x{i:x}{j:x}",
    "{a}={i}%{j};",
    "<{a}/>",
    "({a}&&{b})",
    "#{a}",
]


def _noise_line(rng: random.Random) -> str:
    parts = []
    for _ in range(rng.randint(3, 7)):
        template = rng.choice(_NOISE_TEMPLATES)
        parts.append(
            template.format(
                a=rng.choice(_NOISE_NAMES) + str(rng.randint(0, 99)),
                b=rng.choice(_NOISE_NAMES),
                i=rng.randint(0, 255),
                j=rng.randint(1, 255),
            )
        )
    line = " ".join(parts)
    # The templates are symbol-heavy by construction; this is a guard rail.
    while not _symbol_ratio_above(line, 0.12):
        line += " {};"
    return line


def _symbol_ratio_above(text: str, ratio: float) -> bool:
    non_ws = sum(1 for ch in text if not ch.isspace())
    symbols = sum(1 for ch in text if not ch.isspace() and not ch.isalnum())
    return non_ws > 0 and symbols > ratio * non_ws


class _Emitter:
    def __init__(self, spec: SynthSpec, rng: random.Random):
        self.spec = spec
        self.rng = rng
        self.posts: list[RawPost] = []
        self.truth_topics: dict[str, int] = {}
        self.noise_ids: set[str] = set()
        self.thread_seq = 0
        self.authors = {
            "en": [f"en{i}" for i in range(30)],
            "ru": [f"ru{i}" for i in range(30)],
            "bi": [f"bi{i}" for i in range(8)],
        }

    def _author(self, lang: str) -> str:
        if self.rng.random() < 0.15:
            return self.rng.choice(self.authors["bi"])
        return self.rng.choice(self.authors[lang])

    def emit_document(
        self, topic: int, lang: str, core: list[str], background: list[str], jargon: list[str]
    ) -> None:
        rng = self.rng
        headline_tokens = [rng.choice(core) for _ in range(rng.randint(12, 20))]
        body_len = rng.randint(20, 60)
        body_tokens = [
            rng.choice(core) if rng.random() < 0.7 else rng.choice(background)
            for _ in range(body_len)
        ]
        for term in jargon:
            body_tokens.extend([term] * 3)
        rng.shuffle(body_tokens)
        if rng.random() < 0.3:
            body_tokens.append(".")

        if lang == "ru":
            headline_tokens = [to_cyrillic(t) for t in headline_tokens]
            body_tokens = [to_cyrillic(t) for t in body_tokens]

        thread_id = f"t{self.thread_seq}"
        self.thread_seq += 1
        post = RawPost(
            thread_id=thread_id,
            post_id="p0",
            author_id=self._author(lang),
            position=0,
            headline=" ".join(headline_tokens),
            body=" ".join(body_tokens),
            timestamp=float(self.thread_seq),
        )
        self.posts.append(post)
        self.truth_topics[f"{thread_id}:p0:0"] = topic
        self.truth_topics[f"{thread_id}:p0:1"] = topic

        # Interleave noise so that roughly noise_fraction of all paragraphs
        # are code-like; two content paragraphs were just emitted.
        f = self.spec.noise_fraction
        if f > 0:
            p = f / (1.0 - f)
            noise_position = 1
            for _ in range(2):
                if rng.random() < p:
                    noise_post = RawPost(
                        thread_id=thread_id,
                        post_id=f"p{noise_position}",
                        author_id=self._author(lang),
                        position=noise_position,
                        body=_noise_line(rng),
                    )
                    self.posts.append(noise_post)
                    self.noise_ids.add(f"{thread_id}:p{noise_position}:0")
                    noise_position += 1


def generate(
    spec: SynthSpec, word_pool: Sequence[str] | None = None
) -> tuple[list[RawPost], GroundTruth]:
    """Build the corpus and its ground truth; fully deterministic per seed."""
    pool = list(word_pool) if word_pool is not None else default_word_pool()
    needed = spec.topic_count() * spec.vocab_per_topic + spec.background_vocab_size
    if len(pool) < needed:
        raise ValueError(f"word pool has {len(pool)} words, need {needed}")
    for term in spec.jargon_terms:
        if term in pool:
            raise ValueError(f"jargon term {term!r} collides with the word pool")

    rng = random.Random(spec.seed)
    chosen = rng.sample(sorted(pool), needed)
    core_vocab = {
        t: sorted(chosen[t * spec.vocab_per_topic:(t + 1) * spec.vocab_per_topic])
        for t in range(spec.topic_count())
    }
    background = sorted(chosen[spec.topic_count() * spec.vocab_per_topic:])

    kinds: dict[int, TopicKind] = {}
    for t in range(spec.topic_count()):
        if t < spec.shared_topic_count:
            kinds[t] = TopicKind.SHARED
        elif t < spec.shared_topic_count + spec.unique_russian_count:
            kinds[t] = TopicKind.UNIQUE_RUSSIAN
        else:
            kinds[t] = TopicKind.UNIQUE_ENGLISH

    jargon_by_topic: dict[int, list[str]] = {}
    for term, host in sorted(spec.jargon_terms.items()):
        jargon_by_topic.setdefault(host, []).append(term)

    emitter = _Emitter(spec, rng)
    for t in range(spec.topic_count()):
        jargon = jargon_by_topic.get(t, [])
        for _ in range(spec.docs_per_topic):
            if kinds[t] in (TopicKind.SHARED, TopicKind.UNIQUE_ENGLISH):
                emitter.emit_document(t, "en", core_vocab[t], background, jargon)
            if kinds[t] in (TopicKind.SHARED, TopicKind.UNIQUE_RUSSIAN):
                emitter.emit_document(t, "ru", core_vocab[t], background, jargon)

    english_vocab = set(background)
    for words in core_vocab.values():
        english_vocab.update(words)
    english_vocab.update(spec.jargon_terms)
    table = {to_cyrillic(w): w for w in sorted(english_vocab)}

    truth = GroundTruth(
        paragraph_topics=emitter.truth_topics,
        topic_kinds=kinds,
        jargon_terms=dict(spec.jargon_terms),
        noise_paragraph_ids=emitter.noise_ids,
        topic_core_vocab=core_vocab,
        background_vocab=background,
        translation_table=table,
    )
    return emitter.posts, truth


# ---------------------------------------------------------------------------
# Sidecar files

def write_truth(truth: GroundTruth, path: str | Path) -> None:
    payload = {
        "paragraph_topics": truth.paragraph_topics,
        "topic_kinds": {str(t): k.value for t, k in truth.topic_kinds.items()},
        "jargon_terms": truth.jargon_terms,
        "noise_paragraph_ids": sorted(truth.noise_paragraph_ids),
        "topic_core_vocab": {str(t): words for t, words in truth.topic_core_vocab.items()},
        "background_vocab": truth.background_vocab,
        "translation_table": truth.translation_table,
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, ensure_ascii=False, indent=2, sort_keys=True)
        f.write("\n")


def read_truth(path: str | Path) -> GroundTruth:
    with open(path, encoding="utf-8") as f:
        payload = json.load(f)
    return GroundTruth(
        paragraph_topics={k: int(v) for k, v in payload["paragraph_topics"].items()},
        topic_kinds={int(t): TopicKind(k) for t, k in payload["topic_kinds"].items()},
        jargon_terms={k: int(v) for k, v in payload["jargon_terms"].items()},
        noise_paragraph_ids=set(payload["noise_paragraph_ids"]),
        topic_core_vocab={int(t): list(w) for t, w in payload["topic_core_vocab"].items()},
        background_vocab=list(payload["background_vocab"]),
        translation_table=dict(payload["translation_table"]),
    )


def write_translation_table(table: Mapping[str, str], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for source in sorted(table):
            f.write(f"{source}\t{table[source]}\n")


def write_glossary(terms: Sequence[str], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for term in sorted(set(t.lower() for t in terms)):
            f.write(term + "\n")
