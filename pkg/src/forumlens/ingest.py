"""Forum post ingestion: paragraph splitting, language routing, and noise filtering.

Posts are split on newlines into paragraphs, each paragraph is routed to the
English or Russian sub-corpus by a pluggable language detector, and two
filters drop non-conversational text (code, logs, formatting debris) and
fragments too short to carry topical signal. Thread headlines are always
kept because they usually summarize the topic.
"""

from __future__ import annotations

import json
import logging
from collections.abc import Callable, Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

logger = logging.getLogger(__name__)

# Default filter constants. Tunable per run through the pipeline config.
NOISE_SYMBOL_RATIO = 0.12
SHORT_TEXT_MAX_SPACES = 5
SHORT_TEXT_MAX_CHARS = 30


class Language(Enum):
    ENGLISH = "en"
    RUSSIAN = "ru"
    OTHER = "other"


class EmptyCorpusError(ValueError):
    pass


@dataclass(frozen=True)
class RawPost:
    """One forum post. Only position-0 posts carry the thread headline."""

    thread_id: str
    post_id: str
    author_id: str
    position: int
    body: str
    headline: str | None = None
    timestamp: float | None = None

    def __post_init__(self) -> None:
        if self.position < 0:
            raise ValueError(f"position must be >= 0, got {self.position}")
        if (self.position == 0) != (self.headline is not None):
            raise ValueError("headline must be present exactly when position == 0")
        if self.headline is not None and not self.headline:
            raise ValueError("headline must be non-empty when present")


@dataclass
class Paragraph:
    """A language-homogeneous text fragment of a post, with provenance."""

    thread_id: str
    post_id: str
    author_id: str
    post_position: int
    index_in_post: int
    text: str
    language: Language = Language.OTHER
    is_headline: bool = False
    translated_text: str | None = None

    @property
    def paragraph_id(self) -> str:
        return f"{self.thread_id}:{self.post_id}:{self.index_in_post}"

    def analysis_text(self) -> str:
        """Text used by embedding and topic modeling: the translation for
        Russian paragraphs, the original otherwise."""
        if self.language is Language.RUSSIAN:
            if self.translated_text is None:
                raise ValueError(
                    f"paragraph {self.paragraph_id} is Russian but has no translation"
                )
            return self.translated_text
        return self.text


@dataclass(frozen=True)
class CorpusStats:
    paragraph_count: int
    thread_count: int
    author_count: int
    bilingual_author_count: int
    per_language_counts: dict[Language, int]

    def __post_init__(self) -> None:
        if self.bilingual_author_count > self.author_count:
            raise ValueError("bilingual authors cannot exceed total authors")
        if sum(self.per_language_counts.values()) != self.paragraph_count:
            raise ValueError("per-language counts do not sum to paragraph count")


Detector = Callable[[str], Language]
# Translators take (text, source_language_code) and return the translated text.
Translator = Callable[[str, str], str]


def split_paragraphs(post: RawPost) -> list[Paragraph]:
    """Split a post into newline-delimited paragraphs, headline first.

    Whitespace-only lines are dropped; surviving lines are kept verbatim so
    that joining the non-headline output with newlines reproduces the
    non-empty lines of the body.
    """
    paragraphs: list[Paragraph] = []
    index = 0
    if post.headline is not None:
        paragraphs.append(
            Paragraph(
                thread_id=post.thread_id,
                post_id=post.post_id,
                author_id=post.author_id,
                post_position=post.position,
                index_in_post=index,
                text=post.headline,
                is_headline=True,
            )
        )
        index += 1
    for line in post.body.split("\n"):
        if not line.strip():
            continue
        paragraphs.append(
            Paragraph(
                thread_id=post.thread_id,
                post_id=post.post_id,
                author_id=post.author_id,
                post_position=post.position,
                index_in_post=index,
                text=line,
            )
        )
        index += 1
    return paragraphs


def _is_cyrillic(ch: str) -> bool:
    return "Ѐ" <= ch <= "ӿ" or "Ԁ" <= ch <= "ԯ"


def _is_latin(ch: str) -> bool:
    if "a" <= ch <= "z" or "A" <= ch <= "Z":
        return True
    # Latin-1 supplement and Latin Extended-A/B letters.
    return "À" <= ch <= "ɏ" and ch.isalpha()


def detect_language(text: str) -> Language:
    """Rule-based detector: majority script among letters decides the language.

    Returns Russian when more than half of the letters are Cyrillic, English
    when more than half are Latin, and Other when neither dominates or the
    text has no letters. Deployments with a real language-identification
    service can pass their own detector to build_corpus.
    """
    letters = cyrillic = latin = 0
    for ch in text:
        if not ch.isalpha():
            continue
        letters += 1
        if _is_cyrillic(ch):
            cyrillic += 1
        elif _is_latin(ch):
            latin += 1
    if letters == 0:
        return Language.OTHER
    if cyrillic * 2 > letters:
        return Language.RUSSIAN
    if latin * 2 > letters:
        return Language.ENGLISH
    return Language.OTHER


def is_nonconversational(text: str, symbol_ratio: float = NOISE_SYMBOL_RATIO) -> bool:
    """True when the share of symbol characters among non-whitespace characters
    exceeds the threshold.

    Symbol characters are those that are neither alphanumeric (any script,
    including Cyrillic) nor whitespace. Code snippets, logs, and ASCII-art
    formatting all sit well above the default 12% threshold; prose sits below.
    """
    non_ws = 0
    symbols = 0
    for ch in text:
        if ch.isspace():
            continue
        non_ws += 1
        if not ch.isalnum():
            symbols += 1
    if non_ws == 0:
        return False
    return symbols > symbol_ratio * non_ws


def is_too_short(
    paragraph: Paragraph,
    max_spaces: int = SHORT_TEXT_MAX_SPACES,
    max_chars: int = SHORT_TEXT_MAX_CHARS,
) -> bool:
    """True for fragments with fewer than five spaces and thirty characters.

    Headlines are exempt: they describe the thread topic and are kept no
    matter how short.
    """
    if paragraph.is_headline:
        return False
    text = paragraph.text
    return text.count(" ") < max_spaces and len(text) < max_chars


def identity_translator(text: str, source_language: str) -> str:
    return text


def build_corpus(
    posts: Iterable[RawPost],
    detector: Detector = detect_language,
    translator: Translator = identity_translator,
    symbol_ratio: float = NOISE_SYMBOL_RATIO,
    max_spaces: int = SHORT_TEXT_MAX_SPACES,
    max_chars: int = SHORT_TEXT_MAX_CHARS,
    translator_workers: int = 1,
) -> tuple[list[Paragraph], list[Paragraph], CorpusStats]:
    """Run the full preprocessing pass: split, detect, filter, translate.

    Returns the English corpus, the Russian corpus (with translated_text
    filled), and corpus statistics over the surviving paragraphs. Paragraphs
    whose language is neither English nor Russian are dropped, as are noisy
    and too-short fragments. A translator failure drops the paragraph and
    logs a warning; the rest of the batch proceeds.
    """
    english: list[Paragraph] = []
    russian: list[Paragraph] = []
    for post in posts:
        for paragraph in split_paragraphs(post):
            paragraph.language = detector(paragraph.text)
            if paragraph.language is Language.OTHER:
                continue
            if is_nonconversational(paragraph.text, symbol_ratio):
                continue
            if is_too_short(paragraph, max_spaces, max_chars):
                continue
            if paragraph.language is Language.ENGLISH:
                english.append(paragraph)
            else:
                russian.append(paragraph)

    russian = _translate_all(russian, translator, translator_workers)
    stats = _compute_stats(english, russian)
    return english, russian, stats


def _translate_all(
    russian: list[Paragraph], translator: Translator, workers: int
) -> list[Paragraph]:
    def attempt(paragraph: Paragraph) -> Paragraph | None:
        try:
            paragraph.translated_text = translator(paragraph.text, Language.RUSSIAN.value)
            return paragraph
        except Exception:
            logger.warning(
                "translation failed for paragraph %s; dropping",
                paragraph.paragraph_id,
                exc_info=True,
            )
            return None

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(attempt, russian))
    else:
        results = [attempt(p) for p in russian]
    return [p for p in results if p is not None]


def _compute_stats(
    english: Sequence[Paragraph], russian: Sequence[Paragraph]
) -> CorpusStats:
    threads = {p.thread_id for p in english} | {p.thread_id for p in russian}
    english_authors = {p.author_id for p in english}
    russian_authors = {p.author_id for p in russian}
    return CorpusStats(
        paragraph_count=len(english) + len(russian),
        thread_count=len(threads),
        author_count=len(english_authors | russian_authors),
        bilingual_author_count=len(english_authors & russian_authors),
        per_language_counts={
            Language.ENGLISH: len(english),
            Language.RUSSIAN: len(russian),
        },
    )


def compute_bilingual_fraction(stats: CorpusStats) -> float:
    """Fraction of authors who posted in both languages."""
    if stats.author_count == 0:
        raise EmptyCorpusError("corpus has no authors")
    return stats.bilingual_author_count / stats.author_count


# ---------------------------------------------------------------------------
# File formats: one JSON record per line, UTF-8.

def write_posts(posts: Iterable[RawPost], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for post in posts:
            record = {
                "thread_id": post.thread_id,
                "post_id": post.post_id,
                "author_id": post.author_id,
                "position": post.position,
                "headline": post.headline,
                "body": post.body,
                "timestamp": post.timestamp,
            }
            f.write(json.dumps(record, ensure_ascii=False, sort_keys=True) + "\n")


def read_posts(path: str | Path) -> list[RawPost]:
    posts = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            if not line.strip():
                continue
            record = json.loads(line)
            posts.append(
                RawPost(
                    thread_id=str(record["thread_id"]),
                    post_id=str(record["post_id"]),
                    author_id=str(record["author_id"]),
                    position=int(record["position"]),
                    body=record.get("body") or "",
                    headline=record.get("headline"),
                    timestamp=record.get("timestamp"),
                )
            )
    return posts


def write_paragraphs(paragraphs: Iterable[Paragraph], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for p in paragraphs:
            record = {
                "thread_id": p.thread_id,
                "post_id": p.post_id,
                "author_id": p.author_id,
                "post_position": p.post_position,
                "index_in_post": p.index_in_post,
                "text": p.text,
                "language": p.language.value,
                "is_headline": p.is_headline,
                "translated_text": p.translated_text,
            }
            f.write(json.dumps(record, ensure_ascii=False, sort_keys=True) + "\n")


def read_paragraphs(path: str | Path) -> list[Paragraph]:
    paragraphs = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            if not line.strip():
                continue
            record = json.loads(line)
            paragraphs.append(
                Paragraph(
                    thread_id=record["thread_id"],
                    post_id=record["post_id"],
                    author_id=record["author_id"],
                    post_position=record["post_position"],
                    index_in_post=record["index_in_post"],
                    text=record["text"],
                    language=Language(record["language"]),
                    is_headline=record["is_headline"],
                    translated_text=record.get("translated_text"),
                )
            )
    return paragraphs
