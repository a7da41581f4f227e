import logging

import pytest
from hypothesis import given, strategies as st

from forumlens.ingest import (
    CorpusStats,
    EmptyCorpusError,
    Language,
    Paragraph,
    RawPost,
    build_corpus,
    compute_bilingual_fraction,
    detect_language,
    is_nonconversational,
    is_too_short,
    read_posts,
    split_paragraphs,
    write_posts,
)
from forumlens.translate import TableTranslator


def post(body="", headline=None, position=0, thread="t1", pid="p1", author="a1"):
    if position == 0 and headline is None:
        headline = "a headline"
    return RawPost(
        thread_id=thread,
        post_id=pid,
        author_id=author,
        position=position,
        body=body,
        headline=headline,
    )


def para(text, headline=False):
    return Paragraph(
        thread_id="t",
        post_id="p",
        author_id="a",
        post_position=0 if headline else 1,
        index_in_post=0,
        text=text,
        is_headline=headline,
    )


class TestSplitParagraphs:
    def test_headline_then_body_lines(self):
        parts = split_paragraphs(post(body="a\n\nb", headline="t"))
        assert [p.text for p in parts] == ["t", "a", "b"]
        assert [p.is_headline for p in parts] == [True, False, False]

    def test_empty_body_keeps_headline(self):
        parts = split_paragraphs(post(body="", headline="t"))
        assert [p.text for p in parts] == ["t"]
        assert parts[0].is_headline

    def test_no_headline(self):
        parts = split_paragraphs(post(body="line1\nline2", position=1))
        assert [p.text for p in parts] == ["line1", "line2"]
        assert not any(p.is_headline for p in parts)

    def test_indices_are_sequential(self):
        parts = split_paragraphs(post(body="a\nb\nc", headline="h"))
        assert [p.index_in_post for p in parts] == [0, 1, 2, 3]

    @given(st.text(alphabet=st.characters(blacklist_categories=("Cs",)), max_size=300))
    def test_split_is_lossless_modulo_empty_lines(self, body):
        parts = split_paragraphs(post(body=body, position=1))
        expected = [line for line in body.split("\n") if line.strip()]
        assert [p.text for p in parts] == expected


class TestRawPostInvariants:
    def test_headline_required_at_position_zero(self):
        with pytest.raises(ValueError):
            RawPost("t", "p", "a", 0, body="x", headline=None)

    def test_headline_forbidden_later(self):
        with pytest.raises(ValueError):
            RawPost("t", "p", "a", 1, body="x", headline="h")

    def test_negative_position(self):
        with pytest.raises(ValueError):
            RawPost("t", "p", "a", -1, body="x", headline="h")


class TestDetectLanguage:
    def test_cyrillic(self):
        assert detect_language("Привет мир") is Language.RUSSIAN

    def test_latin(self):
        assert detect_language("hello world") is Language.ENGLISH

    def test_no_letters(self):
        assert detect_language("12345 !!!") is Language.OTHER

    def test_balanced_mix_is_other(self):
        assert detect_language("abcd абвг") is Language.OTHER

    def test_majority_wins(self):
        assert detect_language("сервер down») again сервер сбой") is Language.RUSSIAN


class TestNoiseFilter:
    def test_code_snippet_fires(self):
        # 5 symbol characters of 19 non-whitespace: 26.3% > 12%
        assert is_nonconversational("int main() { return 0; }")

    def test_plain_sentence_does_not_fire(self):
        assert not is_nonconversational("this is a normal sentence")

    def test_boundary_is_strict(self):
        text = "a" * 88 + "!" * 12  # exactly 12 of 100
        assert not is_nonconversational(text)
        assert is_nonconversational("a" * 87 + "!" * 13)

    def test_cyrillic_counts_as_alphanumeric(self):
        assert not is_nonconversational("привет это обычный текст без шума")

    def test_whitespace_only_is_clean(self):
        assert not is_nonconversational("   \t  ")

    @given(st.text(min_size=1, max_size=200))
    def test_matches_direct_count(self, text):
        non_ws = sum(1 for c in text if not c.isspace())
        symbols = sum(1 for c in text if not c.isspace() and not c.isalnum())
        expected = non_ws > 0 and symbols > 0.12 * non_ws
        assert is_nonconversational(text) == expected


class TestShortFilter:
    def test_short_fragment(self):
        assert is_too_short(para("good news:"))

    def test_headline_always_kept(self):
        assert not is_too_short(para("no-ip", headline=True))

    def test_long_enough_by_characters(self):
        text = "xxxxxxxxxxxxxxxxxxx y zzzzzzzzzzzzzzzzzzzz"  # 2 spaces, >= 30 chars
        assert len(text) >= 30 and text.count(" ") == 2
        assert not is_too_short(para(text))

    def test_enough_spaces(self):
        assert not is_too_short(para("a b c d e f"))

    @given(st.text(max_size=120))
    def test_filters_commute(self, text):
        # both filters are pure predicates on the text, so order cannot matter
        p = para(text or "x")
        first = is_nonconversational(p.text) or is_too_short(p)
        second = is_too_short(p) or is_nonconversational(p.text)
        assert first == second


def bilingual_posts():
    return [
        RawPost(
            "t1", "p0", "alice", 0,
            headline="SQL injection help needed on this forum",
            body=(
                "how can i bypass the WAF rules on this host\n"
                "как я могу обойти правила WAF на этом хосте"
            ),
        ),
        RawPost(
            "t2", "p0", "bob", 0,
            headline="universal answer thread for everyone",
            body="for (int i = 0; i < n; i++) { sum += arr[i]; }",
        ),
    ]


class TestBuildCorpus:
    def test_routing_by_language(self):
        english, russian, stats = build_corpus(bilingual_posts()[:1])
        assert [p.text for p in english] == [
            "SQL injection help needed on this forum",
            "how can i bypass the WAF rules on this host",
        ]
        assert len(russian) == 1
        assert russian[0].translated_text == russian[0].text  # identity translator

    def test_code_body_leaves_only_headline(self):
        english, russian, _ = build_corpus([bilingual_posts()[1]])
        assert [p.text for p in english] == ["universal answer thread for everyone"]
        assert russian == []

    def test_bilingual_author_counted(self):
        _, _, stats = build_corpus(bilingual_posts())
        assert stats.bilingual_author_count == 1
        assert stats.author_count == 2

    def test_other_language_dropped(self):
        posts = [post(body="12345 67890 !!!!! 00000 11111 22222", position=1)]
        english, russian, stats = build_corpus(posts)
        assert english == [] and russian == []
        assert stats.paragraph_count == 0

    def test_translator_failure_drops_and_continues(self, caplog):
        def flaky(text, lang):
            if "обойти" in text:
                raise RuntimeError("boom")
            return text

        posts = [
            RawPost(
                "t1", "p0", "a", 0,
                headline="two russian paragraphs inside here",
                body=(
                    "как я могу обойти правила WAF на этом хосте\n"
                    "куда мне писать про оплату сервера каждый месяц"
                ),
            )
        ]
        with caplog.at_level(logging.WARNING):
            _, russian, _ = build_corpus(posts, translator=flaky)
        assert len(russian) == 1
        assert "translation failed" in caplog.text

    def test_corpora_have_consistent_languages(self):
        english, russian, _ = build_corpus(bilingual_posts())
        assert all(p.language is Language.ENGLISH for p in english)
        assert all(p.language is Language.RUSSIAN for p in russian)

    def test_table_translator_applied(self):
        table = TableTranslator({"привет": "hello", "мир": "world"})
        posts = [
            RawPost(
                "t1", "p0", "a", 0,
                headline="greeting thread for new members here",
                body="привет мир привет мир привет мир",
            )
        ]
        _, russian, _ = build_corpus(posts, translator=table)
        assert russian[0].translated_text == "hello world hello world hello world"

    def test_concurrent_translation_matches_sequential(self):
        posts = bilingual_posts()
        _, seq, _ = build_corpus(posts)
        _, conc, _ = build_corpus(posts, translator_workers=4)
        assert [p.paragraph_id for p in seq] == [p.paragraph_id for p in conc]
        assert [p.translated_text for p in seq] == [p.translated_text for p in conc]


class TestStats:
    def test_bilingual_fraction(self):
        stats = CorpusStats(
            paragraph_count=2,
            thread_count=1,
            author_count=22_917,
            bilingual_author_count=6_975,
            per_language_counts={Language.ENGLISH: 1, Language.RUSSIAN: 1},
        )
        assert compute_bilingual_fraction(stats) == pytest.approx(0.3044, abs=5e-5)

    def test_zero_bilingual(self):
        stats = CorpusStats(1, 1, 10, 0, {Language.ENGLISH: 1, Language.RUSSIAN: 0})
        assert compute_bilingual_fraction(stats) == 0.0

    def test_all_bilingual(self):
        stats = CorpusStats(4, 1, 4, 4, {Language.ENGLISH: 2, Language.RUSSIAN: 2})
        assert compute_bilingual_fraction(stats) == 1.0

    def test_empty_corpus_errors(self):
        stats = CorpusStats(0, 0, 0, 0, {Language.ENGLISH: 0, Language.RUSSIAN: 0})
        with pytest.raises(EmptyCorpusError):
            compute_bilingual_fraction(stats)

    def test_invariants_enforced(self):
        with pytest.raises(ValueError):
            CorpusStats(1, 1, 2, 3, {Language.ENGLISH: 1, Language.RUSSIAN: 0})
        with pytest.raises(ValueError):
            CorpusStats(5, 1, 2, 0, {Language.ENGLISH: 1, Language.RUSSIAN: 0})


def test_posts_round_trip(tmp_path):
    posts = bilingual_posts() + [post(body="реплай в треде без заголовка вообще", position=3, pid="p3")]
    path = tmp_path / "posts.jsonl"
    write_posts(posts, path)
    assert read_posts(path) == posts
