"""
Ingesting forum posts: splitting, language routing, noise filters
=================================================================

Posts arrive as raw bodies with newlines separating loosely related
fragments, often mixing English and Russian in one post. This walk-through
shows how a post becomes language-tagged paragraphs and what the two
filters remove.
"""

from forumlens import (
    RawPost,
    build_corpus,
    detect_language,
    is_nonconversational,
    split_paragraphs,
)

# A thread opener that mixes languages and includes a code fragment.
post = RawPost(
    thread_id="t1",
    post_id="p0",
    author_id="alice",
    position=0,
    headline="bypassing the corporate web filter",
    body=(
        "has anyone tried tunneling dns requests through the proxy here\n"
        "вот мой скрипт для туннеля он работает уже месяц\n"
        "for i in $(seq 1 255); do dig @10.0.0.$i example.com; done\n"
        "ping me"
    ),
)

print("paragraphs after newline splitting:")
for paragraph in split_paragraphs(post):
    flag = "headline" if paragraph.is_headline else f"line {paragraph.index_in_post}"
    print(f"  [{flag}] {paragraph.text}")

# The language detector routes by dominant script.
print("\nlanguage per paragraph:")
for paragraph in split_paragraphs(post):
    print(f"  {detect_language(paragraph.text).value:6s} {paragraph.text[:50]}")

# The symbol-density filter flags the shell one-liner but not the prose.
print("\nnoise filter:")
for paragraph in split_paragraphs(post):
    print(f"  {str(is_nonconversational(paragraph.text)):5s} {paragraph.text[:50]}")

# build_corpus runs the whole pass: split, detect, filter, translate.
# "ping me" is dropped as too short; the code line as non-conversational.
english, russian, stats = build_corpus([post])
print(f"\nsurviving: {len(english)} English, {len(russian)} Russian paragraphs")
print(f"stats: {stats}")
