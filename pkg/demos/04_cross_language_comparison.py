"""
Comparing the two language corpora: common topics, pockets, jargon
==================================================================

Every Russian cluster is scored against every English cluster on top-20
keyword overlap. Scores above 0.35 mark common topics; a cluster scoring
under 0.2 against the entire other side is a pocket of knowledge. Keywords
missing from the known glossaries become jargon candidates.
"""

from forumlens import compare_all, extract_jargon
from forumlens.ingest import Language
from forumlens.topics import TopicCluster


def make(cluster_id, language, words):
    weights = [(len(words) - i) / 100 for i in range(len(words))]
    return TopicCluster(
        cluster_id=cluster_id, language=language,
        member_paragraphs=[f"{language.value}:{cluster_id}"],
        label_words=words[:2], keywords=list(zip(words, weights)),
    )


sms = [f"sms{i}" for i in range(12)]
bios = [f"bios{i}" for i in range(12)]
locks = [f"lock{i}" for i in range(20)]

russian = [
    make(0, Language.RUSSIAN, sms + ["spam"] * 0 + [f"ru{i}" for i in range(8)]),
    make(1, Language.RUSSIAN, bios + [f"rb{i}" for i in range(8)]),
    make(2, Language.RUSSIAN, locks),  # lock picking: discussed only in Russian
]
english = [
    make(0, Language.ENGLISH, sms + [f"en{i}" for i in range(8)]),
    make(1, Language.ENGLISH, bios + [f"eb{i}" for i in range(8)]),
]

report = compare_all(russian, english)
print("pair scores:")
for record in report.records:
    print(f"  ru:{record.russian_cluster_id} vs en:{record.english_cluster_id} "
          f"score={record.score:.2f} {record.level.value}")

print(f"\ncommon topics: {report.common_topics}")
print(f"unique russian (pockets of knowledge): {report.unique_russian}")
print(f"unique english: {report.unique_english}")

# Histogram buckets land on the 0.05 grid because binary 20-word vectors
# only produce multiples of 1/20.
print("\nhistogram bucket -> (pairs, ru clusters at max, en clusters at max):")
for bucket, row in sorted(report.histogram.items(), reverse=True):
    print(f"  {bucket:.2f} -> {row}")

# Jargon: keywords absent from every glossary, with cluster context. Plain
# words stay in (a homonym like "rat" can be jargon), known terms drop out.
glossary = {w for w in sms[:6]}
candidates = extract_jargon(russian + english, [glossary])
print(f"\njargon candidates: {len(candidates)} (glossary removed {len(glossary)})")
print("first three:", [c.term for c in candidates[:3]])
