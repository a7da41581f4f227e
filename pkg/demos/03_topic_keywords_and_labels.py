"""
Representing a cluster: keywords, labels, dictionary filtering
==============================================================

Once paragraphs are grouped, each cluster gets twenty smoothed
term-distribution keywords and a short label (verb, the noun it acts on,
two more nouns). Clusters whose vocabulary an enriched dictionary cannot
recognize are flagged as formatting debris and dropped.
"""

from forumlens import LdaParams, lda_keywords, label_cluster, filter_clusters
from forumlens.ingest import Language
from forumlens.topics import (
    TopicCluster,
    load_default_dictionary,
    load_pos_lexicon,
    load_stopwords,
)

cluster_texts = [
    "log every keyboard event and send the password file",
    "my keylogger cannot log the keyboard layout switch",
    "log keyboard input to steal a password",
    "password capture works but the log file grows fast",
]

stopwords = load_stopwords()
lexicon = load_pos_lexicon()

# With one topic the keyword weights have a closed form: smoothed relative
# frequency. The ranking is exactly the term-frequency ranking.
keywords = lda_keywords(cluster_texts, LdaParams(beta=0.01), top_n=20, stopwords=stopwords)
print("top keywords:")
for word, weight in keywords[:8]:
    print(f"  {word:10s} {weight:.4f}")

label = label_cluster(cluster_texts, lexicon, stopwords)
print(f"\nlabel: {label}")

# Dictionary filtering keeps this cluster (its words are ordinary English
# and IT vocabulary), but a cluster of base64 junk would be dropped.
dictionary = load_default_dictionary()
good = TopicCluster(
    cluster_id=0, language=Language.ENGLISH, member_paragraphs=["t:p:0"],
    label_words=label, keywords=keywords,
)
junk = TopicCluster(
    cluster_id=1, language=Language.ENGLISH, member_paragraphs=["t:p:1"],
    label_words=["qxzv", "hjkw"], keywords=[(f"zz{i}qx", 0.05) for i in range(20)],
)
for c in filter_clusters([good, junk], dictionary):
    print(f"cluster {c.cluster_id}: kept={c.kept} reason={c.drop_reason}")
