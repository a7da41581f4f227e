"""forumlens: structure bilingual forum text into topic clusters, compare the
two language sub-corpora for common and unique topics, and surface candidate
jargon terms with their cluster context."""

__version__ = "0.1.0"

from .compare import (
    JargonCandidate,
    Relatedness,
    RelatednessReport,
    SimilarityRecord,
    classify,
    compare_all,
    extract_jargon,
    keyword_cosine,
)
from .density import (
    ClusterParams,
    Clustering,
    CondensedTree,
    cluster,
    core_distances,
    mutual_reachability,
)
from .embedding import (
    EmbeddingVector,
    ProviderConfig,
    ProviderKind,
    embed_batch,
    hash_embed,
    normalize,
)
from .ingest import (
    CorpusStats,
    Language,
    Paragraph,
    RawPost,
    build_corpus,
    compute_bilingual_fraction,
    detect_language,
    is_nonconversational,
    is_too_short,
    split_paragraphs,
)
from .metrics import ModelRunSummary, adjusted_rand_index, compare_models, rand_index
from .synth import GroundTruth, SynthSpec, TopicKind, generate
from .topics import (
    EnrichedDictionary,
    LdaParams,
    TopicCluster,
    filter_clusters,
    label_cluster,
    lda_keywords,
    sample_for_review,
    tokenize,
)
