"""Stage-wise pipeline driver with content-hashed, resumable artifacts.

Each subcommand runs one stage (synth, ingest, embed, cluster, represent,
compare, jargon, eval, report), reading only the previous stages' artifact
files plus the config. A stage whose manifest already matches the current
config and inputs is skipped; a mismatch demands --force. One run owns its
output directory exclusively via a lock file.

Exit codes: 0 success, 2 usage/config error, 3 missing dependency stage,
4 provider or remote failure, 1 other pipeline errors.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from contextlib import contextmanager
from pathlib import Path

from . import __version__
from .compare import (
    classify,
    compare_all,
    extract_jargon,
    load_glossary,
    write_histogram,
    write_jargon_table,
    write_pair_table,
    write_summary,
)
from .config import ConfigError, PipelineConfig, load_config, parse_provider_spec
from .density import (
    ClusterParams,
    cluster,
    read_clustering,
    write_clustering,
    write_condensed_tree,
)
from .embedding import (
    EmbeddingVector,
    MissingVectorsError,
    RemoteProviderError,
    embed_batch,
    normalize,
    read_vectors,
    write_vectors,
)
from .ingest import (
    Language,
    build_corpus,
    read_paragraphs,
    read_posts,
    write_paragraphs,
    write_posts,
)
from .metrics import compare_models, write_model_report
from .synth import (
    SynthSpec,
    generate,
    write_glossary,
    write_translation_table,
    write_truth,
)
from .topics import (
    EnrichedDictionary,
    LdaParams,
    clusters_from_json,
    clusters_to_json,
    filter_clusters,
    load_default_dictionary,
    load_pos_lexicon,
    load_stopwords,
    represent_clusters,
    sample_for_review,
    write_cluster_report,
)
from .translate import RemoteTranslationError

STAGES = (
    "ingest", "embed", "cluster", "represent", "compare", "jargon", "eval",
    "synth", "report",
)


class MissingStageError(RuntimeError):
    def __init__(self, stage: str, missing: Path):
        super().__init__(f"{stage} artifacts missing ({missing}); run '{stage}' first")
        self.stage = stage


class StaleArtifactsError(RuntimeError):
    pass


class PipelineError(RuntimeError):
    pass


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


@contextmanager
def _output_lock(out_dir: Path):
    out_dir.mkdir(parents=True, exist_ok=True)
    lock = out_dir / ".lock"
    try:
        fd = os.open(lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise ConfigError(
            f"output directory {out_dir} is locked by another run "
            f"(remove {lock} if that run crashed)"
        )
    try:
        os.write(fd, str(os.getpid()).encode())
        os.close(fd)
        yield
    finally:
        lock.unlink(missing_ok=True)


def _manifest_state(stage_dir: Path, config: PipelineConfig, inputs: list[Path], force: bool) -> str:
    """'run' or 'skip' for this stage, given existing artifacts."""
    manifest_path = stage_dir / "manifest.json"
    if not manifest_path.exists():
        return "run"
    if force:
        return "run"
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    current = {str(p): _sha256(p) for p in inputs}
    if manifest.get("config_hash") == config.content_hash() and manifest.get("input_hashes") == current:
        return "skip"
    raise StaleArtifactsError(
        f"existing artifacts in {stage_dir} were produced with a different "
        f"config or inputs; rerun with --force to overwrite"
    )


def _write_manifest(
    stage: str,
    stage_dir: Path,
    config: PipelineConfig,
    inputs: list[Path],
    wall_time: float,
    overrides: dict[str, object],
) -> None:
    manifest = {
        "stage": stage,
        "config_hash": config.content_hash(),
        "input_hashes": {str(p): _sha256(p) for p in inputs},
        "overrides": {k: ("" if v is None else v) for k, v in sorted(overrides.items())},
        "version": __version__,
        "wall_time_s": round(wall_time, 3),
        "completed_at": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
    }
    with open(stage_dir / "manifest.json", "w", encoding="utf-8") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")


def _require(stage: str, *paths: Path) -> list[Path]:
    for p in paths:
        if not p.exists():
            raise MissingStageError(stage, p)
    return list(paths)


# ---------------------------------------------------------------------------
# Stage bodies. Each returns the list of input files it consumed.

def _stage_synth(config: PipelineConfig, out: Path) -> list[Path]:
    spec = SynthSpec(
        shared_topic_count=config.synth_shared_topics,
        unique_russian_count=config.synth_unique_russian,
        unique_english_count=config.synth_unique_english,
        docs_per_topic=config.synth_docs_per_topic,
        vocab_per_topic=config.synth_vocab_per_topic,
        jargon_terms=config.synth_jargon_terms(),
        noise_fraction=config.synth_noise_fraction,
        seed=config.seed,
        background_vocab_size=config.synth_background_vocab,
    )
    posts, truth = generate(spec)
    stage = out / "synth"
    write_posts(posts, stage / "posts.jsonl")
    write_truth(truth, stage / "truth.json")
    write_translation_table(truth.translation_table, stage / "translation_table.tsv")
    decoys = truth.background_vocab[: max(1, len(truth.background_vocab) // 2)]
    write_glossary(decoys, stage / "glossary.txt")
    return []


def _input_posts_path(config: PipelineConfig, out: Path) -> Path:
    if config.input:
        return Path(config.input)
    return out / "synth" / "posts.jsonl"


def _stage_ingest(config: PipelineConfig, out: Path) -> list[Path]:
    posts_path = _input_posts_path(config, out)
    if not posts_path.exists():
        if config.input:
            raise ConfigError(f"input corpus not found: {posts_path}")
        raise MissingStageError("synth", posts_path)
    posts = read_posts(posts_path)
    translator = config.translator(out / "synth" / "translation_table.tsv")
    english, russian, stats = build_corpus(
        posts,
        translator=translator,
        symbol_ratio=config.noise_ratio,
        max_spaces=config.short_max_spaces,
        max_chars=config.short_max_chars,
    )
    stage = out / "ingest"
    write_paragraphs(english, stage / "english.jsonl")
    write_paragraphs(russian, stage / "russian.jsonl")
    payload = {
        "paragraph_count": stats.paragraph_count,
        "thread_count": stats.thread_count,
        "author_count": stats.author_count,
        "bilingual_author_count": stats.bilingual_author_count,
        "per_language_counts": {lang.value: c for lang, c in stats.per_language_counts.items()},
    }
    with open(stage / "stats.json", "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")
    return [posts_path]


def _stage_embed(config: PipelineConfig, out: Path) -> list[Path]:
    inputs = _require(
        "ingest", out / "ingest" / "english.jsonl", out / "ingest" / "russian.jsonl"
    )
    provider = config.provider_config()
    stage = out / "embed"
    for name in ("english", "russian"):
        paragraphs = read_paragraphs(out / "ingest" / f"{name}.jsonl")
        if not paragraphs:
            raise PipelineError(f"the {name} corpus is empty; nothing to embed")
        vectors = embed_batch(paragraphs, provider)
        vectors = [EmbeddingVector(normalize(v.values), v.paragraph_ref) for v in vectors]
        write_vectors(vectors, stage / f"{name}.vec")
    return inputs


def _stage_cluster(config: PipelineConfig, out: Path) -> list[Path]:
    inputs = _require(
        "embed", out / "embed" / "english.vec", out / "embed" / "russian.vec"
    )
    inputs += _require(
        "ingest", out / "ingest" / "english.jsonl", out / "ingest" / "russian.jsonl"
    )
    params = ClusterParams(
        min_cluster_size=config.min_cluster_size, min_samples=config.min_samples
    )
    stage = out / "cluster"
    for name in ("english", "russian"):
        paragraphs = read_paragraphs(out / "ingest" / f"{name}.jsonl")
        ids = [p.paragraph_id for p in paragraphs]
        _, table = read_vectors(out / "embed" / f"{name}.vec")
        missing = [pid for pid in ids if pid not in table]
        if missing:
            raise MissingVectorsError(missing)
        import numpy as np

        matrix = np.stack([table[pid] for pid in ids])
        result, tree = cluster(matrix, params)
        write_clustering(stage / f"{name}_labels.tsv", ids, result, params)
        write_condensed_tree(stage / f"{name}_tree.tsv", tree)
    return inputs


def _stage_represent(config: PipelineConfig, out: Path) -> list[Path]:
    inputs = _require(
        "cluster",
        out / "cluster" / "english_labels.tsv",
        out / "cluster" / "russian_labels.tsv",
    )
    inputs += _require(
        "ingest", out / "ingest" / "english.jsonl", out / "ingest" / "russian.jsonl"
    )
    stopwords = load_stopwords(config.stopwords)
    lexicon = load_pos_lexicon(config.pos_lexicon)
    dictionary = (
        EnrichedDictionary.from_file(config.dictionary)
        if config.dictionary
        else load_default_dictionary()
    )
    lda = LdaParams(
        topic_count=config.lda_topic_count,
        beta=config.lda_beta,
        alpha=config.lda_alpha,
        iterations=config.lda_iterations,
        seed=config.seed,
    )
    stage = out / "represent"
    for name, language in (("english", Language.ENGLISH), ("russian", Language.RUSSIAN)):
        paragraphs = {p.paragraph_id: p for p in read_paragraphs(out / "ingest" / f"{name}.jsonl")}
        ids, clustering = read_clustering(out / "cluster" / f"{name}_labels.tsv")
        texts = [paragraphs[pid].analysis_text() for pid in ids]
        clusters = represent_clusters(
            labels=clustering.labels,
            paragraph_ids=ids,
            texts=texts,
            language=language,
            lda_params=lda,
            top_n=config.top_n,
            stopwords=stopwords,
            pos_lexicon=lexicon,
        )
        clusters = filter_clusters(
            clusters, dictionary, float(config.keyword_recognition_fraction())
        )
        suffix = "en" if language is Language.ENGLISH else "ru"
        with open(stage / f"topics_{suffix}.json", "w", encoding="utf-8") as f:
            json.dump(clusters_to_json(clusters), f, indent=2, sort_keys=True)
            f.write("\n")
        write_cluster_report(clusters, stage / f"clusters_{suffix}.tsv")
    return inputs


def _load_topics(out: Path, suffix: str):
    path = out / "represent" / f"topics_{suffix}.json"
    records = json.loads(path.read_text(encoding="utf-8"))
    return clusters_from_json(records)


def _stage_compare(config: PipelineConfig, out: Path) -> list[Path]:
    inputs = _require(
        "represent",
        out / "represent" / "topics_en.json",
        out / "represent" / "topics_ru.json",
    )
    english = [c for c in _load_topics(out, "en") if c.kept]
    russian = [c for c in _load_topics(out, "ru") if c.kept]
    if not english or not russian:
        raise PipelineError("no kept clusters on one side; nothing to compare")
    report = compare_all(
        russian,
        english,
        highly=config.highly_related_fraction(),
        low=config.not_related_fraction(),
    )
    stage = out / "compare"
    write_pair_table(report, stage / "pairs.tsv")
    write_histogram(report, stage / "histogram.tsv")
    write_summary(report, stage / "summary.json")
    return inputs


def _stage_jargon(config: PipelineConfig, out: Path) -> list[Path]:
    inputs = _require(
        "represent",
        out / "represent" / "topics_en.json",
        out / "represent" / "topics_ru.json",
    )
    clusters = [c for c in _load_topics(out, "en") + _load_topics(out, "ru") if c.kept]
    glossary_paths = config.glossary_paths()
    if not glossary_paths:
        default = out / "synth" / "glossary.txt"
        if default.exists():
            glossary_paths = [default]
    glossaries = [load_glossary(p) for p in glossary_paths]
    inputs += glossary_paths
    candidates = extract_jargon(clusters, glossaries)
    stage = out / "jargon"
    write_jargon_table(candidates, stage / "jargon.tsv")
    payload = [
        {
            "term": c.term,
            "source_clusters": [list(pair) for pair in c.source_clusters],
            "context_keywords": list(c.context_keywords),
        }
        for c in candidates
    ]
    with open(stage / "jargon.json", "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")
    return inputs


def _stage_eval(config: PipelineConfig, out: Path) -> list[Path]:
    inputs = _require(
        "ingest", out / "ingest" / "english.jsonl", out / "ingest" / "russian.jsonl"
    )
    corpus = read_paragraphs(out / "ingest" / "english.jsonl") + read_paragraphs(
        out / "ingest" / "russian.jsonl"
    )
    specs = [s.strip() for s in config.eval_providers.split(",") if s.strip()]
    if specs:
        providers = {s: parse_provider_spec(s) for s in specs}
    else:
        providers = {"configured": config.provider_config()}
    params = ClusterParams(
        min_cluster_size=config.min_cluster_size, min_samples=config.min_samples
    )
    summaries = compare_models(corpus, providers, params, runs=config.eval_runs)
    write_model_report(summaries, out / "eval" / "model_report.tsv")
    return inputs


def _stage_report(config: PipelineConfig, out: Path) -> list[Path]:
    inputs = _require("compare", out / "compare" / "summary.json")
    inputs += _require(
        "represent",
        out / "represent" / "topics_en.json",
        out / "represent" / "topics_ru.json",
    )
    summary = json.loads((out / "compare" / "summary.json").read_text(encoding="utf-8"))
    english = {c.cluster_id: c for c in _load_topics(out, "en")}
    russian = {c.cluster_id: c for c in _load_topics(out, "ru")}

    lines: list[str] = []
    lines.append("Relatedness histogram (score buckets at 0.05)")
    lines.append("level\tscore\tpairs\tmax_score_russian\tmax_score_english")
    for bucket in sorted(summary["histogram"], key=float, reverse=True):
        pairs, ru_max, en_max = summary["histogram"][bucket]
        level = classify(
            float(bucket),
            float(config.highly_related_fraction()),
            float(config.not_related_fraction()),
        )
        lines.append(f"{level.value}\t{bucket}\t{pairs}\t{ru_max}\t{en_max}")
    lines.append("")

    common = summary["common_topics"]
    if not common:
        lines.append("no common topics")
    else:
        lines.append(f"Common topics: {len(common)} pairs")
        for ru_id, en_id in common:
            rc, ec = russian[ru_id], english[en_id]
            lines.append(
                f"  ru:{ru_id} [{' '.join(rc.label_words)}] <-> en:{en_id} [{' '.join(ec.label_words)}]"
            )
            lines.append(f"    ru keywords: {', '.join(w for w, _ in rc.keywords)}")
            lines.append(f"    en keywords: {', '.join(w for w, _ in ec.keywords)}")
    lines.append("")

    for title, ids, table in (
        ("Unique Russian topics (pockets of knowledge)", summary["unique_russian"], russian),
        ("Unique English topics (pockets of knowledge)", summary["unique_english"], english),
    ):
        lines.append(f"{title}: {len(ids)}")
        for cid in ids:
            c = table[cid]
            lines.append(
                f"  {c.language.value}:{cid} [{' '.join(c.label_words)}] "
                f"keywords: {', '.join(w for w, _ in c.keywords)}"
            )
        lines.append("")

    jargon_path = out / "jargon" / "jargon.json"
    if jargon_path.exists():
        inputs.append(jargon_path)
        candidates = json.loads(jargon_path.read_text(encoding="utf-8"))
        lines.append(f"Jargon candidates: {len(candidates)}")
        for c in candidates:
            clusters = ",".join(f"{lang}:{cid}" for lang, cid in c["source_clusters"])
            context = ", ".join(c["context_keywords"][:8])
            lines.append(f"  {c['term']} ({clusters}) context: {context}")
        lines.append("")

    text = "\n".join(lines) + "\n"
    with open(out / "report" / "report.txt", "w", encoding="utf-8") as f:
        f.write(text)
    print(text, end="")
    return inputs


_STAGE_BODIES = {
    "synth": _stage_synth,
    "ingest": _stage_ingest,
    "embed": _stage_embed,
    "cluster": _stage_cluster,
    "represent": _stage_represent,
    "compare": _stage_compare,
    "jargon": _stage_jargon,
    "eval": _stage_eval,
    "report": _stage_report,
}

# Inputs consulted for the skip check, per stage (paths that must exist are
# validated again inside the stage bodies with better error messages).
def _stage_inputs(stage: str, config: PipelineConfig, out: Path) -> list[Path]:
    mapping = {
        "synth": [],
        "ingest": [_input_posts_path(config, out)],
        "embed": [out / "ingest" / "english.jsonl", out / "ingest" / "russian.jsonl"],
        "cluster": [out / "embed" / "english.vec", out / "embed" / "russian.vec"],
        "represent": [
            out / "cluster" / "english_labels.tsv",
            out / "cluster" / "russian_labels.tsv",
        ],
        "compare": [out / "represent" / "topics_en.json", out / "represent" / "topics_ru.json"],
        "jargon": [out / "represent" / "topics_en.json", out / "represent" / "topics_ru.json"],
        "eval": [out / "ingest" / "english.jsonl", out / "ingest" / "russian.jsonl"],
        "report": [out / "compare" / "summary.json"],
    }
    return [p for p in mapping[stage] if p.exists()]


def run_stage(
    stage: str,
    config: PipelineConfig,
    force: bool = False,
    overrides: dict[str, object] | None = None,
) -> str:
    """Run one pipeline stage; returns 'ran' or 'skipped'."""
    if stage not in _STAGE_BODIES:
        raise ConfigError(f"unknown stage {stage!r}; expected one of {', '.join(STAGES)}")
    out = Path(config.out)
    stage_dir = out / stage
    inputs_for_check = _stage_inputs(stage, config, out)
    if stage_dir.exists() and (stage_dir / "manifest.json").exists():
        if _manifest_state(stage_dir, config, inputs_for_check, force) == "skip":
            return "skipped"
    with _output_lock(out):
        stage_dir.mkdir(parents=True, exist_ok=True)
        started = time.perf_counter()
        consumed = _STAGE_BODIES[stage](config, out)
        _write_manifest(
            stage, stage_dir, config, consumed, time.perf_counter() - started,
            overrides or {},
        )
    return "ran"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="forumlens",
        description="Structure bilingual forum text into topic clusters and compare them",
    )
    sub = parser.add_subparsers(dest="stage", required=True)
    for stage in STAGES:
        p = sub.add_parser(stage, help=f"run the {stage} stage")
        p.add_argument("--config", help="flat key=value config file")
        p.add_argument("--seed", type=int, help="override the run seed")
        p.add_argument("--force", action="store_true", help="rebuild even if artifacts match")
        p.add_argument("--out", help="output directory for run artifacts")
        if stage == "report":
            p.add_argument(
                "--review-sample",
                action="store_true",
                help="print a seeded 10%% sample of kept clusters for manual review",
            )
    return parser


def _print_review_sample(config: PipelineConfig, out: Path) -> None:
    clusters = [c for c in _load_topics(out, "en") + _load_topics(out, "ru") if c.kept]
    sample = sample_for_review(clusters, fraction=0.10, seed=config.seed)
    print(f"Review sample ({len(sample)} of {len(clusters)} kept clusters, seed={config.seed}):")
    for c in sample:
        print(
            f"  {c.language.value}:{c.cluster_id} [{' '.join(c.label_words)}] "
            f"size={len(c.member_paragraphs)} keywords: "
            + ", ".join(w for w, _ in c.keywords[:10])
        )


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config, overrides = load_config(
            args.config, {"seed": args.seed, "out": args.out}
        )
        state = run_stage(args.stage, config, force=args.force, overrides=overrides)
        if state == "skipped":
            print(f"{args.stage}: up to date, skipped (use --force to rebuild)")
        if args.stage == "report" and getattr(args, "review_sample", False):
            _print_review_sample(config, Path(config.out))
        return 0
    except (ConfigError, StaleArtifactsError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except MissingStageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (RemoteProviderError, RemoteTranslationError, MissingVectorsError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
