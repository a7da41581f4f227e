"""Pipeline configuration: flat key/value files, defaults, and provider wiring.

Config files hold one "key = value" per line with keys named exactly like
PipelineConfig fields; '#' starts a comment. Every threshold defaults to the
standard pipeline constants, and every explicit override is echoed into the
stage manifests.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, fields
from fractions import Fraction
from pathlib import Path

from .embedding import ProviderConfig, ProviderKind
from .ingest import identity_translator
from .translate import RemoteTranslator, TableTranslator


class ConfigError(ValueError):
    pass


@dataclass
class PipelineConfig:
    input: str | None = None
    out: str = "run"
    seed: int = 0

    provider_kind: str = "hash"
    provider_dimension: int = 256
    provider_seed: int | None = None  # defaults to seed
    provider_path: str | None = None
    provider_endpoint: str | None = None
    provider_max_in_flight: int = 4
    provider_batch_size: int = 64

    translator_kind: str = "identity"
    translator_path: str | None = None
    translator_endpoint: str | None = None

    min_cluster_size: int = 24
    min_samples: int | None = None

    lda_topic_count: int = 1
    lda_beta: float = 0.01
    lda_alpha: float | None = None
    lda_iterations: int = 500

    dictionary: str | None = None  # None -> packaged default
    stopwords: str | None = None
    pos_lexicon: str | None = None
    glossaries: str = ""  # comma-separated paths

    noise_ratio: float = 0.12
    short_max_spaces: int = 5
    short_max_chars: int = 30
    highly_related: str = "0.35"  # decimal strings keep threshold comparisons exact
    not_related: str = "0.2"
    keyword_recognition: str = "0.8"
    top_n: int = 20

    eval_runs: int = 5
    eval_providers: str = ""  # comma-separated provider specs

    synth_shared_topics: int = 5
    synth_unique_russian: int = 2
    synth_unique_english: int = 2
    synth_docs_per_topic: int = 40
    synth_vocab_per_topic: int = 20
    synth_noise_fraction: float = 0.1
    synth_jargon: str = ""  # "term:host,term:host"
    synth_background_vocab: int = 40

    def resolved_provider_seed(self) -> int:
        return self.provider_seed if self.provider_seed is not None else self.seed

    def provider_config(self) -> ProviderConfig:
        kind = self.provider_kind.lower()
        if kind == "hash":
            return ProviderConfig(
                kind=ProviderKind.HASH,
                dimension=self.provider_dimension,
                seed=self.resolved_provider_seed(),
                max_in_flight=self.provider_max_in_flight,
                batch_size=self.provider_batch_size,
            )
        if kind == "file":
            if not self.provider_path:
                raise ConfigError("provider_kind=file requires provider_path")
            return ProviderConfig(kind=ProviderKind.FILE, path=self.provider_path)
        if kind == "remote":
            if not self.provider_endpoint:
                raise ConfigError("provider_kind=remote requires provider_endpoint")
            return ProviderConfig(
                kind=ProviderKind.REMOTE,
                endpoint=self.provider_endpoint,
                max_in_flight=self.provider_max_in_flight,
                batch_size=self.provider_batch_size,
            )
        raise ConfigError(f"unknown provider_kind {self.provider_kind!r}")

    def translator(self, synth_table_default: Path | None = None):
        kind = self.translator_kind.lower()
        if kind == "identity":
            return identity_translator
        if kind == "table":
            path = self.translator_path or synth_table_default
            if not path or not Path(path).exists():
                raise ConfigError("translator_kind=table requires translator_path")
            return TableTranslator.from_file(path)
        if kind == "remote":
            if not self.translator_endpoint:
                raise ConfigError("translator_kind=remote requires translator_endpoint")
            return RemoteTranslator(self.translator_endpoint)
        raise ConfigError(f"unknown translator_kind {self.translator_kind!r}")

    def glossary_paths(self) -> list[Path]:
        return [Path(p.strip()) for p in self.glossaries.split(",") if p.strip()]

    def highly_related_fraction(self) -> Fraction:
        return _decimal_fraction("highly_related", self.highly_related)

    def not_related_fraction(self) -> Fraction:
        return _decimal_fraction("not_related", self.not_related)

    def keyword_recognition_fraction(self) -> Fraction:
        return _decimal_fraction("keyword_recognition", self.keyword_recognition)

    def synth_jargon_terms(self) -> dict[str, int]:
        terms = {}
        for item in self.synth_jargon.split(","):
            item = item.strip()
            if not item:
                continue
            term, _, host = item.partition(":")
            if not host:
                raise ConfigError(f"synth_jargon entries are 'term:host_topic', got {item!r}")
            terms[term.strip().lower()] = int(host)
        return terms

    def to_lines(self) -> list[str]:
        lines = []
        for f in fields(self):
            value = getattr(self, f.name)
            lines.append(f"{f.name} = {'' if value is None else value}")
        return lines

    def content_hash(self) -> str:
        # The output location does not affect what a stage computes.
        lines = [line for line in self.to_lines() if not line.startswith("out ")]
        return hashlib.sha256("\n".join(sorted(lines)).encode("utf-8")).hexdigest()


def _decimal_fraction(name: str, value: str) -> Fraction:
    try:
        return Fraction(str(value))
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"{name} must be a decimal number, got {value!r}") from exc


_FIELD_TYPES = {f.name: f for f in fields(PipelineConfig)}

_INT_FIELDS = {
    "seed", "provider_dimension", "provider_seed", "provider_max_in_flight",
    "provider_batch_size", "min_cluster_size", "min_samples", "lda_topic_count",
    "lda_iterations", "top_n", "short_max_spaces", "short_max_chars", "eval_runs",
    "synth_shared_topics", "synth_unique_russian", "synth_unique_english",
    "synth_docs_per_topic", "synth_vocab_per_topic", "synth_background_vocab",
}
_FLOAT_FIELDS = {"lda_beta", "lda_alpha", "noise_ratio", "synth_noise_fraction"}


def _coerce(key: str, raw: str):
    if raw == "" or raw.lower() == "none":
        return None
    if key in _INT_FIELDS:
        return int(raw)
    if key in _FLOAT_FIELDS:
        return float(raw)
    return raw


def parse_config_text(text: str) -> dict[str, object]:
    values: dict[str, object] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        key, sep, raw = stripped.partition("=")
        if not sep:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key = key.strip()
        if key not in _FIELD_TYPES:
            raise ConfigError(f"line {lineno}: unknown config key {key!r}")
        try:
            values[key] = _coerce(key, raw.strip())
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {exc}") from exc
    return values


def load_config(
    path: str | Path | None,
    cli_overrides: dict[str, object] | None = None,
) -> tuple[PipelineConfig, dict[str, object]]:
    """Resolve a config from file plus CLI overrides.

    Returns the config and the mapping of explicitly overridden keys (file
    and CLI combined), which stages echo into their manifests.
    """
    overrides: dict[str, object] = {}
    if path is not None:
        p = Path(path)
        if not p.exists():
            raise ConfigError(f"config file not found: {p}")
        overrides.update(parse_config_text(p.read_text(encoding="utf-8")))
    for key, value in (cli_overrides or {}).items():
        if value is not None:
            if key not in _FIELD_TYPES:
                raise ConfigError(f"unknown config key {key!r}")
            overrides[key] = value
    config = PipelineConfig(**overrides)
    return config, overrides


def parse_provider_spec(spec: str) -> ProviderConfig:
    """Compact provider specs for the model-comparison harness.

    "hash:<dim>:<seed>", "file:<path>", or "remote:<url>".
    """
    kind, _, rest = spec.strip().partition(":")
    kind = kind.lower()
    if kind == "hash":
        dim, _, seed = rest.partition(":")
        if not dim:
            raise ConfigError(f"hash provider spec needs a dimension: {spec!r}")
        return ProviderConfig(
            kind=ProviderKind.HASH, dimension=int(dim), seed=int(seed) if seed else 0
        )
    if kind == "file":
        if not rest:
            raise ConfigError(f"file provider spec needs a path: {spec!r}")
        return ProviderConfig(kind=ProviderKind.FILE, path=rest)
    if kind == "remote":
        if not rest:
            raise ConfigError(f"remote provider spec needs a URL: {spec!r}")
        return ProviderConfig(kind=ProviderKind.REMOTE, endpoint=rest)
    raise ConfigError(f"unknown provider spec {spec!r}")
