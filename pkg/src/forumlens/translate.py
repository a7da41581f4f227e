"""Translation providers implementing the (text, source_language) -> text contract."""

from __future__ import annotations

from collections.abc import Mapping
from pathlib import Path

import requests

from .ingest import identity_translator

__all__ = ["identity_translator", "TableTranslator", "RemoteTranslator", "RemoteTranslationError"]


class RemoteTranslationError(RuntimeError):
    pass


class TableTranslator:
    """Word-for-word translation via a two-column lookup table.

    The table file has one "source<TAB>target" pair per line. Tokens absent
    from the table pass through unchanged, so mixed-language fragments
    degrade gracefully.
    """

    def __init__(self, table: Mapping[str, str]):
        self.table = dict(table)

    @classmethod
    def from_file(cls, path: str | Path) -> "TableTranslator":
        table = {}
        with open(path, encoding="utf-8") as f:
            for line in f:
                line = line.rstrip("\n")
                if not line:
                    continue
                source, _, target = line.partition("\t")
                if not target:
                    raise ValueError(f"malformed translation-table line: {line!r}")
                table[source] = target
        return cls(table)

    def __call__(self, text: str, source_language: str) -> str:
        return " ".join(self.table.get(token, token) for token in text.split())


class RemoteTranslator:
    """Client for a translation sidecar speaking POST /translate."""

    def __init__(self, endpoint: str, timeout: float = 30.0, session: requests.Session | None = None):
        self.endpoint = endpoint.rstrip("/")
        self.timeout = timeout
        self.session = session or requests.Session()

    def __call__(self, text: str, source_language: str) -> str:
        try:
            response = self.session.post(
                f"{self.endpoint}/translate",
                json={"text": text, "source_lang": source_language},
                timeout=self.timeout,
            )
            response.raise_for_status()
            return response.json()["text"]
        except (requests.RequestException, KeyError, ValueError) as exc:
            raise RemoteTranslationError(f"translation request failed: {exc}") from exc
