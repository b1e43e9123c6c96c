"""On-disk cache of canonical JSON payloads, keyed by (form id, truncation, version)."""

from __future__ import annotations

import hashlib
import json
import logging
import os
import tempfile
from pathlib import Path
from typing import Callable, Optional, Sequence

from . import __version__

ENV_VAR = "ORTHOFORMS_CACHE_DIR"
log = logging.getLogger(__name__)


def canonical_dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


def _digest(text: str) -> str:
    return hashlib.sha256(text.encode("ascii")).hexdigest()


class Cache:
    """Entries are files {"key", "version", "payload", "checksum"}; payload is a canonical JSON string."""

    def __init__(self, root: Optional[os.PathLike] = None, enabled: bool = True):
        if root is None:
            root = os.environ.get(ENV_VAR) or None
        self.root = Path(root) if root else None
        self.enabled = enabled and self.root is not None

    def path_for(self, key: Sequence) -> Path:
        assert self.root is not None
        name = _digest(canonical_dumps([list(map(str, key)), __version__]))
        return self.root / f"{name}.json"

    def get(self, key: Sequence) -> Optional[str]:
        if not self.enabled:
            return None
        p = self.path_for(key)
        try:
            entry = json.loads(p.read_text(encoding="ascii"))
        except FileNotFoundError:
            return None
        except (OSError, ValueError, UnicodeDecodeError):
            log.warning("unreadable cache entry %s; recomputing", p)
            return None
        payload = entry.get("payload") if isinstance(entry, dict) else None
        if (not isinstance(payload, str) or entry.get("version") != __version__
                or entry.get("key") != list(map(str, key)) or entry.get("checksum") != _digest(payload)):
            log.warning("cache entry %s failed validation; recomputing", p)
            return None
        return payload

    def put(self, key: Sequence, payload: str) -> None:
        if not self.enabled:
            return
        self.root.mkdir(parents=True, exist_ok=True)
        entry = canonical_dumps({"key": list(map(str, key)), "version": __version__,
                                 "payload": payload, "checksum": _digest(payload)})
        p = self.path_for(key)
        fd, tmp = tempfile.mkstemp(dir=self.root, prefix=".tmp-", suffix=".json")
        try:
            with os.fdopen(fd, "w", encoding="ascii") as fh:
                fh.write(entry)
            os.replace(tmp, p)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

    def get_or_compute(self, key: Sequence, producer: Callable[[], object]) -> str:
        """Canonical JSON of producer(), served from the cache when a valid entry exists."""
        hit = self.get(key)
        if hit is not None:
            return hit
        payload = canonical_dumps(producer())
        self.put(key, payload)
        return payload
