# persistent store of envelope summaries keyed by the full solve input

import hashlib
import json
import logging
from pathlib import Path
from threading import Lock
from typing import Callable, Dict, Optional

import numpy as np

from app.core.errors import ArtifactIOError
from app.services.envelope import EnvelopeOptions, EnvelopeSummary

X0_QUANTUM = 1e-9


def _digest(payload) -> str:
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=True).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()


def cache_key(operator: str, density: str, x0, u0, xi, options: EnvelopeOptions) -> str:
    """SHA-256 of (operator, density, x0 on a 1e-9 lattice, u0, xi, grid ladder, solver options)."""
    x0 = [int(round(c / X0_QUANTUM)) for c in np.asarray(x0, dtype=float).ravel()]
    return _digest({
        "operator": operator,
        "density": density,
        "x0": x0,
        "u0": [float(c) for c in np.asarray(u0, dtype=float).ravel()],
        "xi": [float(c) for c in np.asarray(xi, dtype=float).ravel()],
        "G": list(options.ladder),
        "options": _digest(options.model_dump(exclude={"workers"})),
    })


class EnvelopeCache:
    """JSON-backed map from cache keys to envelope summaries; all access holds one lock."""

    def __init__(self, path: Optional[Path] = None):
        self.path = Path(path) if path is not None else None
        self._entries: Dict[str, dict] = {}
        self._lock = Lock()
        self.hits = 0
        self.misses = 0
        if self.path is not None and self.path.exists():
            try:
                self._entries = json.loads(self.path.read_text())
            except (OSError, ValueError) as e:
                logging.error(f"Could not read envelope cache {self.path}: {e}")
                raise ArtifactIOError(f"Unreadable envelope cache {self.path}: {e}")
            logging.info(f"Loaded {len(self._entries)} envelope summaries from {self.path}")

    def __len__(self):
        return len(self._entries)

    def get(self, key: str) -> Optional[EnvelopeSummary]:
        with self._lock:
            entry = self._entries.get(key)
            if entry is None:
                self.misses += 1
                return None
            self.hits += 1
        return EnvelopeSummary.model_validate(entry)

    def put(self, key: str, summary: EnvelopeSummary):
        with self._lock:
            self._entries[key] = summary.model_dump()

    def get_or_compute(self, key: str, compute: Callable[[], EnvelopeSummary]) -> EnvelopeSummary:
        hit = self.get(key)
        if hit is not None:
            return hit
        summary = compute()
        self.put(key, summary)
        # misses return the stored form too
        return EnvelopeSummary.model_validate(summary.model_dump())

    def purge(self):
        with self._lock:
            self._entries.clear()

    def save(self):
        if self.path is None:
            return
        with self._lock:
            payload = json.dumps(self._entries, sort_keys=True, indent=1)
        try:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self.path.write_text(payload)
        except OSError as e:
            logging.error(f"Could not write envelope cache {self.path}: {e}")
            raise ArtifactIOError(f"Cannot write envelope cache {self.path}: {e}")
