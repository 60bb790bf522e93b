"""Algorithm database: size-agnostic signatures of synthesized families.

The database records which algorithm/codelet families have already been
derived in this process, so a second occurrence of the same equation
shape (e.g. two identical triangular solves in one program) is a lookup
hit rather than a fresh synthesis event.  An optional on-disk JSON cache
persists signatures across processes; it is a pure optimization and
never changes results.
"""

from __future__ import annotations

import json
import threading
from pathlib import Path
from typing import Optional


class AlgorithmDB:
    def __init__(self, cache_path: Optional[Path] = None):
        self._entries: dict[tuple, object] = {}
        self._events: list[tuple] = []
        self._lock = threading.Lock()
        self._cache_path = Path(cache_path) if cache_path else None
        if self._cache_path and self._cache_path.exists():
            for sig in json.loads(self._cache_path.read_text()):
                self._entries[tuple(sig)] = "cached"

    def note(self, sig: tuple) -> bool:
        """Record use of a signature; True if this is a new synthesis event."""
        with self._lock:
            if sig in self._entries:
                return False
            self._entries[sig] = "synthesized"
            self._events.append(sig)
            return True

    def insert(self, sig: tuple, family: object) -> None:
        with self._lock:
            self._entries[sig] = family

    def lookup(self, sig: tuple) -> Optional[object]:
        with self._lock:
            return self._entries.get(sig)

    @property
    def synthesis_events(self) -> list[tuple]:
        return list(self._events)

    def save(self) -> None:
        if self._cache_path:
            data = sorted([list(map(str, sig)) for sig in self._entries])
            self._cache_path.write_text(json.dumps(data, indent=1))
