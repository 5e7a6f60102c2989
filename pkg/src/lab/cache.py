"""
Caching of scan rows, so an interrupted scan resumes where it stopped.
"""
import hashlib
import json
import logging
import os
from pathlib import Path
from typing import Optional, Sequence

from ..models import NumericalSettings, ScanRow, encode_complex

logger = logging.getLogger(__name__)

DEFAULT_CACHE_DIR = "cache/scan"


def fingerprint(theta: Sequence[complex], n: int, basepoint: Optional[complex], settings: NumericalSettings) -> str:
    """SHA-256 of everything that determines a scan row"""
    payload = {
        "theta": [encode_complex(t) for t in theta],
        "n": n,
        "basepoint": encode_complex(basepoint) if basepoint is not None else None,
        "settings": settings.fingerprint_payload(),
    }
    text = json.dumps(payload, sort_keys=True)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


class ScanCache:
    """Handle caching of scan rows"""

    def __init__(self, cache_dir: Optional[str] = None):
        self.cache_dir = Path(cache_dir or os.getenv("HOLLAB_CACHE_DIR", DEFAULT_CACHE_DIR))
        self.cache_dir.mkdir(parents=True, exist_ok=True)

    def get_cache_path(self, key: str) -> Path:
        """Get cache file path for a fingerprint"""
        return self.cache_dir / f"{key}.json"

    def load(self, key: str, index: int) -> Optional[ScanRow]:
        """Load a row from cache; corrupt files count as misses"""
        cache_path = self.get_cache_path(key)
        if not cache_path.exists():
            return None
        try:
            with open(cache_path, "r") as f:
                data = json.load(f)
            return ScanRow(**data).model_copy(update={"index": index})
        except Exception as e:
            logger.warning("Ignoring unreadable cache entry %s: %s", cache_path.name, e)
            return None

    def save(self, key: str, row: ScanRow):
        """Save a computed row; rows that errored are not cached"""
        if row.error:
            return
        cache_path = self.get_cache_path(key)
        try:
            with open(cache_path, "w") as f:
                json.dump(row.model_dump(mode="json"), f)
        except OSError as e:
            logger.warning("Could not write cache entry %s: %s", cache_path.name, e)

    def is_cached(self, key: str) -> bool:
        return self.load(key, 0) is not None
