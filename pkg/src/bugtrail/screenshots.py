"""Content-addressed screenshot store and crop helper.

Images are immutable PNG blobs keyed by their sha256; graphs, sessions and
reports reference hashes only, which keeps model data diffable and makes
whole runs byte-reproducible.
"""

from __future__ import annotations

import hashlib
import io
import os
from pathlib import Path

from PIL import Image

from .errors import NotFoundError
from .model import Rect


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


class ScreenshotStore:
    """Directory of ``<sha256>.png`` files, append-only."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def path_for(self, digest: str) -> Path:
        return self.root / f"{digest}.png"

    def put(self, data: bytes) -> str:
        digest = sha256_hex(data)
        path = self.path_for(digest)
        if not path.exists():
            tmp = path.with_suffix(f".tmp.{os.getpid()}")
            tmp.write_bytes(data)
            tmp.replace(path)
        return digest

    def get(self, digest: str) -> bytes:
        path = self.path_for(digest)
        if not path.exists():
            raise NotFoundError(f"screenshot {digest} not in store")
        return path.read_bytes()

    def __contains__(self, digest: str) -> bool:
        return self.path_for(digest).exists()

    def digests(self) -> set[str]:
        return {p.stem for p in self.root.glob("*.png")}


def png_crop(png_data: bytes, bounds: Rect) -> bytes:
    """Axis-aligned crop of a PNG at *bounds*, re-encoded as PNG."""
    img = Image.open(io.BytesIO(png_data))
    box = (bounds.x, bounds.y, bounds.x + bounds.width, bounds.y + bounds.height)
    out = io.BytesIO()
    img.crop(box).save(out, format="PNG")
    return out.getvalue()
