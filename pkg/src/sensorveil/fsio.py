"""Atomic file writes; every artifact lands fully written or not at all."""

from __future__ import annotations

import os
from pathlib import Path


def write_bytes(path, data: bytes) -> None:
    """Write bytes to path via a temp file in the same directory + rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp~")
    with open(tmp, "wb") as fh:
        fh.write(data)
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)


def write_text(path, text: str) -> None:
    write_bytes(path, text.encode("utf-8"))
