"""Atomic file writing helpers.

Every artifact the pipeline emits goes through write-temp-then-rename so a
crash never leaves a half-written file behind.
"""

from __future__ import annotations

import os
from pathlib import Path


def atomic_write_text(path: str | Path, data: str) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(data, encoding="utf-8")
    os.replace(tmp, path)


def atomic_write_bytes(path: str | Path, data: bytes) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)
