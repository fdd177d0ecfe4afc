"""CSV formatting helpers shared by every writer."""

from __future__ import annotations

import csv
from dataclasses import asdict, fields, is_dataclass
from pathlib import Path
from typing import Any, Iterable, Sequence


def fmt(x: Any) -> str:
    """Six significant digits for floats; everything else verbatim."""
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, float):
        return f"{x:.6g}"
    return str(x)


def write_rows(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(header))
        for row in rows:
            w.writerow([fmt(v) for v in row])


def write_dataclasses(path: Path, items: Sequence[Any], extra: dict[str, Any] | None = None) -> None:
    """One row per dataclass instance, columns in field order (extras first)."""
    if not items:
        raise ValueError("nothing to write")
    assert is_dataclass(items[0])
    extra = extra or {}
    header = list(extra) + [f.name for f in fields(items[0])]
    write_rows(path, header, ([*extra.values(), *asdict(it).values()] for it in items))
