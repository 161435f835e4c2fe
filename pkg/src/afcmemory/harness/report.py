"""Run reports and their on-disk form.

Tables are written as ``<experiment>_<hash>.csv`` (the main table) and
``<experiment>_<hash>_<table>.csv`` for the rest; the summary goes to
``<experiment>_<hash>.summary.json``.  With ``format="json"`` all tables go
into a single ``<experiment>_<hash>.json``.  Files are written to a
temporary name and renamed into place.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path


def _cell(v):
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return repr(v)
    return v


def table_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    if not rows:
        return ""
    cols = list(rows[0])
    for r in rows[1:]:
        for k in r:
            if k not in cols:
                cols.append(k)
    w = csv.DictWriter(buf, cols, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: _cell(r.get(k, "")) for k in cols})
    return buf.getvalue()


def _json_safe(v):
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    if isinstance(v, dict):
        return {k: _json_safe(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_json_safe(x) for x in v]
    return v


def atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


@dataclass
class RunReport:
    experiment: str
    config_hash: str
    tables: dict[str, list[dict]]
    summary: dict[str, float]
    main_table: str
    invariants: dict[str, bool] = field(default_factory=dict)
    config: dict = field(default_factory=dict)
    duration_s: float = 0.0
    header: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(self.invariants.values())

    def failed_invariants(self) -> list[str]:
        return [k for k, v in self.invariants.items() if not v]

    def untraceable_summary(self) -> list[str]:
        """Summary keys that appear in no table column."""
        cols = {k for rows in self.tables.values() for r in rows for k in r}
        return [k for k in self.summary if k not in cols]

    def stem(self) -> str:
        return f"{self.experiment}_{self.config_hash}"

    def write(self, out_dir: str | Path, fmt: str = "csv") -> list[Path]:
        out = Path(out_dir)
        written = []
        if fmt == "csv":
            for name, rows in self.tables.items():
                suffix = "" if name == self.main_table else f"_{name}"
                p = out / f"{self.stem()}{suffix}.csv"
                atomic_write(p, table_to_csv(rows))
                written.append(p)
        elif fmt == "json":
            p = out / f"{self.stem()}.json"
            atomic_write(p, json.dumps(_json_safe(self.tables), indent=1, sort_keys=True) + "\n")
            written.append(p)
        else:
            raise ValueError(f"unknown output format {fmt!r}")
        meta = {
            "experiment": self.experiment,
            "config_hash": self.config_hash,
            "header": self.header,
            "summary": self.summary,
            "invariants": self.invariants,
            "config": self.config,
            "duration_s": self.duration_s,
        }
        p = out / f"{self.stem()}.summary.json"
        atomic_write(p, json.dumps(_json_safe(meta), indent=1, sort_keys=True) + "\n")
        written.append(p)
        return written
