"""Dataset ingestion and the bundled synthetic credit-scoring clone."""
from __future__ import annotations

import csv
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import EmptyGroup, ParseError, UnknownColumn
from .model import InGroupRanking

BUNDLED_GERMAN = "german_synthetic.csv"
PROTECTED_GERMAN = "young"


@dataclass(frozen=True)
class DatasetRecord:
    item_id: str
    group: str
    score: float


@dataclass(frozen=True)
class Dataset:
    records: tuple[DatasetRecord, ...]
    labels: tuple[str, ...]  # group index -> label, sorted
    in_group: tuple[InGroupRanking, ...]
    proportions: tuple[Fraction, ...]

    @property
    def scores(self) -> dict[str, float]:
        return {r.item_id: r.score for r in self.records}

    def group_index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise EmptyGroup(f"no items with group label {label!r}") from None


def ingest(path, group_column: str = "group", score_column: str = "score", id_column: str = "id") -> Dataset:
    """Read a CSV with a header row into per-group in-group rankings.

    Items are ordered by score, best first; ties keep file order.  Group
    labels are indexed in sorted order.
    """
    records = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in (id_column, group_column, score_column):
            if col not in header:
                raise UnknownColumn(f"column {col!r} not in header {header}", line=1)
        seen = set()
        for row in reader:
            line = reader.line_num
            if None in row or any(v is None for v in row.values()):
                raise ParseError("wrong number of fields", line)
            item, group = row[id_column].strip(), row[group_column].strip()
            if not item or not group:
                raise ParseError("empty id or group", line)
            if item in seen:
                raise ParseError(f"duplicate id {item!r}", line)
            seen.add(item)
            try:
                score = float(row[score_column])
            except ValueError:
                raise ParseError(f"bad score {row[score_column]!r}", line) from None
            if not math.isfinite(score):
                raise ParseError(f"non-finite score {row[score_column]!r}", line)
            records.append(DatasetRecord(item, group, score))
    if not records:
        raise EmptyGroup("dataset has no rows")
    labels = tuple(sorted({r.group for r in records}))
    index = {g: j for j, g in enumerate(labels)}
    by_group: list[list[DatasetRecord]] = [[] for _ in labels]
    for r in records:
        by_group[index[r.group]].append(r)
    in_group = tuple(
        InGroupRanking(j, tuple(r.item_id for r in sorted(rs, key=lambda r: -r.score)))
        for j, rs in enumerate(by_group)
    )
    counts = Counter(r.group for r in records)
    proportions = tuple(Fraction(counts[g], len(records)) for g in labels)
    return Dataset(tuple(records), labels, in_group, proportions)


def bundled_german_path() -> Path:
    return Path(str(resources.files("fairrank") / "data" / BUNDLED_GERMAN))


def make_synthetic_german(n: int = 1000, protected_share: float = 0.15, seed: int = 1994) -> list[DatasetRecord]:
    """Credit-score-like records where the protected group scores lower on average.

    Mirrors the shape of the German credit data used for age-based fairness
    studies: a 15% protected group whose scores are shifted down, so a
    score-sorted top-100 under-represents it.
    """
    rng = np.random.default_rng(seed)
    n_prot = round(n * protected_share)
    groups = [PROTECTED_GERMAN] * n_prot + ["adult"] * (n - n_prot)
    rng.shuffle(groups)
    out = []
    for t, g in enumerate(groups):
        mu = 560.0 if g == PROTECTED_GERMAN else 600.0
        score = float(np.clip(rng.normal(mu, 60.0), 300.0, 850.0))
        out.append(DatasetRecord(f"c{t + 1:04d}", g, round(score, 1)))
    return out


def write_dataset(records, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "group", "score"])
        for r in records:
            w.writerow([r.item_id, r.group, f"{r.score:.1f}"])
