"""Suite results: per-run records, per-setting aggregates and per-group counts."""

from __future__ import annotations

import csv
import io
import json
from collections.abc import Iterable
from dataclasses import asdict, dataclass, field
from pathlib import Path

COLUMNS = ("Model/Generator", "setup", "Total Lemmas", "Correct", "1-Inductive", "Solved")
GROUP_COLUMNS = ("Group Tag", "Solved", "Unsolved")
VIRTUAL_BEST = "Virtual best"


@dataclass(frozen=True)
class TaskRecord:
    """One (task, generator, setup) run reduced to its counters."""

    task: str
    group: str
    generator: str
    setup: str
    total_lemmas: int = 0
    correct: int = 0
    one_inductive: int = 0
    solved: bool = False
    lemmas: tuple[str, ...] = ()
    note: str | None = None
    error: str | None = None

    def as_dict(self) -> dict:
        out = asdict(self)
        out["lemmas"] = list(self.lemmas)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> TaskRecord:
        return cls(**{**data, "lemmas": tuple(data.get("lemmas", ()))})


@dataclass(frozen=True)
class SummaryRow:
    generator: str
    setup: str
    total_lemmas: int | None
    correct: int | None
    one_inductive: int | None
    solved: int

    def cells(self) -> list:
        return [self.generator, self.setup, self.total_lemmas, self.correct, self.one_inductive, self.solved]


@dataclass
class SuiteReport:
    records: list[TaskRecord] = field(default_factory=list)
    groups: dict[str, str] = field(default_factory=dict)  # task id -> group tag

    def add(self, record: TaskRecord) -> None:
        self.records.append(record)
        self.groups.setdefault(record.task, record.group)

    @property
    def settings(self) -> list[tuple[str, str]]:
        out: list[tuple[str, str]] = []
        for r in self.records:
            if (r.generator, r.setup) not in out:
                out.append((r.generator, r.setup))
        return out

    def rows(self) -> list[SummaryRow]:
        """One row per (generator, setup) in first-seen order, then the virtual-best row."""
        rows = []
        for gen, setup in self.settings:
            mine = [r for r in self.records if (r.generator, r.setup) == (gen, setup)]
            rows.append(SummaryRow(gen, setup, sum(r.total_lemmas for r in mine), sum(r.correct for r in mine),
                                   sum(r.one_inductive for r in mine), sum(r.solved for r in mine)))
        if rows:
            rows.append(SummaryRow(VIRTUAL_BEST, "", None, None, None, len(self.solved_tasks())))
        return rows

    def solved_tasks(self) -> set[str]:
        return {r.task for r in self.records if r.solved}

    def group_rows(self) -> list[tuple[str, int, int]]:
        """Per group tag (sorted): tasks solved by some setting, and the rest."""
        solved = self.solved_tasks()
        tally: dict[str, list[int]] = {}
        for task, group in self.groups.items():
            cell = tally.setdefault(group, [0, 0])
            cell[0 if task in solved else 1] += 1
        return [(g, s, u) for g, (s, u) in sorted(tally.items())]

    def as_dict(self) -> dict:
        return {
            "columns": list(COLUMNS),
            "rows": [dict(zip(COLUMNS, row.cells())) for row in self.rows()],
            "group_columns": list(GROUP_COLUMNS),
            "groups": [dict(zip(GROUP_COLUMNS, g)) for g in self.group_rows()],
            "records": [r.as_dict() for r in self.records],
        }

    @classmethod
    def from_records(cls, records: Iterable[TaskRecord]) -> SuiteReport:
        report = cls()
        for r in records:
            report.add(r)
        return report


def _csv(header: Iterable[str], rows: Iterable[Iterable]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(["" if c is None else c for c in row])
    return buf.getvalue()


def to_csv(report: SuiteReport) -> str:
    return _csv(COLUMNS, (row.cells() for row in report.rows()))


def groups_to_csv(report: SuiteReport) -> str:
    return _csv(GROUP_COLUMNS, report.group_rows())


def to_json(report: SuiteReport) -> str:
    return json.dumps(report.as_dict(), indent=2, sort_keys=True) + "\n"


def _table(header: Iterable[str], rows: Iterable[Iterable]) -> str:
    cells = [[str(h) for h in header]] + [["-" if c is None else str(c) for c in row] for row in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(cells[0]))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def to_text(report: SuiteReport) -> str:
    return _table(COLUMNS, (row.cells() for row in report.rows())) + "\n" + _table(GROUP_COLUMNS, report.group_rows())


FORMATS = {"csv": to_csv, "json": to_json, "text": to_text}


def emit_report(report: SuiteReport, fmt: str, path: str | Path) -> Path:
    """Write ``report`` in ``fmt`` (``json``, ``csv`` or ``text``) to ``path``."""
    if fmt not in FORMATS:
        raise ValueError(f"unknown report format {fmt!r}")
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(FORMATS[fmt](report), encoding="utf-8")
    return p
