"""On-disk annotation formats.

annotations.csv carries one row per (segment_file, rater_id) pair:

    segment_file,rater_id,label
    pos-01_rms_threshold_000.wav,r1,1

Labels are 1 (single cough) or 0 (anything else). Files are UTF-8 with LF
line endings; the filename/rater charset [A-Za-z0-9._-] keeps quoting out
of the format. consensus.csv is the majority-vote output, one
``segment_file,label`` row per segment.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING

from coughseg.errors import AnnotationError, IncompleteGridError
from coughseg.metrics import AnnotationMatrix, build_matrix

if TYPE_CHECKING:
    from coughseg.segment import SegmentManifest

HEADER = "segment_file,rater_id,label"
CATEGORY_NAMES = ("non-single-cough", "single-cough")

_TOKEN = re.compile(r"^[A-Za-z0-9._-]+$")


@dataclass(frozen=True)
class AnnotationRecord:
    segment_file: str
    rater_id: str
    label: int

    def __post_init__(self):
        if not _TOKEN.match(self.segment_file):
            raise AnnotationError(
                f"segment_file {self.segment_file!r} outside charset [A-Za-z0-9._-]"
            )
        if not _TOKEN.match(self.rater_id):
            raise AnnotationError(
                f"rater_id {self.rater_id!r} outside charset [A-Za-z0-9._-]"
            )
        if self.label not in (0, 1):
            raise AnnotationError(f"label must be 0 or 1, got {self.label!r}")


@dataclass
class AnnotationSession:
    """A batch of validated annotation records plus the rater roster."""

    records: list[AnnotationRecord]
    manifest_ref: str = ""
    raters: list[str] = field(default_factory=list)

    def __post_init__(self):
        if not self.raters:
            self.raters = sorted({r.rater_id for r in self.records})

    def grid(self) -> dict[str, dict[str, int]]:
        """records as item -> rater -> label."""
        out: dict[str, dict[str, int]] = {}
        for rec in self.records:
            out.setdefault(rec.segment_file, {})[rec.rater_id] = rec.label
        return out


def parse_annotations(path: str | Path, manifest_ref: str = "") -> AnnotationSession:
    """Read and validate an annotations.csv file.

    Rejects a wrong header, malformed rows, labels outside {0, 1}, and
    duplicate (segment_file, rater_id) pairs.
    """
    path = Path(path)
    lines = path.read_text(encoding="utf-8").split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or lines[0] != HEADER:
        raise AnnotationError(
            f"{path.name}: expected header {HEADER!r}, got {lines[0]!r}"
            if lines
            else f"{path.name}: empty file"
        )
    records = []
    seen: set[tuple[str, str]] = set()
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != 3:
            raise AnnotationError(f"{path.name}:{lineno}: expected 3 fields, got {len(parts)}")
        segment_file, rater_id, label_text = parts
        if label_text not in ("0", "1"):
            raise AnnotationError(
                f"{path.name}:{lineno}: label must be 0 or 1, got {label_text!r}"
            )
        try:
            record = AnnotationRecord(segment_file, rater_id, int(label_text))
        except AnnotationError as exc:
            raise AnnotationError(f"{path.name}:{lineno}: {exc}") from exc
        key = (segment_file, rater_id)
        if key in seen:
            raise AnnotationError(
                f"{path.name}:{lineno}: duplicate pair ({segment_file}, {rater_id})"
            )
        seen.add(key)
        records.append(record)
    return AnnotationSession(records=records, manifest_ref=manifest_ref)


def serialize_annotations(session: AnnotationSession, path: str | Path) -> None:
    """Write the session back to annotations.csv (LF, UTF-8, record order)."""
    rows = [HEADER]
    rows += [f"{r.segment_file},{r.rater_id},{r.label}" for r in session.records]
    Path(path).write_text("\n".join(rows) + "\n", encoding="utf-8", newline="\n")


def write_consensus_csv(items: list[str], labels: list[int], path: str | Path) -> None:
    """Write majority-vote output: ``segment_file,label`` rows."""
    if len(items) != len(labels):
        raise ValueError("items and labels differ in length")
    rows = ["segment_file,label"]
    rows += [f"{item},{label}" for item, label in zip(items, labels)]
    Path(path).write_text("\n".join(rows) + "\n", encoding="utf-8", newline="\n")


def session_to_matrix(
    session: AnnotationSession,
    manifest: "SegmentManifest",
    method: str | None = None,
) -> tuple[AnnotationMatrix, list[str]]:
    """Assemble the rating matrix for the manifest's segments.

    Items are the manifest's exported files (optionally restricted to one
    method), in manifest order; every item must be labeled by every rater
    in the session. Returns the matrix (columns: label 0, label 1) and the
    item list.

    Raises:
        IncompleteGridError: naming exactly which (segment, rater) cells
            are missing.
        AnnotationError: the session labels files the manifest lacks.
    """
    items = [
        f
        for entry in manifest.entries
        if method is None or entry.method == method
        for f in entry.files
    ]
    if not items:
        raise AnnotationError(
            f"manifest has no segments{f' for method {method!r}' if method else ''}"
        )
    item_set = set(items)
    grid = session.grid()

    relevant_raters = sorted(
        {r.rater_id for r in session.records if r.segment_file in item_set}
    ) or session.raters
    if not relevant_raters:
        raise AnnotationError("session carries no labels for these segments")
    unknown = sorted(set(grid) - set(manifest.all_files()))
    if unknown:
        raise AnnotationError(
            f"annotations reference files absent from the manifest: {unknown[:5]}"
        )

    missing = [
        (item, rater)
        for item in items
        for rater in relevant_raters
        if rater not in grid.get(item, {})
    ]
    if missing:
        raise IncompleteGridError(missing)

    labels = {item: {r: grid[item][r] for r in relevant_raters} for item in items}
    matrix = build_matrix(labels, categories=[0, 1], item_order=items)
    matrix = AnnotationMatrix(counts=matrix.counts, category_names=CATEGORY_NAMES)
    return matrix, items
