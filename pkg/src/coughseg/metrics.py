"""Inter-rater agreement and precision metrics.

Implements Fleiss' multi-rater kappa over an N x k count matrix, the
Landis-Koch interpretation bands, majority-vote consensus, precision of
the single-cough label, and per-rater leave-one-out diagnostics.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass

import numpy as np

from coughseg.errors import AnnotationError, DegenerateAgreementError

# (upper bound, label); kappa <= bound picks the band. Values below 0 are
# "poor"; the [0, 0.20] span is a single "slight" band.
_KAPPA_BANDS = [
    (0.20, "slight"),
    (0.40, "fair"),
    (0.60, "moderate"),
    (0.80, "substantial"),
    (1.00, "almost perfect"),
]


@dataclass(frozen=True)
class AnnotationMatrix:
    """Rating counts: ``counts[i][j]`` raters put item i in category j.

    Every row sums to the rater count ``n``; at least 2 raters and 2
    categories are required.
    """

    counts: np.ndarray
    category_names: tuple[str, ...]

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.ndim != 2:
            raise ValueError(f"counts must be 2-D, got shape {counts.shape}")
        N, k = counts.shape
        if N < 1 or k < 2:
            raise ValueError(f"need N >= 1 items and k >= 2 categories, got {N}x{k}")
        if np.any(counts < 0):
            raise ValueError("counts must be non-negative")
        row_sums = counts.sum(axis=1)
        if not np.all(row_sums == row_sums[0]):
            raise ValueError("every row must sum to the same rater count")
        if row_sums[0] < 2:
            raise ValueError("need at least 2 raters per item")
        if len(self.category_names) != k:
            raise ValueError("category_names length must equal the column count")
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "category_names", tuple(self.category_names))

    @property
    def N(self) -> int:
        return self.counts.shape[0]

    @property
    def k(self) -> int:
        return self.counts.shape[1]

    @property
    def n(self) -> int:
        return int(self.counts[0].sum())


@dataclass(frozen=True)
class KappaResult:
    """Kappa plus the intermediate quantities, for auditability."""

    kappa: float
    p_bar: float
    pe_bar: float
    p_j: tuple[float, ...]
    interpretation: str


@dataclass(frozen=True)
class PrecisionResult:
    """Counts and ratio of single-cough labels among all segments."""

    tp: int
    fp: int

    def __post_init__(self):
        if self.tp < 0 or self.fp < 0 or self.tp + self.fp < 1:
            raise ValueError(f"need tp, fp >= 0 and tp + fp >= 1, got {self.tp}, {self.fp}")

    @property
    def precision(self) -> float:
        return self.tp / (self.tp + self.fp)


def build_matrix(
    labels: Mapping[str, Mapping[str, object]],
    categories: Sequence[object],
    item_order: Sequence[str] | None = None,
) -> AnnotationMatrix:
    """Tally per-item, per-rater labels into an AnnotationMatrix.

    Every item must carry the same rater set (a ragged grid means an
    annotation session was left unfinished). ``categories`` fixes the
    column order; labels outside it are rejected.
    """
    if not labels:
        raise AnnotationError("no items to tally")
    items = list(item_order) if item_order is not None else sorted(labels)
    if set(items) != set(labels):
        raise AnnotationError("item_order does not match the labeled items")
    category_index = {c: j for j, c in enumerate(categories)}
    if len(category_index) != len(categories):
        raise ValueError("categories contain duplicates")

    rater_set = None
    counts = np.zeros((len(items), len(categories)), dtype=np.int64)
    for i, item in enumerate(items):
        raters = labels[item]
        if rater_set is None:
            rater_set = set(raters)
        elif set(raters) != rater_set:
            missing = sorted(rater_set ^ set(raters))
            raise AnnotationError(
                f"ragged annotation data: item {item!r} differs on raters {missing}"
            )
        for rater, cat in raters.items():
            j = category_index.get(cat)
            if j is None:
                raise AnnotationError(
                    f"item {item!r}, rater {rater!r}: label {cat!r} not in categories"
                )
            counts[i, j] += 1
    return AnnotationMatrix(counts=counts, category_names=tuple(str(c) for c in categories))


def fleiss_kappa(matrix: AnnotationMatrix) -> KappaResult:
    """Fleiss' kappa for the count matrix.

    p_j is the share of all assignments in category j; observed agreement
    is P = (sum of n_ij^2 - N*n) / (N*n*(n-1)); chance agreement is
    Pe = sum of p_j^2; kappa = (P - Pe) / (1 - Pe).

    Raises:
        DegenerateAgreementError: all assignments fell in one category
            (Pe = 1), where kappa is undefined.
    """
    counts = matrix.counts.astype(np.float64)
    N, n = matrix.N, matrix.n
    p_j = counts.sum(axis=0) / (N * n)
    pe_bar = float(np.sum(np.square(p_j)))
    p_bar = float((np.sum(np.square(counts)) - N * n) / (N * n * (n - 1)))
    if pe_bar >= 1.0:
        raise DegenerateAgreementError(
            "all assignments fell in a single category; kappa is undefined"
        )
    kappa = (p_bar - pe_bar) / (1.0 - pe_bar)
    return KappaResult(
        kappa=kappa,
        p_bar=p_bar,
        pe_bar=pe_bar,
        p_j=tuple(float(p) for p in p_j),
        interpretation=interpret_kappa(kappa),
    )


def interpret_kappa(kappa: float) -> str:
    """Map a kappa value onto its agreement band.

    Below 0 is "poor"; [0, 0.20] "slight"; then half-open bands of width
    0.20 up to "almost perfect" at (0.80, 1.00].
    """
    if not -1.0 <= kappa <= 1.0:
        raise ValueError(f"kappa must be within [-1, 1], got {kappa}")
    if kappa < 0:
        return "poor"
    for bound, label in _KAPPA_BANDS:
        if kappa <= bound:
            return label
    raise AssertionError("unreachable")


def majority_vote(labels: Mapping[str, int] | Iterable[int]) -> int:
    """Most frequent binary label; an exact tie resolves to 0.

    The tie-break is deliberately conservative: with an even rater count,
    a disputed segment does not count as a single cough.
    """
    values = list(labels.values()) if isinstance(labels, Mapping) else list(labels)
    if not values:
        raise ValueError("majority vote over an empty label set")
    bad = [v for v in values if v not in (0, 1)]
    if bad:
        raise ValueError(f"labels must be 0 or 1, got {bad[:3]}")
    ones = sum(values)
    zeros = len(values) - ones
    return 1 if ones > zeros else 0


def precision(consensus_labels: Sequence[int]) -> PrecisionResult:
    """Precision of the single-cough label over consensus-labeled segments.

    tp counts label-1 (single cough) segments, fp counts label-0 ones;
    precision = tp / (tp + fp).
    """
    if len(consensus_labels) == 0:
        raise ValueError("precision over an empty label list")
    bad = [v for v in consensus_labels if v not in (0, 1)]
    if bad:
        raise ValueError(f"labels must be 0 or 1, got {bad[:3]}")
    tp = int(sum(consensus_labels))
    return PrecisionResult(tp=tp, fp=len(consensus_labels) - tp)


def rater_diagnostics(
    labels: Mapping[str, Mapping[str, int]]
) -> list[tuple[str, float]]:
    """Per-rater agreement with the leave-one-out majority, ascending.

    For each rater, the fraction of items where their label matches the
    majority vote of the other raters. Low values flag high-variability
    annotators; whether to drop one stays a human decision.
    """
    if not labels:
        raise ValueError("no items")
    items = list(labels)
    raters = sorted(labels[items[0]])
    if len(raters) < 3:
        raise ValueError("leave-one-out diagnostics need at least 3 raters")
    for item, row in labels.items():
        if sorted(row) != raters:
            raise AnnotationError(f"ragged annotation data at item {item!r}")

    rates = []
    for rater in raters:
        hits = 0
        for item in items:
            row = labels[item]
            others = [v for r, v in row.items() if r != rater]
            if row[rater] == majority_vote(others):
                hits += 1
        rates.append((rater, hits / len(items)))
    return sorted(rates, key=lambda pair: (pair[1], pair[0]))


def consensus_labels(
    labels: Mapping[str, Mapping[str, int]], item_order: Sequence[str]
) -> list[int]:
    """Majority-vote label per item, in the given order."""
    return [majority_vote(labels[item]) for item in item_order]


def kappa_to_dict(result: KappaResult, method: str, matrix: AnnotationMatrix) -> dict:
    return {
        "method": method,
        "N": matrix.N,
        "n": matrix.n,
        "k": matrix.k,
        "kappa": result.kappa,
        "p_bar": result.p_bar,
        "pe_bar": result.pe_bar,
        "p_j": list(result.p_j),
        "interpretation": result.interpretation,
    }


def precision_to_dict(result: PrecisionResult, method: str) -> dict:
    return {
        "method": method,
        "N": result.tp + result.fp,
        "tp": result.tp,
        "fp": result.fp,
        "precision": result.precision,
    }
