"""Precision/coverage curves, relative recall and synthesized-product accuracy."""

from __future__ import annotations

import csv
import json
import re
from bisect import bisect_right
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .corpus import CandidateTuple
from .matcher import Correspondence, is_name_identity
from .pipeline import SynthesizedProduct, normalize_key

METHODS = ("classifier", "js_mc", "jaccard_mc", "dumas", "nb", "classifier_unrestricted")
PRECISION_GRID = (0.7, 0.8, 0.9)

_WS = re.compile(r"\s+")


class UnknownMethod(ValueError):
    pass


@dataclass(frozen=True)
class CurvePoint:
    theta: float
    coverage: int
    precision: float | None
    correct: int


@dataclass
class EvalReport:
    curves: dict[str, list[CurvePoint]] = field(default_factory=dict)
    coverage_at: dict[str, dict[str, int]] = field(default_factory=dict)
    relative_recall: dict[str, dict[str, float | None]] = field(default_factory=dict)
    products: dict | None = None

    def summary(self) -> dict:
        out = {"methods": sorted(self.curves), "coverage_at_precision": self.coverage_at,
               "relative_recall_vs_classifier": self.relative_recall}
        if self.products is not None:
            out["products"] = self.products
        return out


def precision_coverage(scored: Iterable[Correspondence], truth: set[CandidateTuple],
                       thetas: Sequence[float] | None = None) -> list[CurvePoint]:
    """Coverage ``|{score > theta}|`` and precision against ``truth`` per theta.

    Name-identity correspondences are left out.  Precision is ``None``
    where nothing is above ``theta``.  Without ``thetas`` every distinct
    score (and 0) is used, which traces the full curve.
    """
    items = sorted((c.score, c.candidate in truth) for c in scored
                   if not is_name_identity(c.candidate))
    if thetas is None:
        thetas = sorted({0.0, *(s for s, _ in items)})
    scores = [s for s, _ in items]
    # correct_above[i] = number of correct items among items[i:]
    correct_above = [0] * (len(items) + 1)
    for i in range(len(items) - 1, -1, -1):
        correct_above[i] = correct_above[i + 1] + items[i][1]
    points = []
    for theta in sorted(thetas):
        i = bisect_right(scores, theta)
        n = len(items) - i
        correct = correct_above[i]
        points.append(CurvePoint(float(theta), n, correct / n if n else None, correct))
    return points


def coverage_at_precision(points: Sequence[CurvePoint], precision: float) -> int:
    """Largest coverage reached at or above ``precision`` (0 if never)."""
    best = 0
    for p in points:
        if p.precision is not None and p.precision >= precision - 1e-12:
            best = max(best, p.coverage)
    return best


def relative_recall(c_a: float, c_b: float, precision: float | None = None) -> float:
    """Recall of A relative to B at a common precision: ``c_a / c_b``.

    Both recalls are ``c * precision / y`` for the same unknown ``y``, so
    precision cancels.
    """
    if c_b <= 0:
        raise ValueError("relative recall undefined: reference coverage is 0")
    return c_a / c_b


def write_curve_csv(path, points: Sequence[CurvePoint]):
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["theta", "coverage", "precision"])
        for p in points:
            w.writerow([repr(p.theta), p.coverage, "" if p.precision is None else repr(p.precision)])


def _collapse(s: str) -> str:
    return _WS.sub(" ", s).strip()


def product_accuracy(products: Iterable[SynthesizedProduct], truth) -> dict:
    """Attribute and product precision of synthesized products.

    A product is looked up by category and normalized key; a pair is correct
    when its value equals the planted value after whitespace collapse.
    Products that match no planted key count every pair as wrong.
    """
    planted = truth.product_by_key()
    n_attr = correct_attr = n_prod = correct_prod = unmatched = 0
    for p in products:
        ref = planted.get((p.category, normalize_key(p.key or "")))
        ref_spec = {a: _collapse(v) for a, v in ref.spec} if ref else {}
        if ref is None:
            unmatched += 1
        ok_all = True
        for a, v in p.spec:
            ok = ref is not None and ref_spec.get(a) == _collapse(v)
            n_attr += 1
            correct_attr += ok
            ok_all &= ok
        n_prod += 1
        correct_prod += ok_all
    return {
        "products": n_prod,
        "attributes": n_attr,
        "attribute_precision": correct_attr / n_attr if n_attr else None,
        "product_precision": correct_prod / n_prod if n_prod else None,
        "unmatched_products": unmatched,
    }


def score_pipeline(outputs: Mapping[str, Sequence[Correspondence]], truth,
                   out_dir=None, products: Sequence[SynthesizedProduct] | None = None,
                   reference: str = "classifier") -> EvalReport:
    """Curves for every method, coverage at the precision grid, relative recall.

    With ``out_dir`` the curves go to ``curves/<method>.csv`` and the summary
    to ``report.json``.
    """
    for method in outputs:
        if method not in METHODS:
            raise UnknownMethod(f"unknown method {method!r}; expected one of {METHODS}")
    truth_set = truth.correspondences
    report = EvalReport()
    for method in sorted(outputs):
        pts = precision_coverage(outputs[method], truth_set)
        report.curves[method] = pts
        report.coverage_at[method] = {str(p): coverage_at_precision(pts, p) for p in PRECISION_GRID}
    if reference in report.coverage_at:
        for method in sorted(outputs):
            if method == reference:
                continue
            rr = {}
            for p in PRECISION_GRID:
                c_ref = report.coverage_at[reference][str(p)]
                c_m = report.coverage_at[method][str(p)]
                rr[str(p)] = relative_recall(c_ref, c_m, p) if c_m > 0 else None
            report.relative_recall[method] = rr
    if products is not None:
        report.products = product_accuracy(products, truth)
    if out_dir is not None:
        out = Path(out_dir)
        for method, pts in report.curves.items():
            write_curve_csv(out / "curves" / f"{method}.csv", pts)
        summary = report.summary()
        summary["planted_cross_name"] = len(truth.cross_name())
        (out / "report.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n",
                                         encoding="utf-8")
    return report
