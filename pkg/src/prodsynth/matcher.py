"""Attribute correspondence learning.

Candidates ``<A_p, A_o, M, C>`` are labeled automatically from name
identities: ``<A, A, M, C>`` is positive, and every ``<A, B, M, C>`` with
``B != A`` that coexists with it is negative.  A logistic regression over
the six distributional features then scores every candidate.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .corpus import CandidateTuple, Corpus
from .distsim import FEATURE_NAMES, FeatureVector

__all__ = [
    "CandidateTuple", "Correspondence", "DegenerateTrainingSet", "LabeledExample",
    "LearnResult", "LogisticModel", "build_training_set", "fit_logistic",
    "generate_candidates", "is_name_identity", "label_candidates", "learn", "name_key",
    "predict", "predict_all", "read_correspondences", "resolve_conflicts",
    "select_correspondences", "train", "write_correspondences",
]


class DegenerateTrainingSet(ValueError):
    """The automatically labeled training set lacks one of the two classes."""


@dataclass(frozen=True)
class LabeledExample:
    candidate: CandidateTuple
    features: FeatureVector
    label: int


@dataclass(frozen=True)
class Correspondence:
    candidate: CandidateTuple
    score: float
    method: str = "classifier"

    def as_record(self) -> dict:
        c = self.candidate
        rec = {"catalog": c.catalog_attribute, "offer": c.offer_attribute,
               "merchant": c.merchant, "category": c.category, "score": self.score}
        if self.method != "classifier":
            rec["method"] = self.method
        return rec

    @classmethod
    def from_record(cls, rec: dict, method: str | None = None) -> "Correspondence":
        cand = CandidateTuple(rec["catalog"], rec["offer"], rec["merchant"], rec["category"])
        return cls(cand, float(rec["score"]), method or rec.get("method", "classifier"))


def name_key(name: str) -> str:
    return name.strip().casefold()


def is_name_identity(candidate: CandidateTuple) -> bool:
    return name_key(candidate.catalog_attribute) == name_key(candidate.offer_attribute)


def generate_candidates(corpus: Corpus) -> list[CandidateTuple]:
    """Cross product of matched catalog and offer attributes per (merchant, category)."""
    catalog_attrs: dict[str, set[str]] = {}
    offer_attrs: dict[tuple[str, str], set[str]] = {}
    for m in corpus.matches:
        offer = corpus.offers[m.offer_id]
        product = corpus.products[m.product_id]
        schema = corpus.schemas[product.category]
        catalog_attrs.setdefault(offer.category, set()).update(
            a for a, _ in product.spec if a in schema)
        offer_attrs.setdefault((offer.merchant, offer.category), set()).update(
            a for a, _ in offer.spec)
    out = []
    for (merchant, category), o_attrs in offer_attrs.items():
        for ap in catalog_attrs.get(category, ()):
            for ao in o_attrs:
                out.append(CandidateTuple(ap, ao, merchant, category))
    out.sort(key=lambda c: (c.category, c.merchant, c.catalog_attribute, c.offer_attribute))
    return out


def label_candidates(candidates: Iterable[CandidateTuple]) -> dict[CandidateTuple, int]:
    """Labels for the candidates covered by the name-identity rules; others are absent."""
    candidates = list(candidates)
    identities = {(name_key(c.catalog_attribute), c.merchant, c.category)
                  for c in candidates if is_name_identity(c)}
    labels = {}
    for c in candidates:
        if is_name_identity(c):
            labels[c] = 1
        elif (name_key(c.catalog_attribute), c.merchant, c.category) in identities:
            labels[c] = 0
    return labels


def build_training_set(candidates: Sequence[CandidateTuple],
                       features: Sequence[FeatureVector]) -> list[LabeledExample]:
    if len(candidates) != len(features):
        raise ValueError("candidates and features differ in length")
    labels = label_candidates(candidates)
    return [LabeledExample(c, f, labels[c]) for c, f in zip(candidates, features) if c in labels]


def sigmoid(z):
    z = np.asarray(z, dtype=float)
    return np.where(z >= 0, 1.0 / (1.0 + np.exp(-np.abs(z))),
                    np.exp(-np.abs(z)) / (1.0 + np.exp(-np.abs(z))))


@dataclass
class LogisticModel:
    weights: np.ndarray
    bias: float
    feature_means: np.ndarray
    feature_stds: np.ndarray
    feature_names: tuple[str, ...] = FEATURE_NAMES
    info: dict = field(default_factory=dict)

    def standardize(self, X) -> np.ndarray:
        return (np.asarray(X, dtype=float) - self.feature_means) / self.feature_stds

    def decision(self, X) -> np.ndarray:
        return self.standardize(X) @ self.weights + self.bias

    def predict_proba(self, X) -> np.ndarray:
        return sigmoid(self.decision(X))

    def to_json(self) -> str:
        rec = {
            "feature_names": list(self.feature_names),
            "weights": [float(w) for w in self.weights],
            "bias": float(self.bias),
            "feature_means": [float(v) for v in self.feature_means],
            "feature_stds": [float(v) for v in self.feature_stds],
            "info": self.info,
        }
        return json.dumps(rec, indent=2, sort_keys=False) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "LogisticModel":
        rec = json.loads(text)
        return cls(np.array(rec["weights"], dtype=float), float(rec["bias"]),
                   np.array(rec["feature_means"], dtype=float),
                   np.array(rec["feature_stds"], dtype=float),
                   tuple(rec["feature_names"]), rec.get("info", {}))


def fit_logistic(X, y, lam: float = 1e-4, max_iters: int = 10_000, tol: float = 1e-6,
                 feature_names: tuple[str, ...] = FEATURE_NAMES) -> LogisticModel:
    """L2-regularized logistic regression by full-batch gradient ascent.

    Features are standardized with the training mean and std (zero-variance
    columns get std 1).  The objective is the mean log-likelihood minus
    ``lam/2 * |w|^2``; the bias is not penalized.  The step size is the
    inverse of a Lipschitz bound on the gradient, so no tuning is needed.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n, d = X.shape
    if n == 0:
        raise DegenerateTrainingSet("degenerate training set: no examples")
    if y.min() == y.max():
        raise DegenerateTrainingSet(
            f"degenerate training set: all {n} examples have label {int(y[0])}")

    means = X.mean(axis=0)
    stds = X.std(axis=0)
    stds = np.where(stds > 1e-12, stds, 1.0)
    Z = np.hstack([(X - means) / stds, np.ones((n, 1))])

    lipschitz = 0.25 * np.linalg.eigvalsh(Z.T @ Z / n).max() + lam
    step = 1.0 / lipschitz
    penalty = np.r_[np.full(d, lam), 0.0]

    theta = np.zeros(d + 1)
    iters, converged = 0, False
    for iters in range(1, max_iters + 1):
        grad = Z.T @ (y - sigmoid(Z @ theta)) / n - penalty * theta
        if np.max(np.abs(grad)) < tol:
            converged = True
            break
        theta = theta + step * grad

    return LogisticModel(theta[:d].copy(), float(theta[d]), means, stds, tuple(feature_names),
                         {"iterations": iters, "converged": converged, "lambda": lam,
                          "examples": n, "positives": int(y.sum())})


def train(examples: Sequence[LabeledExample], lam: float = 1e-4,
          max_iters: int = 10_000) -> LogisticModel:
    if not examples:
        raise DegenerateTrainingSet("degenerate training set: no examples")
    X = np.array([e.features.as_array() for e in examples])
    y = np.array([e.label for e in examples], dtype=float)
    return fit_logistic(X, y, lam=lam, max_iters=max_iters)


def predict(model: LogisticModel, candidate: CandidateTuple, features: FeatureVector) -> Correspondence:
    score = float(model.predict_proba(features.as_array()[None, :])[0])
    return Correspondence(candidate, score)


def predict_all(model: LogisticModel, candidates: Sequence[CandidateTuple], X) -> list[Correspondence]:
    if not candidates:
        return []
    scores = model.predict_proba(X)
    return [Correspondence(c, float(s)) for c, s in zip(candidates, scores)]


def resolve_conflicts(scored: Iterable[Correspondence]) -> list[Correspondence]:
    """Keep one catalog attribute per (offer attribute, merchant, category).

    The highest score wins; ties go to the lexicographically smaller catalog
    attribute.  Output order follows the input order of the survivors.
    """
    scored = list(scored)
    best: dict[tuple, Correspondence] = {}
    for c in scored:
        k = (c.candidate.offer_attribute, c.candidate.merchant, c.candidate.category)
        cur = best.get(k)
        if (cur is None or c.score > cur.score
                or (c.score == cur.score
                    and c.candidate.catalog_attribute < cur.candidate.catalog_attribute)):
            best[k] = c
    keep = {id(c) for c in best.values()}
    return [c for c in scored if id(c) in keep]


def select_correspondences(scored: Iterable[Correspondence], theta: float = 0.5,
                           resolve: bool = True) -> list[Correspondence]:
    kept = [c for c in scored if c.score > theta]
    return resolve_conflicts(kept) if resolve else kept


def write_correspondences(path, items: Iterable[Correspondence]):
    from .corpus import write_jsonl
    write_jsonl(path, (c.as_record() for c in items))


def read_correspondences(path, method: str | None = None) -> list[Correspondence]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                out.append(Correspondence.from_record(json.loads(line), method))
    return out



@dataclass
class LearnResult:
    candidates: list[CandidateTuple]
    X: np.ndarray
    features: list[FeatureVector]
    examples: list[LabeledExample]
    model: LogisticModel
    scored: list[Correspondence]

    def counters(self, theta: float = 0.5) -> dict:
        return {"candidates": len(self.candidates), "labeled": len(self.examples),
                "positives": sum(e.label for e in self.examples),
                "predicted_valid": sum(c.score > theta for c in self.scored)}


def learn(corpus: Corpus, restricted: bool = True, lam: float = 1e-4,
          max_iters: int = 10_000) -> LearnResult:
    """Candidates, features, auto-labels, model and scores in one pass."""
    from .distsim import feature_matrix

    candidates = generate_candidates(corpus)
    X, vectors = feature_matrix(candidates, corpus, restricted)
    examples = build_training_set(candidates, vectors)
    model = train(examples, lam=lam, max_iters=max_iters)
    return LearnResult(candidates, X, vectors, examples, model, predict_all(model, candidates, X))
