"""Reference matchers used for comparison curves.

* DUMAS-style: average SoftTFIDF similarity matrices over the historical
  product/offer duplicates of a merchant, then take a maximum-weight
  bipartite matching.
* LSD-style Naive Bayes: per category, a multinomial classifier whose classes
  are the catalog attributes, applied to every offer value.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from itertools import permutations
from typing import Iterable, Sequence

import numpy as np
from rapidfuzz.distance import JaroWinkler
from scipy.optimize import linear_sum_assignment

from .corpus import CandidateTuple, Corpus, Product
from .distsim import tokenize
from .matcher import Correspondence

JW_THRESHOLD = 0.9


class TfidfStats:
    """Document frequencies over a small value corpus.

    ``idf(t) = ln(1 + N / df(t))``, with ``df`` floored at 1 so unseen
    tokens get the largest weight and no token ever weighs zero.
    """

    def __init__(self, documents: Iterable[str]):
        self.df: Counter = Counter()
        self.n = 0
        for doc in documents:
            self.n += 1
            self.df.update(set(tokenize(doc)))

    def idf(self, token: str) -> float:
        return math.log(1.0 + max(self.n, 1) / max(self.df.get(token, 0), 1))

    def weights(self, text: str) -> dict[str, float]:
        tf = Counter(tokenize(text))
        w = {t: n * self.idf(t) for t, n in tf.items()}
        norm = math.sqrt(sum(x * x for x in w.values()))
        return {t: x / norm for t, x in w.items()} if norm > 0 else {}


def soft_tfidf(a: str, b: str, stats: TfidfStats, threshold: float = JW_THRESHOLD) -> float:
    """SoftTFIDF with Jaro-Winkler as the secondary token similarity."""
    wa = stats.weights(a)
    wb = stats.weights(b)
    if not wa or not wb:
        return 0.0
    total = 0.0
    for s, va in wa.items():
        best_sim, best_tok = 0.0, None
        for t in wb:
            sim = 1.0 if s == t else JaroWinkler.similarity(s, t)
            if sim > best_sim or (sim == best_sim and best_tok is not None and t < best_tok):
                best_sim, best_tok = sim, t
        if best_tok is not None and best_sim > threshold:
            total += va * wb[best_tok] * best_sim
    return min(max(total, 0.0), 1.0)


@dataclass
class SimilarityMatrix:
    rows: list[str]
    cols: list[str]
    cells: np.ndarray


def _value_text(spec, attribute) -> str:
    return " ".join(v for a, v in spec if a == attribute)


def dumas_merchant_matrix(pairs: Sequence[tuple[Product, "object"]],
                          stats: TfidfStats | None = None) -> SimilarityMatrix:
    """Mean SoftTFIDF matrix over ``(product, offer)`` duplicate pairs.

    Rows are offer attributes, columns catalog attributes, each the sorted
    union over all pairs.  Attributes absent from a pair contribute 0.
    """
    if not pairs:
        raise ValueError("DUMAS needs at least one matched pair")
    if stats is None:
        docs = [v for p, o in pairs for _, v in (*p.spec, *o.spec)]
        stats = TfidfStats(docs)
    rows = sorted({a for _, o in pairs for a, _ in o.spec})
    cols = sorted({a for p, _ in pairs for a, _ in p.spec})
    acc = np.zeros((len(rows), len(cols)))
    cache: dict[tuple[str, str], float] = {}
    for product, offer in pairs:
        p_vals = {a: _value_text(product.spec, a) for a in dict.fromkeys(a for a, _ in product.spec)}
        o_vals = {a: _value_text(offer.spec, a) for a in dict.fromkeys(a for a, _ in offer.spec)}
        for i, b in enumerate(rows):
            vb = o_vals.get(b)
            if vb is None:
                continue
            for j, a in enumerate(cols):
                va = p_vals.get(a)
                if va is None:
                    continue
                key = (vb, va)
                sim = cache.get(key)
                if sim is None:
                    sim = cache[key] = soft_tfidf(vb, va, stats)
                acc[i, j] += sim
    return SimilarityMatrix(rows, cols, acc / len(pairs))


def max_weight_matching(weights: np.ndarray) -> list[tuple[int, int]]:
    """Exact maximum-weight bipartite matching (rectangular allowed)."""
    weights = np.asarray(weights, dtype=float)
    if weights.size == 0:
        return []
    r, c = linear_sum_assignment(weights, maximize=True)
    return [(int(i), int(j)) for i, j in zip(r, c)]


def brute_force_matching_weight(weights: np.ndarray) -> float:
    """Best total weight by enumerating every injective assignment."""
    weights = np.asarray(weights, dtype=float)
    m, n = weights.shape
    if m > n:
        return brute_force_matching_weight(weights.T)
    best = 0.0
    for cols in permutations(range(n), m):
        best = max(best, sum(weights[i, j] for i, j in enumerate(cols)))
    return best


def dumas_match(S: SimilarityMatrix, merchant: str = "", category: str = "") -> list[Correspondence]:
    out = []
    for i, j in max_weight_matching(S.cells):
        w = float(S.cells[i, j])
        if w > 0.0:
            cand = CandidateTuple(S.cols[j], S.rows[i], merchant, category)
            out.append(Correspondence(cand, w, "dumas"))
    return out


def _matched_pairs(corpus: Corpus) -> dict[tuple[str, str], list]:
    groups: dict[tuple[str, str], list] = {}
    for m in corpus.matches:
        o = corpus.offers[m.offer_id]
        groups.setdefault((o.merchant, o.category), []).append((corpus.products[m.product_id], o))
    return groups


def dumas_correspondences(corpus: Corpus) -> list[Correspondence]:
    out = []
    for (merchant, category), pairs in sorted(_matched_pairs(corpus).items()):
        S = dumas_merchant_matrix(pairs)
        out.extend(dumas_match(S, merchant, category))
    return out


# ---------------------------------------------------------------- naive Bayes


@dataclass
class NBModel:
    category: str
    classes: list[str]
    term_counts: dict[str, Counter]
    class_counts: dict[str, int]
    vocabulary: set[str] = field(default_factory=set)

    def __post_init__(self):
        self._totals = {c: sum(self.term_counts[c].values()) for c in self.classes}
        n = sum(self.class_counts[c] for c in self.classes)
        self._log_prior = {c: math.log(self.class_counts[c] / n) for c in self.classes}
        self._cache: dict[str, np.ndarray] = {}

    def prior(self, attribute: str) -> float:
        return math.exp(self._log_prior[attribute])

    def term_prob(self, term: str, attribute: str) -> float:
        """Add-one smoothed ``P(term | attribute)`` over the category vocabulary."""
        return (self.term_counts[attribute].get(term, 0) + 1) / (
            self._totals[attribute] + len(self.vocabulary))

    def posterior(self, value: str) -> np.ndarray:
        """``P(A | value)`` for every class, normalized to sum to 1."""
        cached = self._cache.get(value)
        if cached is not None:
            return cached
        terms = tokenize(value)
        logp = np.array([
            self._log_prior[c] + sum(math.log(self.term_prob(t, c)) for t in terms)
            for c in self.classes])
        logp -= logp.max()
        post = np.exp(logp)
        post /= post.sum()
        self._cache[value] = post
        return post


def nb_train(products: Iterable[Product], category: str) -> NBModel:
    term_counts: dict[str, Counter] = {}
    class_counts: Counter = Counter()
    vocab: set[str] = set()
    n_products = 0
    for p in products:
        if p.category != category:
            continue
        n_products += 1
        for a in dict.fromkeys(a for a, _ in p.spec):
            class_counts[a] += 1
        for a, v in p.spec:
            toks = tokenize(v)
            term_counts.setdefault(a, Counter()).update(toks)
            vocab.update(toks)
    if n_products == 0:
        raise ValueError(f"category {category!r} has no products to train on")
    classes = sorted(class_counts)
    for c in classes:
        term_counts.setdefault(c, Counter())
    return NBModel(category, classes, term_counts, dict(class_counts), vocab)


def nb_score(model: NBModel, attribute: str, values: Iterable[str]) -> float:
    """Mean posterior of ``attribute`` over the distinct offer ``values``."""
    values = sorted(set(values))
    if not values or attribute not in model.classes:
        return 0.0
    j = model.classes.index(attribute)
    return float(sum(model.posterior(v)[j] for v in values) / len(values))


def nb_correspondences(corpus: Corpus) -> list[Correspondence]:
    """Emit ``<A, B, M, C>`` when B is the strict argmax of the score for A."""
    values: dict[tuple[str, str], dict[str, set[str]]] = {}
    for o in corpus.offers.values():
        per = values.setdefault((o.merchant, o.category), {})
        for a, v in o.spec:
            per.setdefault(a, set()).add(v)
    by_cat: dict[str, list[Product]] = {}
    for p in corpus.products.values():
        by_cat.setdefault(p.category, []).append(p)
    models = {c: nb_train(ps, c) for c, ps in by_cat.items()}

    out = []
    for (merchant, category) in sorted(values):
        model = models.get(category)
        if model is None:
            continue
        attrs = sorted(values[(merchant, category)])
        for A in model.classes:
            scores = [nb_score(model, A, values[(merchant, category)][B]) for B in attrs]
            if not scores:
                continue
            best = max(scores)
            winners = [B for B, s in zip(attrs, scores) if s == best]
            if len(winners) == 1 and best > 0.0:
                out.append(Correspondence(CandidateTuple(A, winners[0], merchant, category),
                                          best, "nb"))
    return out


def single_feature_correspondences(candidates, X, feature: str) -> list[Correspondence]:
    """Score candidates by one raw feature, rescaled so larger means more similar."""
    from .distsim import FEATURE_NAMES, LN2
    j = FEATURE_NAMES.index(feature)
    col = np.asarray(X, dtype=float)[:, j] if len(candidates) else np.zeros(0)
    if feature.startswith("js_"):
        col = 1.0 - col / LN2
    return [Correspondence(c, float(min(max(s, 0.0), 1.0)), feature)
            for c, s in zip(candidates, col)]
