"""Distributional similarity between attribute value bags.

Values of an attribute are pooled into a bag of lowercased whitespace tokens.
Two bags are compared with Jensen-Shannon divergence (natural log) and the
Jaccard coefficient over their distinct tokens.  Bags are drawn only from
offers that have a historical product match, and from the products those
offers matched, at three grouping levels: merchant+category, category and
merchant.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping

import numpy as np

from .corpus import CandidateTuple, Corpus

LN2 = math.log(2.0)

FEATURE_NAMES = ("js_mc", "js_c", "js_m", "jaccard_mc", "jaccard_c", "jaccard_m")


class Grouping(str, Enum):
    MC = "mc"
    C = "c"
    M = "m"


class TokenBag(Counter):
    """Multiset of tokens.  ``total`` is the number of token occurrences."""

    @property
    def total(self) -> int:
        return sum(self.values())

    def distinct(self) -> set[str]:
        return {t for t, n in self.items() if n > 0}


def tokenize(value: str) -> list[str]:
    return value.lower().split()


def build_bag(values: Iterable[str]) -> TokenBag:
    bag = TokenBag()
    for v in values:
        bag.update(tokenize(v))
    return bag


def distribution(bag: Mapping[str, int]) -> dict[str, float]:
    total = sum(bag.values())
    if total <= 0:
        raise ValueError("distribution of an empty bag")
    return {t: n / total for t, n in bag.items() if n > 0}


def kl_divergence(p: Mapping[str, float], m: Mapping[str, float]) -> float:
    """``sum_t p(t) ln(p(t)/m(t))``; zero-probability terms of ``p`` contribute 0."""
    total = 0.0
    for t, pt in p.items():
        if pt <= 0.0:
            continue
        mt = m.get(t, 0.0)
        if mt <= 0.0:
            raise ValueError(f"KL undefined: token {t!r} has p>0 but m=0")
        total += pt * math.log(pt / mt)
    return total


def mixture(p: Mapping[str, float], q: Mapping[str, float]) -> dict[str, float]:
    return {t: 0.5 * p.get(t, 0.0) + 0.5 * q.get(t, 0.0) for t in set(p) | set(q)}


def js_divergence(bag_a: Mapping[str, int], bag_b: Mapping[str, int]) -> float:
    """Jensen-Shannon divergence in nats.  An empty bag on either side gives ln 2."""
    na = sum(bag_a.values())
    nb = sum(bag_b.values())
    if na <= 0 or nb <= 0:
        return LN2
    p = distribution(bag_a)
    q = distribution(bag_b)
    m = mixture(p, q)
    js = 0.5 * kl_divergence(p, m) + 0.5 * kl_divergence(q, m)
    # rounding can push a few ulps outside the closed interval
    return min(max(js, 0.0), LN2)


def jaccard(bag_a: Mapping[str, int], bag_b: Mapping[str, int]) -> float:
    a = {t for t, n in bag_a.items() if n > 0}
    b = {t for t, n in bag_b.items() if n > 0}
    union = a | b
    if not union:
        return 0.0
    return len(a & b) / len(union)


@dataclass
class FeatureVector:
    js_mc: float
    js_c: float
    js_m: float
    jaccard_mc: float
    jaccard_c: float
    jaccard_m: float
    present: dict[str, bool] = field(default_factory=dict)

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, n) for n in FEATURE_NAMES], dtype=float)

    def as_dict(self) -> dict[str, float]:
        return {n: getattr(self, n) for n in FEATURE_NAMES}


class FeatureExtractor:
    """Featurizes candidates over one corpus, memoizing per-group bags.

    With ``restricted=False`` the historical matches are ignored: groups
    take every offer of the merchant/category and every catalog product of
    the categories involved.  That mode only exists for comparison.
    """

    def __init__(self, corpus: Corpus, restricted: bool = True):
        self.corpus = corpus
        self.restricted = restricted
        self._bags: dict[tuple, TokenBag] = {}
        self._offer_tokens: dict[str, dict[str, Counter]] = {}
        self._product_tokens: dict[str, dict[str, Counter]] = {}
        self._groups = self._build_groups()

    @staticmethod
    def _tokens(spec) -> dict[str, Counter]:
        out: dict[str, Counter] = {}
        for name, value in spec:
            out.setdefault(name, Counter()).update(tokenize(value))
        return out

    def _build_groups(self):
        corpus = self.corpus
        groups: dict[tuple, tuple[list[str], set[str]]] = {}

        def add(key, offer_id, product_ids):
            offers, products = groups.setdefault(key, ([], set()))
            offers.append(offer_id)
            products.update(product_ids)

        if self.restricted:
            for m in corpus.matches:
                o = corpus.offers[m.offer_id]
                for key in ((Grouping.MC, o.merchant, o.category), (Grouping.C, o.category),
                            (Grouping.M, o.merchant)):
                    add(key, o.offer_id, (m.product_id,))
        else:
            by_cat: dict[str, list[str]] = {}
            for p in corpus.products.values():
                by_cat.setdefault(p.category, []).append(p.product_id)
            seen = set()
            for o in corpus.offers.values():
                for key in ((Grouping.MC, o.merchant, o.category), (Grouping.C, o.category),
                            (Grouping.M, o.merchant)):
                    first = (key, o.category) not in seen
                    seen.add((key, o.category))
                    add(key, o.offer_id, by_cat.get(o.category, ()) if first else ())
        return groups

    @staticmethod
    def group_key(candidate: CandidateTuple, grouping: Grouping) -> tuple:
        if grouping is Grouping.MC:
            return (Grouping.MC, candidate.merchant, candidate.category)
        if grouping is Grouping.C:
            return (Grouping.C, candidate.category)
        return (Grouping.M, candidate.merchant)

    def _offer_bag(self, key, attribute) -> TokenBag:
        cache_key = ("o", key, attribute)
        bag = self._bags.get(cache_key)
        if bag is None:
            bag = TokenBag()
            for oid in self._groups.get(key, ((), ()))[0]:
                toks = self._offer_tokens.get(oid)
                if toks is None:
                    toks = self._offer_tokens[oid] = self._tokens(self.corpus.offers[oid].spec)
                if attribute in toks:
                    bag.update(toks[attribute])
            self._bags[cache_key] = bag
        return bag

    def _product_bag(self, key, attribute) -> TokenBag:
        cache_key = ("p", key, attribute)
        bag = self._bags.get(cache_key)
        if bag is None:
            bag = TokenBag()
            for pid in sorted(self._groups.get(key, ((), set()))[1]):
                toks = self._product_tokens.get(pid)
                if toks is None:
                    toks = self._product_tokens[pid] = self._tokens(self.corpus.products[pid].spec)
                if attribute in toks:
                    bag.update(toks[attribute])
            self._bags[cache_key] = bag
        return bag

    def group_bags(self, candidate: CandidateTuple, grouping: Grouping) -> tuple[TokenBag, TokenBag]:
        key = self.group_key(candidate, Grouping(grouping))
        return (self._product_bag(key, candidate.catalog_attribute),
                self._offer_bag(key, candidate.offer_attribute))

    def features(self, candidate: CandidateTuple) -> FeatureVector:
        values, present = {}, {}
        for g in Grouping:
            bp, bo = self.group_bags(candidate, g)
            ok = bool(bp) and bool(bo)
            present[g.value] = ok
            values["js_" + g.value] = js_divergence(bp, bo) if ok else LN2
            values["jaccard_" + g.value] = jaccard(bp, bo) if ok else 0.0
        return FeatureVector(**values, present=present)


def group_bags(candidate: CandidateTuple, corpus: Corpus, grouping: Grouping | str,
               restricted: bool = True) -> tuple[TokenBag, TokenBag]:
    return FeatureExtractor(corpus, restricted).group_bags(candidate, Grouping(grouping))


def feature_vector(candidate: CandidateTuple, corpus: Corpus, restricted: bool = True) -> FeatureVector:
    return FeatureExtractor(corpus, restricted).features(candidate)


def feature_matrix(candidates: list[CandidateTuple], corpus: Corpus,
                   restricted: bool = True) -> tuple[np.ndarray, list[FeatureVector]]:
    fx = FeatureExtractor(corpus, restricted)
    vectors = [fx.features(c) for c in candidates]
    X = np.array([v.as_array() for v in vectors], dtype=float).reshape(len(vectors), len(FEATURE_NAMES))
    return X, vectors
