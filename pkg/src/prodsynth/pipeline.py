"""Run-time offer processing: reconcile, cluster by key, fuse values."""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .corpus import CatalogSchema, Offer, Pair
from .matcher import Correspondence, name_key

_NON_ALNUM = re.compile(r"[\W_]+", re.UNICODE)


@dataclass(frozen=True)
class ReconciledOffer:
    offer_id: str
    merchant: str
    category: str
    pairs: tuple[Pair, ...] = ()


@dataclass
class Cluster:
    category: str
    key_attribute: str
    key: str
    members: list[ReconciledOffer] = field(default_factory=list)


@dataclass(frozen=True)
class TermVector:
    terms: tuple[str, ...]
    coordinates: tuple[int, ...]


@dataclass
class SynthesizedProduct:
    category: str
    key: str | None
    key_attribute: str | None
    spec: list[Pair] = field(default_factory=list)
    provenance: dict[str, list[dict]] = field(default_factory=dict)

    def as_record(self) -> dict:
        return {"category": self.category, "key": self.key, "key_attribute": self.key_attribute,
                "spec": [list(p) for p in self.spec], "provenance": self.provenance}


class CorrespondenceIndex:
    """Lookup from ``(offer attribute, merchant, category)`` to a catalog attribute."""

    def __init__(self, correspondences: Iterable[Correspondence]):
        self._map: dict[tuple[str, str, str], tuple[float, str]] = {}
        for c in correspondences:
            k = (c.candidate.offer_attribute, c.candidate.merchant, c.candidate.category)
            cur = self._map.get(k)
            cand = (c.score, c.candidate.catalog_attribute)
            if cur is None or cand[0] > cur[0] or (cand[0] == cur[0] and cand[1] < cur[1]):
                self._map[k] = cand
        self._map_out = {k: v[1] for k, v in self._map.items()}

    def lookup(self, offer_attribute: str, merchant: str, category: str) -> str | None:
        return self._map_out.get((offer_attribute, merchant, category))


def reconcile(offer: Offer, correspondences, schema: CatalogSchema | None = None,
              counters: Counter | None = None) -> ReconciledOffer:
    """Rename offer attributes to catalog attributes; drop what has no mapping.

    A name that equals a catalog attribute (trim + casefold) maps to it
    directly and takes precedence over learned correspondences.
    """
    index = correspondences if isinstance(correspondences, CorrespondenceIndex) \
        else CorrespondenceIndex(correspondences)
    by_name = {name_key(a): a for a in schema.attributes} if schema else {}
    counters = Counter() if counters is None else counters
    out = []
    for name, value in offer.spec:
        target = by_name.get(name_key(name))
        if target is None:
            target = index.lookup(name, offer.merchant, offer.category)
        if target is not None and (schema is None or target in schema):
            out.append((target, value))
            counters["pairs_reconciled"] += 1
        else:
            counters["pairs_discarded"] += 1
    return ReconciledOffer(offer.offer_id, offer.merchant, offer.category, tuple(out))


def normalize_key(value: str) -> str:
    return _NON_ALNUM.sub("", value.casefold())


def extract_key(reconciled: ReconciledOffer, schema: CatalogSchema) -> tuple[str, str] | None:
    for key_attr in schema.key_attributes:
        for name, value in reconciled.pairs:
            if name == key_attr:
                key = normalize_key(value)
                if key:
                    return key_attr, key
    return None


def cluster(reconciled: Iterable[ReconciledOffer], schemas: dict[str, CatalogSchema],
            counters: Counter | None = None) -> list[Cluster]:
    """Group offers by (category, key attribute, normalized key).

    Keyless offers are dropped and counted.  Clusters come out sorted by
    their group key; members keep input order.
    """
    counters = Counter() if counters is None else counters
    groups: dict[tuple[str, str, str], Cluster] = {}
    for r in reconciled:
        schema = schemas.get(r.category)
        found = extract_key(r, schema) if schema is not None else None
        if found is None:
            counters["keyless_dropped"] += 1
            continue
        key_attr, key = found
        g = groups.get((r.category, key_attr, key))
        if g is None:
            g = groups[(r.category, key_attr, key)] = Cluster(r.category, key_attr, key)
        g.members.append(r)
    counters["clusters"] += len(groups)
    return [groups[k] for k in sorted(groups)]


def term_vectors(values: Sequence[str]) -> tuple[list[TermVector], np.ndarray]:
    """Binary term-presence vectors over the ordered distinct terms of ``values``."""
    terms: dict[str, None] = {}
    for v in values:
        for t in v.lower().split():
            terms.setdefault(t)
    order = tuple(terms)
    col = {t: i for i, t in enumerate(order)}
    X = np.zeros((len(values), len(order)))
    for i, v in enumerate(values):
        for t in v.lower().split():
            X[i, col[t]] = 1.0
    vecs = [TermVector(order, tuple(int(x) for x in row)) for row in X]
    return vecs, X


def centroid_distances(values: Sequence[str]) -> tuple[np.ndarray, np.ndarray]:
    _, X = term_vectors(values)
    centroid = X.mean(axis=0)
    return centroid, np.sqrt(((X - centroid) ** 2).sum(axis=1))


def fuse_value(values: Sequence[str]) -> str:
    """The value whose term vector is nearest the centroid of all values.

    Ties go to the value occurring most often, then to the smallest string.
    """
    if not values:
        raise ValueError("fuse_value needs at least one value")
    _, dist = centroid_distances(values)
    mult = Counter(values)
    best = min(range(len(values)),
               key=lambda i: (_round(dist[i]), -mult[values[i]], values[i]))
    return values[best]


def _round(x: float) -> float:
    # distances equal up to summation order must tie
    return math.floor(x * 1e9 + 0.5) / 1e9


def fuse_cluster(cl: Cluster, schema: CatalogSchema) -> SynthesizedProduct:
    product = SynthesizedProduct(cl.category, cl.key, cl.key_attribute)
    for attr in schema.attributes:
        pool = [(r.offer_id, v) for r in cl.members for a, v in r.pairs if a == attr]
        if not pool:
            continue
        product.spec.append((attr, fuse_value([v for _, v in pool])))
        product.provenance[attr] = [{"offer": oid, "value": v} for oid, v in pool]
    return product


def synthesize(offers: Iterable[Offer], correspondences: Iterable[Correspondence],
               schemas: dict[str, CatalogSchema]) -> tuple[list[SynthesizedProduct], dict]:
    """Reconcile, cluster and fuse ``offers``; return products and run counters."""
    counters: Counter = Counter()
    index = CorrespondenceIndex(correspondences)
    reconciled = []
    for offer in offers:
        counters["offers_in"] += 1
        counters["pairs_in"] += len(offer.spec)
        schema = schemas.get(offer.category)
        if schema is None:
            counters["unknown_category"] += 1
            counters["pairs_discarded"] += len(offer.spec)
            continue
        reconciled.append(reconcile(offer, index, schema, counters))
    clusters = cluster(reconciled, schemas, counters)
    products = [fuse_cluster(c, schemas[c.category]) for c in clusters]
    counters["products"] = len(products)
    counters["attributes_synthesized"] = sum(len(p.spec) for p in products)
    counters["key_disagreements"] = _key_disagreements(clusters, schemas)
    report = {k: counters.get(k, 0) for k in (
        "offers_in", "pairs_in", "pairs_reconciled", "pairs_discarded", "unknown_category",
        "keyless_dropped", "clusters", "products", "attributes_synthesized",
        "key_disagreements")}
    return products, report


def _key_disagreements(clusters: list[Cluster], schemas) -> int:
    """Clusters whose members disagree on a secondary key attribute."""
    n = 0
    for cl in clusters:
        for key_attr in schemas[cl.category].key_attributes:
            if key_attr == cl.key_attribute:
                continue
            seen = {normalize_key(v) for r in cl.members for a, v in r.pairs if a == key_attr}
            seen.discard("")
            if len(seen) > 1:
                n += 1
    return n
