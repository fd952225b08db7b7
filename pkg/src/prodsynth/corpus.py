"""Catalog, offer feed and historical-match loading.

All three inputs are UTF-8 JSON-lines files.  Records are validated on load
and kept verbatim: attribute names and values are never normalized here.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, NamedTuple

log = logging.getLogger(__name__)

DEFAULT_KEYS = ("Model Part Number", "UPC")

Pair = tuple[str, str]


class CorpusError(ValueError):
    """Raised when an input file violates the corpus invariants."""


@dataclass(frozen=True)
class CatalogSchema:
    category: str
    attributes: tuple[str, ...]
    key_attributes: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.key_attributes is None:
            # default keys apply only where the schema carries them
            keys = tuple(k for k in DEFAULT_KEYS if k in self.attributes)
            object.__setattr__(self, "key_attributes", keys)
        object.__setattr__(self, "attributes", tuple(self.attributes))
        object.__setattr__(self, "key_attributes", tuple(self.key_attributes))
        if not self.category:
            raise CorpusError("schema without category")
        names = [a.strip() for a in self.attributes]
        if any(not a for a in names):
            raise CorpusError(f"empty attribute name in schema {self.category!r}")
        if len(set(self.attributes)) != len(self.attributes):
            raise CorpusError(f"duplicate attribute in schema {self.category!r}")
        missing = [k for k in self.key_attributes if k not in self.attributes]
        if missing:
            raise CorpusError(f"key attributes {missing} not in schema {self.category!r}")

    def __contains__(self, attribute: str) -> bool:
        return attribute in self.attributes


@dataclass(frozen=True)
class Product:
    product_id: str
    category: str
    spec: tuple[Pair, ...] = ()

    def values(self, attribute: str) -> list[str]:
        return [v for a, v in self.spec if a == attribute]


@dataclass(frozen=True)
class Offer:
    offer_id: str
    merchant: str
    category: str
    title: str = ""
    price: str | None = None
    url: str | None = None
    image_url: str | None = None
    spec: tuple[Pair, ...] = ()

    def values(self, attribute: str) -> list[str]:
        return [v for a, v in self.spec if a == attribute]

    def attribute_names(self) -> list[str]:
        seen = dict.fromkeys(a for a, _ in self.spec)
        return list(seen)


@dataclass(frozen=True)
class MatchRecord:
    offer_id: str
    product_id: str


@dataclass
class Corpus:
    """Immutable-by-convention view of a loaded catalog, feed and match set."""

    schemas: dict[str, CatalogSchema] = field(default_factory=dict)
    products: dict[str, Product] = field(default_factory=dict)
    offers: dict[str, Offer] = field(default_factory=dict)
    matches: list[MatchRecord] = field(default_factory=list)

    def __post_init__(self):
        self._reindex()

    def _reindex(self):
        self.product_of = {m.offer_id: m.product_id for m in self.matches}
        self.offers_of: dict[str, list[str]] = {}
        for m in self.matches:
            self.offers_of.setdefault(m.product_id, []).append(m.offer_id)

    @classmethod
    def build(cls, schemas: Iterable[CatalogSchema], products: Iterable[Product],
              offers: Iterable[Offer] = (), matches: Iterable[MatchRecord] = ()) -> "Corpus":
        schemas = list(schemas)
        products = list(products)
        offers = list(offers)
        _check_products(schemas, products)
        corpus = cls(
            schemas={s.category: s for s in schemas},
            products={p.product_id: p for p in products},
            offers=_unique_offers(offers),
        )
        corpus.matches = validate_matches(matches, corpus.offers, corpus.products)
        corpus._reindex()
        return corpus

    def with_offers(self, offers: Iterable[Offer]) -> "Corpus":
        """Same catalog and matches with replaced offers (ids must be kept)."""
        return Corpus(self.schemas, self.products, {o.offer_id: o for o in offers},
                      list(self.matches))

    def matched_offers(self) -> Iterator[Offer]:
        for m in self.matches:
            yield self.offers[m.offer_id]


# ---------------------------------------------------------------- reading


def _read_jsonl(path, strict: bool, warnings: list | None = None) -> Iterator[tuple[int, dict]]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                if not isinstance(rec, dict):
                    raise ValueError("record is not an object")
            except ValueError as exc:
                if strict:
                    raise CorpusError(f"{path}:{lineno}: malformed record ({exc})") from exc
                log.warning("%s:%d: skipping malformed record (%s)", path, lineno, exc)
                if warnings is not None:
                    warnings.append(f"{path}:{lineno}: malformed record ({exc})")
                continue
            yield lineno, rec


def _pairs(raw) -> tuple[Pair, ...]:
    if raw is None:
        return ()
    out = []
    for item in raw:
        name, value = item
        if not isinstance(name, str) or not isinstance(value, str):
            raise ValueError(f"attribute pair must be two strings, got {item!r}")
        if not name.strip():
            raise ValueError("empty attribute name")
        out.append((name, value))
    return tuple(out)


def _check_products(schemas: list[CatalogSchema], products: list[Product]):
    by_cat = {}
    for s in schemas:
        if s.category in by_cat:
            raise CorpusError(f"duplicate schema for category {s.category!r}")
        by_cat[s.category] = s
    seen = set()
    for p in products:
        if p.product_id in seen:
            raise CorpusError(f"duplicate product id {p.product_id!r}")
        seen.add(p.product_id)
        schema = by_cat.get(p.category)
        if schema is None:
            raise CorpusError(f"product {p.product_id!r} references unknown category {p.category!r}")
        for name, _ in p.spec:
            if name not in schema:
                raise CorpusError(
                    f"product {p.product_id!r}: attribute {name!r} not in schema of {p.category!r}")


def load_catalog(path, strict: bool = False) -> tuple[list[CatalogSchema], list[Product]]:
    """Read ``catalog.jsonl`` into schemas and products.

    Malformed lines are skipped (or abort with ``strict``); references to
    unknown categories, off-schema attributes and duplicate ids always abort.
    """
    schemas, products = [], []
    for lineno, rec in _read_jsonl(path, strict):
        kind = rec.get("kind")
        try:
            if kind == "schema":
                schemas.append(CatalogSchema(
                    category=rec["category"],
                    attributes=tuple(rec["attributes"]),
                    key_attributes=rec.get("keys"),
                ))
            elif kind == "product":
                products.append(Product(str(rec["id"]), rec["category"], _pairs(rec.get("spec"))))
            else:
                raise ValueError(f"unknown kind {kind!r}")
        except CorpusError:
            raise
        except (KeyError, ValueError, TypeError) as exc:
            if strict:
                raise CorpusError(f"{path}:{lineno}: {exc}") from exc
            log.warning("%s:%d: skipping record (%s)", path, lineno, exc)
    _check_products(schemas, products)
    return schemas, products


def _unique_offers(offers: Iterable[Offer]) -> dict[str, Offer]:
    out: dict[str, Offer] = {}
    for o in offers:
        if o.offer_id in out:
            raise CorpusError(f"duplicate offer id {o.offer_id!r}")
        out[o.offer_id] = o
    return out


def load_offers(path, strict: bool = False, warnings: list | None = None) -> list[Offer]:
    """Read an ``offers.jsonl`` feed.

    Records lacking merchant or category are skipped and reported through
    ``warnings`` unless ``strict``.  Duplicate offer ids always abort.
    """
    offers = []
    warnings = [] if warnings is None else warnings
    for lineno, rec in _read_jsonl(path, strict, warnings):
        try:
            merchant = rec.get("merchant") or ""
            category = rec.get("category") or ""
            if not str(merchant).strip() or not str(category).strip():
                raise ValueError("missing merchant or category")
            offers.append(Offer(
                offer_id=str(rec["id"]),
                merchant=merchant,
                category=category,
                title=rec.get("title") or "",
                price=rec.get("price"),
                url=rec.get("url"),
                image_url=rec.get("image"),
                spec=_pairs(rec.get("spec")),
            ))
        except (KeyError, ValueError, TypeError) as exc:
            if strict:
                raise CorpusError(f"{path}:{lineno}: {exc}") from exc
            warnings.append(f"{path}:{lineno}: {exc}")
            log.warning("%s:%d: skipping offer (%s)", path, lineno, exc)
    _unique_offers(offers)
    return offers


def validate_matches(matches: Iterable[MatchRecord], offers: dict[str, Offer],
                     products: dict[str, Product]) -> list[MatchRecord]:
    out, seen = [], set()
    for m in matches:
        offer = offers.get(m.offer_id)
        product = products.get(m.product_id)
        if offer is None or product is None:
            raise CorpusError(f"dangling match {m.offer_id!r} -> {m.product_id!r}")
        if offer.category != product.category:
            raise CorpusError(
                f"match {m.offer_id!r} -> {m.product_id!r} crosses categories "
                f"({offer.category!r} != {product.category!r})")
        if m.offer_id in seen:
            raise CorpusError(f"offer {m.offer_id!r} matched more than once")
        seen.add(m.offer_id)
        out.append(m)
    return out


def load_matches(path, offers, products, strict: bool = False) -> list[MatchRecord]:
    if not isinstance(offers, dict):
        offers = {o.offer_id: o for o in offers}
    if not isinstance(products, dict):
        products = {p.product_id: p for p in products}
    records = []
    for lineno, rec in _read_jsonl(path, strict):
        try:
            records.append(MatchRecord(str(rec["offer"]), str(rec["product"])))
        except KeyError as exc:
            if strict:
                raise CorpusError(f"{path}:{lineno}: missing field {exc}") from exc
            log.warning("%s:%d: skipping match without %s", path, lineno, exc)
    return validate_matches(records, offers, products)


def load_corpus(catalog, offers, matches=None, strict: bool = False) -> Corpus:
    schemas, products = load_catalog(catalog, strict)
    offer_list = load_offers(offers, strict)
    corpus = Corpus.build(schemas, products, offer_list)
    if matches is not None:
        corpus.matches = load_matches(matches, corpus.offers, corpus.products, strict)
        corpus._reindex()
    return corpus


# ---------------------------------------------------------------- writing


def _dump(rec: dict) -> str:
    return json.dumps(rec, ensure_ascii=False)


def schema_record(s: CatalogSchema) -> dict:
    return {"kind": "schema", "category": s.category, "attributes": list(s.attributes),
            "keys": list(s.key_attributes)}


def product_record(p: Product) -> dict:
    return {"kind": "product", "id": p.product_id, "category": p.category,
            "spec": [list(pair) for pair in p.spec]}


def offer_record(o: Offer) -> dict:
    return {"id": o.offer_id, "merchant": o.merchant, "category": o.category, "title": o.title,
            "price": o.price, "url": o.url, "image": o.image_url,
            "spec": [list(pair) for pair in o.spec]}


def write_jsonl(path, records: Iterable[dict]):
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            fh.write(_dump(rec) + "\n")


def save_catalog(path, schemas: Iterable[CatalogSchema], products: Iterable[Product]):
    write_jsonl(path, [*map(schema_record, schemas), *map(product_record, products)])


def save_offers(path, offers: Iterable[Offer]):
    write_jsonl(path, map(offer_record, offers))


def save_matches(path, matches: Iterable[MatchRecord]):
    write_jsonl(path, ({"offer": m.offer_id, "product": m.product_id} for m in matches))


class CandidateTuple(NamedTuple):
    """``(catalog attribute, offer attribute, merchant, category)``."""

    catalog_attribute: str
    offer_attribute: str
    merchant: str
    category: str
