"""Seeded synthetic catalogs, offer feeds and landing pages with known truth.

All randomness comes from one ``numpy.random.Generator(PCG64(seed))``; the
same config and seed give byte-identical files on every platform numpy
supports.

Model of the world
------------------
Each category has ``attributes`` descriptive attributes plus the key
attributes.  Descriptive attributes come in families of two that share one
token vocabulary; the vocabulary is cut into slices and a product of segment
``s`` draws attribute ``r`` of a family from slice ``(s + r) mod n_slices``.
With one segment the two siblings use disjoint slices.  With several
segments, and merchants that only sell one segment, siblings become
indistinguishable unless value distributions are restricted to matched
products.

Every merchant picks one name per catalog attribute and category: the
catalog name with probability ``p_identity``, otherwise a synonym.  Offer
values copy product values, rendered in a per-merchant format and perturbed
per offer; junk rows are mixed in at ``noise_rate``.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields, replace
from html import escape
from pathlib import Path

import numpy as np

from .corpus import (CandidateTuple, CatalogSchema, Corpus, MatchRecord, Offer, Product,
                     save_catalog, save_matches, save_offers, write_jsonl)
from .extract import page_filename
from .pipeline import normalize_key

ATTRIBUTE_NAMES = [
    "Capacity", "Speed", "Interface", "Weight", "Color", "Brand", "Resolution", "Screen Size",
    "Memory", "Battery Life", "Cache", "Form Factor", "Power", "Material", "Width", "Height",
    "Depth", "Voltage", "Frequency", "Storage", "Processor", "Graphics", "Warranty", "Finish",
    "Noise Level", "Throughput", "Latency", "Sensor", "Lens Mount", "Zoom", "Aperture",
    "Focal Length", "Display Type", "Refresh Rate", "Connectivity", "Ports", "Wattage",
    "Load Capacity", "Fabric", "Thread Count",
]

UNITS = ["gb", "rpm", "mb/s", "mm", "w", "lbs", "in", "ms", "hz", "mah", "v", "db", "kg", "cm",
         "mp", "x", "nm", "tb", "ghz", "oz"]

SYLLABLES = ["ka", "lo", "mi", "ra", "te", "vo", "zu", "ne", "pi", "sa", "do", "gu", "xe",
             "bri", "tor", "ven", "qua", "lux", "pro", "max", "ion", "cor", "del", "fin"]

KEY_SYNONYMS = {
    "Model Part Number": ["MPN", "Mfr. Part #", "Manufacturer Part Number", "Part No.",
                          "Mfg Part #", "Model #"],
    "UPC": ["UPC Code", "Universal Product Code", "UPC/EAN", "Barcode", "GTIN"],
}

JUNK_NAMES = ["Shipping", "Availability", "Condition", "Ships From", "Customer Rating",
              "In Stock", "Return Policy", "Seller SKU", "Item Number", "Gift Wrap",
              "Payment", "Delivery"]

JUNK_WORDS = ["yes", "no", "free", "new", "used", "days", "ground", "express", "stars",
              "in", "stock", "refurbished", "1", "2", "3", "5", "10", "30", "ok", "store"]


class InfeasibleConfig(ValueError):
    pass


@dataclass
class SynthConfig:
    categories: int = 6
    merchants: int = 20
    attributes: int = 10
    key_attributes: list[str] = field(default_factory=lambda: ["Model Part Number", "UPC"])
    synonym_pool: int = 4
    products_per_category: int = 200
    offers_per_product: tuple[int, int] = (3, 15)
    match_fraction: float = 0.6
    p_identity: float = 0.15
    noise_rate: float = 0.2
    perturbation_rate: float = 0.1
    format_rate: float = 0.1
    attribute_presence: float = 0.9
    upc_presence: float = 0.6
    merchant_skew: float = 1.0
    segments: int = 1
    values_per_slice: int = 8
    emit_pages: bool = True

    @classmethod
    def from_dict(cls, d: dict) -> "SynthConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise InfeasibleConfig(f"unknown config keys: {sorted(unknown)}")
        d = dict(d)
        if "offers_per_product" in d:
            d["offers_per_product"] = tuple(d["offers_per_product"])
        return cls(**d)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["offers_per_product"] = list(self.offers_per_product)
        return d

    def check(self):
        if self.categories < 1 or self.merchants < 1 or self.products_per_category < 1:
            raise InfeasibleConfig("need at least one category, merchant and product")
        if self.attributes < 1:
            raise InfeasibleConfig("need at least one descriptive attribute")
        if self.attributes > len(ATTRIBUTE_NAMES):
            raise InfeasibleConfig(f"at most {len(ATTRIBUTE_NAMES)} attributes per category")
        if self.p_identity < 1.0 and self.synonym_pool < 1:
            raise InfeasibleConfig("synonym pool is empty but p_identity < 1")
        if self.synonym_pool > len(_synonym_candidates("Capacity")):
            raise InfeasibleConfig(f"synonym pool larger than {len(_synonym_candidates('Capacity'))}")
        for k in self.key_attributes:
            if k in KEY_SYNONYMS and self.synonym_pool > len(KEY_SYNONYMS[k]):
                raise InfeasibleConfig(f"synonym pool larger than available names for {k!r}")
        lo, hi = self.offers_per_product
        if lo < 1 or hi < lo:
            raise InfeasibleConfig("offers_per_product must be 1 <= lo <= hi")
        if self.segments < 1 or self.segments > self.merchants:
            raise InfeasibleConfig("segments must be between 1 and the number of merchants")
        for name in ("match_fraction", "p_identity", "noise_rate", "perturbation_rate",
                     "format_rate", "attribute_presence", "upc_presence"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise InfeasibleConfig(f"{name} must lie in [0, 1]")


def biased_config(**overrides) -> SynthConfig:
    """Merchants each sell one of four product segments."""
    base = dict(segments=4, categories=4, merchants=16, products_per_category=200)
    base.update(overrides)
    return SynthConfig(**base)


@dataclass
class GroundTruth:
    correspondences: set[CandidateTuple]
    synonyms: dict[tuple[str, str], dict[str, str]]
    products: dict[str, Product]
    keys: dict[tuple[str, str], list[str]]

    def cross_name(self) -> set[CandidateTuple]:
        from .matcher import is_name_identity
        return {c for c in self.correspondences if not is_name_identity(c)}

    def to_json(self) -> str:
        rec = {
            "correspondences": sorted(list(c) for c in self.correspondences),
            "synonyms": [{"merchant": m, "category": c, "names": names}
                         for (m, c), names in sorted(self.synonyms.items())],
            "products": [{"id": p.product_id, "category": p.category,
                          "keys": self.keys.get((p.category, p.product_id), []),
                          "spec": [list(x) for x in p.spec]}
                         for p in self.products.values()],
        }
        return json.dumps(rec, ensure_ascii=False, indent=1) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "GroundTruth":
        rec = json.loads(text)
        corr = {CandidateTuple(*c) for c in rec["correspondences"]}
        syn = {(s["merchant"], s["category"]): s["names"] for s in rec["synonyms"]}
        products, keys = {}, {}
        for p in rec["products"]:
            products[p["id"]] = Product(p["id"], p["category"], tuple(tuple(x) for x in p["spec"]))
            if p.get("keys"):
                keys[(p["category"], p["id"])] = list(p["keys"])
        return cls(corr, syn, products, keys)

    def product_by_key(self) -> dict[tuple[str, str], Product]:
        """Planted products indexed by every normalized key value they carry."""
        out = {}
        for (cat, pid), ks in self.keys.items():
            for k in ks:
                out.setdefault((cat, k), self.products[pid])
        return out


def _abbrev(name: str) -> str:
    return " ".join(w[:3] + "." if len(w) > 4 else w for w in name.split())


def _synonym_candidates(name: str) -> list[str]:
    return [f"Item {name}", f"{name} Details", _abbrev(name) + " (spec)", f"Product {name}",
            f"{name} Info", f"Mfr {name}", f"{_abbrev(name)} #", f"Listed {name}"]


def _pseudo_word(rng, used: set[str]) -> str:
    while True:
        w = "".join(rng.choice(SYLLABLES, size=int(rng.integers(2, 4))))
        if w not in used:
            used.add(w)
            return w


@dataclass
class _Attr:
    name: str
    kind: str            # "unit" | "word" | "mpn" | "upc"
    slices: list[list[str]] = field(default_factory=list)
    weights: np.ndarray | None = None
    unit: str = ""
    rank: int = 0        # position within its family


def _zipf(n: int, s: float = 1.0) -> np.ndarray:
    w = 1.0 / np.arange(1, n + 1) ** s
    return w / w.sum()


def _build_attributes(rng, cfg: SynthConfig, n_slices: int) -> list[_Attr]:
    names = list(rng.choice(ATTRIBUTE_NAMES, size=cfg.attributes, replace=False))
    used_words: set[str] = set()
    attrs = []
    for fam_start in range(0, cfg.attributes, 2):
        fam_names = names[fam_start:fam_start + 2]
        kind = "unit" if rng.random() < 0.5 else "word"
        unit = str(rng.choice(UNITS))
        size = cfg.values_per_slice * n_slices
        if kind == "unit":
            nums = rng.choice(np.arange(1, 4000), size=size, replace=False)
            pool = [str(int(x)) for x in nums]
        else:
            pool = [_pseudo_word(rng, used_words) for _ in range(size)]
        slices = [pool[i * cfg.values_per_slice:(i + 1) * cfg.values_per_slice]
                  for i in range(n_slices)]
        for r, name in enumerate(fam_names):
            attrs.append(_Attr(str(name), kind, slices, _zipf(cfg.values_per_slice), unit, r))
    return attrs


def _product_value(rng, attr: _Attr, segment: int, n_slices: int) -> str:
    sl = attr.slices[(segment + attr.rank) % n_slices]
    if attr.kind == "unit":
        return f"{sl[rng.choice(len(sl), p=attr.weights)]} {attr.unit.upper()}"
    k = 1 if rng.random() < 0.6 else 2
    idx = rng.choice(len(sl), size=k, replace=False, p=attr.weights)
    return " ".join(sl[i].capitalize() for i in idx)


def _render(rng, value: str, kind: str, fmt: str, perturb: bool) -> str:
    """Merchant-specific rendering plus an optional per-offer perturbation."""
    toks = value.split()
    if kind == "unit" and len(toks) == 2:
        if fmt == "glued":
            toks = [toks[0] + toks[1].lower()]
        elif fmt == "bare":
            toks = [toks[0]]
        elif fmt == "approx":
            toks = toks + ["approx."]
    elif kind == "word" and fmt == "upper":
        toks = [t.upper() for t in toks]
    elif kind == "mpn" and fmt == "bare":
        toks = [t.replace("-", "") for t in toks]
    if perturb:
        choice = rng.integers(3)
        if choice == 0:
            toks = [t.lower() for t in toks]
        elif choice == 1 and len(toks) > 1:
            toks = toks[::-1]
        elif kind == "unit" and len(toks) >= 2:
            toks = [toks[0] + toks[1]] + toks[2:]
        else:
            toks = [t.upper() for t in toks]
    return " ".join(toks)


def _page_html(offer: Offer, extra_rows: list[tuple[str, str]]) -> str:
    rows = "".join(f"<tr><td>{escape(a)}:</td><td>{escape(v)}</td></tr>" for a, v in offer.spec)
    junk = "".join(f"<tr><th>{escape(a)}</th><td>{escape(v)}</td></tr>" for a, v in extra_rows)
    return (
        "<html><head><title>{t}</title></head><body>\n"
        "<table class='layout'><tr><td><a href='/'>Home</a></td><td>Cart</td><td>Help</td></tr>\n"
        "<tr><td><table class='specs'>{rows}</table></td><td>side</td></tr></table>\n"
        "<table class='price'>{junk}</table>\n"
        "<ul><li>Free returns</li></ul></body></html>\n"
    ).format(t=escape(offer.title), rows=rows, junk=junk)


def generate_synthetic(cfg: SynthConfig | None = None, seed: int = 42) -> tuple[Corpus, GroundTruth]:
    """Seeded corpus with fully populated offer specs, plus its ground truth."""
    corpus, truth, _ = _generate(cfg or SynthConfig(), seed)
    return corpus, truth


def _generate(cfg: SynthConfig, seed: int):
    cfg.check()
    rng = np.random.Generator(np.random.PCG64(seed))
    n_slices = max(cfg.segments, 2)
    merchants = [f"merchant{m:02d}.example.com" for m in range(cfg.merchants)]

    schemas, products, offers, matches = [], [], [], []
    synonyms: dict[tuple[str, str], dict[str, str]] = {}
    keys: dict[tuple[str, str], str] = {}
    pages: dict[str, str] = {}
    offer_seq = 0

    for ci in range(cfg.categories):
        category = f"Category {ci + 1:02d}"
        attrs = _build_attributes(rng, cfg, n_slices)
        for k in cfg.key_attributes:
            attrs.append(_Attr(k, "upc" if k == "UPC" else "mpn"))
        schema = CatalogSchema(category, tuple(a.name for a in attrs), tuple(cfg.key_attributes))
        schemas.append(schema)

        taken = {a.name.casefold() for a in attrs}
        pools: dict[str, list[str]] = {}
        for a in attrs:
            cands = KEY_SYNONYMS.get(a.name) or _synonym_candidates(a.name)
            pool = [s for s in cands if s.casefold() not in taken][:cfg.synonym_pool]
            if cfg.p_identity < 1.0 and len(pool) < cfg.synonym_pool:
                raise InfeasibleConfig(f"not enough distinct synonyms for {a.name!r}")
            taken.update(s.casefold() for s in pool)
            pools[a.name] = pool

        # merchant segment, popularity, naming and formatting for this category
        order = rng.permutation(cfg.merchants)
        seg_of = {merchants[m]: i % cfg.segments for i, m in enumerate(order)}
        popularity = {merchants[m]: w for m, w in zip(order, _zipf(cfg.merchants, cfg.merchant_skew))}
        formats: dict[tuple[str, str], str] = {}
        for m in merchants:
            names = {}
            for a in attrs:
                if rng.random() < cfg.p_identity or not pools[a.name]:
                    names[a.name] = a.name
                else:
                    names[a.name] = str(rng.choice(pools[a.name]))
                fmt = "plain"
                if rng.random() < cfg.format_rate:
                    fmt = str(rng.choice({"unit": ["glued", "bare", "approx"], "word": ["upper"],
                                          "mpn": ["bare"], "upc": ["plain"]}[a.kind]))
                formats[(m, a.name)] = fmt
            synonyms[(m, category)] = names
        junk_of = {m: list(rng.choice(JUNK_NAMES, size=3, replace=False)) for m in merchants}

        for pi in range(cfg.products_per_category):
            pid = f"c{ci + 1:02d}p{pi:04d}"
            segment = int(rng.integers(cfg.segments))
            spec = []
            for a in attrs:
                if a.kind == "mpn":
                    letters = "".join(rng.choice(list("ABCDEFGHJKLMNPRSTWXZ"), size=2))
                    value = f"{letters}-{int(rng.integers(1000, 9999))}{ci + 1:02d}{pi:03d}"
                elif a.kind == "upc":
                    value = f"{int(rng.integers(10**11, 10**12 - 1)):012d}"
                else:
                    value = _product_value(rng, a, segment, n_slices)
                spec.append((a.name, value))
            product = Product(pid, category, tuple(spec))
            products.append(product)
            keys[(category, pid)] = [normalize_key(dict(spec)[k]) for k in schema.key_attributes]

            sellers = [m for m in merchants if seg_of[m] == segment]
            w = np.array([popularity[m] for m in sellers])
            n_offers = int(rng.integers(cfg.offers_per_product[0], cfg.offers_per_product[1] + 1))
            for _ in range(n_offers):
                merchant = sellers[int(rng.choice(len(sellers), p=w / w.sum()))]
                offer_seq += 1
                oid = f"o{offer_seq:06d}"
                names = synonyms[(merchant, category)]
                ospec = []
                for a in attrs:
                    presence = cfg.upc_presence if a.kind == "upc" else cfg.attribute_presence
                    if a.kind != "mpn" and rng.random() >= presence:
                        continue
                    perturb = rng.random() < cfg.perturbation_rate
                    ospec.append((names[a.name], _render(rng, dict(spec)[a.name], a.kind,
                                                         formats[(merchant, a.name)], perturb)))
                for jn in junk_of[merchant]:
                    if rng.random() < cfg.noise_rate:
                        words = rng.choice(JUNK_WORDS, size=int(rng.integers(1, 3)))
                        ospec.append((str(jn), " ".join(str(x) for x in words)))
                order_idx = rng.permutation(len(ospec))
                ospec = [ospec[i] for i in order_idx]
                price = f"{rng.integers(20, 900)}.{rng.integers(0, 100):02d}"
                url = f"http://{merchant}/item/{oid}"
                title = f"{dict(spec)[attrs[0].name]} {category} {dict(spec).get('Model Part Number', '')}".strip()
                full = Offer(oid, merchant, category, title, price, url, None, tuple(ospec))
                if cfg.emit_pages:
                    pages[oid] = _page_html(full, [("Price", f"${price}")])
                offers.append(full)
                if rng.random() < cfg.match_fraction:
                    matches.append(MatchRecord(oid, pid))

    corpus = Corpus.build(schemas, products, offers, matches)
    truth = _truth(corpus, synonyms, keys)
    _self_check(corpus, truth)
    return corpus, truth, pages


def _truth(corpus: Corpus, synonyms, keys) -> GroundTruth:
    """Planted correspondences that the historical matches make discoverable."""
    offer_names: dict[tuple[str, str], set[str]] = {}
    catalog_names: dict[str, set[str]] = {}
    for m in corpus.matches:
        o = corpus.offers[m.offer_id]
        offer_names.setdefault((o.merchant, o.category), set()).update(a for a, _ in o.spec)
        catalog_names.setdefault(o.category, set()).update(
            a for a, _ in corpus.products[m.product_id].spec)
    corr = set()
    for (merchant, category), names in synonyms.items():
        present = offer_names.get((merchant, category), set())
        for catalog_attr, offer_attr in names.items():
            if offer_attr in present and catalog_attr in catalog_names.get(category, ()):
                corr.add(CandidateTuple(catalog_attr, offer_attr, merchant, category))
    return GroundTruth(corr, synonyms, dict(corpus.products), keys)


def _self_check(corpus: Corpus, truth: GroundTruth):
    from .matcher import generate_candidates
    cands = set(generate_candidates(corpus))
    missing = truth.correspondences - cands
    if missing:
        raise AssertionError(f"{len(missing)} planted correspondences are not candidates")


def write_synthetic(out_dir, cfg: SynthConfig | None = None, seed: int = 42) -> dict:
    """Generate a corpus and write it in the on-disk formats under ``out_dir``."""
    cfg = cfg or SynthConfig()
    full, truth, pages = _generate(cfg, seed)
    # with pages, the feed carries no specs: they have to be extracted
    feed = full.with_offers(replace(o, spec=()) for o in full.offers.values()) if pages else full
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    save_catalog(out / "catalog.jsonl", feed.schemas.values(), feed.products.values())
    save_offers(out / "offers.jsonl", feed.offers.values())
    save_matches(out / "matches.jsonl", feed.matches)
    (out / "truth.json").write_text(truth.to_json(), encoding="utf-8")
    (out / "synth_config.json").write_text(
        json.dumps({**cfg.to_dict(), "seed": seed}, indent=1) + "\n", encoding="utf-8")
    if pages:
        store = out / "pages"
        store.mkdir(exist_ok=True)
        index = []
        for oid, html in pages.items():
            name = page_filename(full.offers[oid].url)
            (store / name).write_text(html, encoding="utf-8")
            index.append({"offer": oid, "file": name})
        write_jsonl(store / "page_index.jsonl", index)
    return {"categories": len(feed.schemas), "products": len(feed.products),
            "offers": len(feed.offers), "matches": len(feed.matches), "pages": len(pages),
            "planted_correspondences": len(truth.correspondences),
            "planted_cross_name": len(truth.cross_name())}


__all__ = ["GroundTruth", "InfeasibleConfig", "SynthConfig", "biased_config",
           "generate_synthetic", "write_synthetic"]
