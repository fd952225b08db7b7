import json

import pytest

from prodsynth.corpus import (CatalogSchema, Corpus, CorpusError, MatchRecord, Offer, Product,
                              load_catalog, load_corpus, load_matches, load_offers, save_catalog,
                              save_matches, save_offers)


def write_lines(path, records):
    path.write_text("".join(json.dumps(r) + "\n" for r in records), encoding="utf-8")
    return path


def test_figure5_catalog_loads(data_dir):
    schemas, products = load_catalog(data_dir / "figure5" / "catalog.jsonl")
    assert len(schemas) == 1 and len(products) == 6
    assert schemas[0].attributes == ("Brand", "Model", "Speed", "Interface")


def test_figure3_feed_loads_with_empty_specs(data_dir):
    offers = load_offers(data_dir / "figure3_offers.jsonl")
    assert len(offers) == 3
    assert all(o.spec == () for o in offers)
    assert offers[1].merchant == "lacc.com"


def test_figure5_matches(figure5):
    assert len(figure5.matches) == 4
    assert figure5.product_of["off2"] == "hd3"


def test_empty_files(tmp_path):
    empty = tmp_path / "empty.jsonl"
    empty.write_text("")
    assert load_catalog(empty) == ([], [])
    assert load_offers(empty) == []
    assert load_matches(empty, {}, {}) == []


def test_product_attribute_outside_schema(tmp_path):
    p = write_lines(tmp_path / "c.jsonl", [
        {"kind": "schema", "category": "HD", "attributes": ["Brand"], "keys": []},
        {"kind": "product", "id": "p1", "category": "HD", "spec": [["Speed", "5400"]]},
    ])
    with pytest.raises(CorpusError):
        load_catalog(p)


def test_unknown_category_and_duplicate_product(tmp_path):
    p = write_lines(tmp_path / "c.jsonl", [
        {"kind": "product", "id": "p1", "category": "HD", "spec": []}])
    with pytest.raises(CorpusError):
        load_catalog(p)
    p = write_lines(tmp_path / "d.jsonl", [
        {"kind": "schema", "category": "HD", "attributes": ["Brand"], "keys": []},
        {"kind": "product", "id": "p1", "category": "HD", "spec": []},
        {"kind": "product", "id": "p1", "category": "HD", "spec": []}])
    with pytest.raises(CorpusError):
        load_catalog(p)


def test_schema_invariants():
    with pytest.raises(CorpusError):
        CatalogSchema("HD", ("Brand", "Brand"))
    with pytest.raises(CorpusError):
        CatalogSchema("HD", ("Brand", " "))
    with pytest.raises(CorpusError):
        CatalogSchema("HD", ("Brand",), ("UPC",))
    s = CatalogSchema("HD", ("Brand", "UPC"))
    assert s.key_attributes == ("UPC",)


def test_offer_missing_seller_skipped_or_strict(tmp_path):
    p = write_lines(tmp_path / "o.jsonl", [
        {"id": "a", "merchant": "m", "category": "HD", "title": "x", "spec": []},
        {"id": "b", "merchant": "", "category": "HD", "title": "y", "spec": []}])
    warnings = []
    offers = load_offers(p, warnings=warnings)
    assert [o.offer_id for o in offers] == ["a"]
    assert len(warnings) == 1
    with pytest.raises(CorpusError):
        load_offers(p, strict=True)


def test_malformed_line(tmp_path):
    p = tmp_path / "o.jsonl"
    p.write_text('{"id": "a", "merchant": "m", "category": "C", "spec": []}\n{oops\n')
    warnings = []
    assert len(load_offers(p, warnings=warnings)) == 1
    assert "2" in warnings[0]
    with pytest.raises(CorpusError):
        load_offers(p, strict=True)


def test_duplicate_offer_ids_abort(tmp_path):
    rec = {"id": "a", "merchant": "m", "category": "C", "spec": []}
    with pytest.raises(CorpusError):
        load_offers(write_lines(tmp_path / "o.jsonl", [rec, rec]))


def test_match_errors(tmp_path, data_dir):
    d = data_dir / "figure5"
    corpus = load_corpus(d / "catalog.jsonl", d / "offers.jsonl")
    bad = [
        [{"offer": "nope", "product": "hd1"}],
        [{"offer": "off1", "product": "hd1"}, {"offer": "off1", "product": "hd2"}],
    ]
    for recs in bad:
        with pytest.raises(CorpusError):
            load_matches(write_lines(tmp_path / "m.jsonl", recs), corpus.offers, corpus.products)


def test_match_category_mismatch():
    schemas = [CatalogSchema("A", ("x",)), CatalogSchema("B", ("x",))]
    products = [Product("p", "A", ())]
    offers = [Offer("o", "m", "B", "t")]
    with pytest.raises(CorpusError):
        Corpus.build(schemas, products, offers, [MatchRecord("o", "p")])


def test_round_trip(tmp_path, small_synthetic):
    corpus, _ = small_synthetic
    save_catalog(tmp_path / "c.jsonl", corpus.schemas.values(), corpus.products.values())
    save_offers(tmp_path / "o.jsonl", corpus.offers.values())
    save_matches(tmp_path / "m.jsonl", corpus.matches)
    again = load_corpus(tmp_path / "c.jsonl", tmp_path / "o.jsonl", tmp_path / "m.jsonl")
    assert again.schemas == corpus.schemas
    assert again.products == corpus.products
    assert again.offers == corpus.offers
    assert again.matches == corpus.matches


def test_validation_independent_of_order(tmp_path):
    recs = [{"id": f"o{i}", "merchant": "m" if i % 3 else "", "category": "C", "spec": []}
            for i in range(9)]
    a = {o.offer_id for o in load_offers(write_lines(tmp_path / "a.jsonl", recs))}
    b = {o.offer_id for o in load_offers(write_lines(tmp_path / "b.jsonl", recs[::-1]))}
    assert a == b
