import json

from prodsynth.corpus import Offer
from prodsynth.extract import enrich_offers, extract_pairs, page_filename


def page(rows):
    return "<html><body><table>" + "".join(rows) + "</table></body></html>"


def test_two_column_rows():
    html = page(["<tr><td>Capacity</td><td>500GB</td></tr>", "<tr><td>RPM</td><td>7200</td></tr>"])
    assert extract_pairs(html, "o").pairs == (("Capacity", "500GB"), ("RPM", "7200"))


def test_three_column_rows_ignored():
    html = page(["<tr><td>a</td><td>b</td><td>c</td></tr>"])
    assert extract_pairs(html, "o").pairs == ()


def test_trailing_colon_and_whitespace():
    html = page(["<tr><th>  Hard Disk\n  Size: </th><td> 500   <b>GB</b> </td></tr>"])
    assert extract_pairs(html, "o").pairs == (("Hard Disk Size", "500 GB"),)


def test_layout_table_emits_only_inner_rows():
    html = ("<table><tr><td><table><tr><td>Speed</td><td>5400</td></tr></table></td>"
            "<td>side</td></tr></table>")
    assert extract_pairs(html, "o").pairs == (("Speed", "5400"),)


def test_malformed_markup_is_repaired():
    assert extract_pairs("<table><tr><td>Color:<td>Black</table>", "o").pairs == (("Color", "Black"),)


def test_empty_name_skipped_and_garbage_input():
    assert extract_pairs(page(["<tr><td> </td><td>x</td></tr>"]), "o").pairs == ()
    assert extract_pairs("", "o").pairs == ()
    assert extract_pairs(b"\xff\xfe not html", "o").pairs == ()


def test_deterministic_bytes():
    html = page([f"<tr><td>a{i}</td><td>{i}</td></tr>" for i in range(20)]).encode()
    assert extract_pairs(html, "o") == extract_pairs(html, "o")


def test_enrich_offers(tmp_path):
    store = tmp_path / "pages"
    store.mkdir()
    offers = [Offer("o1", "m", "C", "t", url="http://m/1", spec=(("Speed", "5400"),)),
              Offer("o2", "m", "C", "t", url="http://m/2"),
              Offer("o3", "m", "C", "t")]
    rows = ["<tr><td>Speed</td><td>5400 rpm</td></tr>"] + \
        [f"<tr><td>A{i}</td><td>v{i}</td></tr>" for i in range(4)]
    (store / page_filename("http://m/1")).write_text(page(rows))
    (store / "second.html").write_text(page(rows[1:3]))
    (store / "page_index.jsonl").write_text(json.dumps({"offer": "o2", "file": "second.html"}) + "\n")
    report = {}
    out = enrich_offers(offers, store, report)
    # feed pairs first, duplicates by name kept
    assert out[0].spec[:2] == (("Speed", "5400"), ("Speed", "5400 rpm"))
    assert len(out[0].spec) == 6
    assert out[1].spec == (("A0", "v0"), ("A1", "v1"))
    assert out[2] == offers[2]
    assert report == {"offers_in": 3, "pages_parsed": 2, "missing_pages": 1, "pairs_extracted": 7}
