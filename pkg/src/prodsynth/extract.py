"""Attribute-value extraction from stored merchant landing pages.

Only two-cell table rows are harvested: first cell is the attribute name,
second the value.  Cells that contain a nested table do not count, so a
layout table wrapping a spec table yields nothing of its own.
"""

from __future__ import annotations

import hashlib
import json
import logging
import re
from dataclasses import dataclass, replace
from pathlib import Path

import lxml.html
from lxml import etree

from .corpus import Offer, Pair

log = logging.getLogger(__name__)

_WS = re.compile(r"\s+")
_CELLS = ("td", "th")


@dataclass(frozen=True)
class RawSpecification:
    offer_id: str
    pairs: tuple[Pair, ...] = ()
    source: str | None = None


def _text(cell) -> str:
    parts = cell.xpath(".//text()[not(parent::script or parent::style)]")
    return _WS.sub(" ", " ".join(parts)).strip()


def _clean_name(text: str) -> str:
    if text.endswith(":"):
        text = text[:-1].rstrip()
    return text


def _own_cells(row):
    # direct td/th children only; rows of nested tables belong to those tables
    return [c for c in row if isinstance(c.tag, str) and c.tag.lower() in _CELLS]


def _parse(page):
    if isinstance(page, bytes):
        page = page.decode("utf-8", errors="replace")
    if not page.strip():
        return None
    try:
        return lxml.html.fromstring(page)
    except ValueError:
        # str input with an XML encoding declaration
        return lxml.html.fromstring(page.encode("utf-8"))


def extract_pairs(page, offer_id: str, source: str | None = None) -> RawSpecification:
    """Harvest ``(name, value)`` pairs from every two-cell row of ``page``."""
    try:
        root = _parse(page)
    except (etree.ParserError, ValueError) as exc:
        log.warning("unparseable page for offer %s: %s", offer_id, exc)
        return RawSpecification(offer_id, (), source)
    if root is None:
        return RawSpecification(offer_id, (), source)

    pairs: list[Pair] = []
    for row in root.iter("tr"):
        cells = _own_cells(row)
        if len(cells) != 2 or any(c.find(".//table") is not None for c in cells):
            continue
        name = _clean_name(_text(cells[0]))
        if not name:
            continue
        pairs.append((name, _text(cells[1])))
    return RawSpecification(offer_id, tuple(pairs), source)


def page_filename(url: str) -> str:
    """Stable page-store file name for an offer URL."""
    return hashlib.sha1(url.encode("utf-8")).hexdigest()[:16] + ".html"


def read_page_index(page_store) -> dict[str, str]:
    """Map offer ids to page files from ``page_index.jsonl``."""
    index_path = Path(page_store) / "page_index.jsonl"
    index: dict[str, str] = {}
    if not index_path.exists():
        return index
    with open(index_path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                rec = json.loads(line)
                index[str(rec["offer"])] = rec["file"]
    return index


def enrich_offers(offers, page_store, report: dict | None = None) -> list[Offer]:
    """Append page-extracted pairs to each offer's feed spec.

    Pages are located through ``page_index.jsonl``; offers without an index
    entry fall back to the URL-hash file name.  Offers whose page is missing
    are returned unchanged and counted in ``report["missing_pages"]``.
    """
    page_store = Path(page_store)
    index = read_page_index(page_store)
    report = {} if report is None else report
    report.setdefault("offers_in", 0)
    report.setdefault("pages_parsed", 0)
    report.setdefault("missing_pages", 0)
    report.setdefault("pairs_extracted", 0)

    out = []
    for offer in offers:
        report["offers_in"] += 1
        name = index.get(offer.offer_id)
        if name is None and offer.url:
            name = page_filename(offer.url)
        path = page_store / name if name else None
        if path is None or not path.is_file():
            report["missing_pages"] += 1
            out.append(offer)
            continue
        raw = extract_pairs(path.read_bytes(), offer.offer_id, str(name))
        report["pages_parsed"] += 1
        report["pairs_extracted"] += len(raw.pairs)
        out.append(replace(offer, spec=tuple(offer.spec) + raw.pairs))
    return out
