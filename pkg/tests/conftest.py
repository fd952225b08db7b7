from pathlib import Path

import pytest

from prodsynth.corpus import load_corpus
from prodsynth.synthetic import SynthConfig, generate_synthetic

DATA = Path(__file__).parent / "data"


def small_config(**kw) -> SynthConfig:
    base = dict(categories=2, merchants=6, attributes=6, products_per_category=40,
                offers_per_product=(2, 6), emit_pages=False)
    base.update(kw)
    return SynthConfig(**base)


@pytest.fixture(scope="session")
def data_dir():
    return DATA


@pytest.fixture
def figure5():
    d = DATA / "figure5"
    return load_corpus(d / "catalog.jsonl", d / "offers.jsonl", d / "matches.jsonl")


@pytest.fixture(scope="session")
def small_synthetic():
    return generate_synthetic(small_config(), seed=7)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
