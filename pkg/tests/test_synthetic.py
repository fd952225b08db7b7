import hashlib

import pytest

from prodsynth.matcher import DegenerateTrainingSet, generate_candidates, is_name_identity, learn
from prodsynth.synthetic import (GroundTruth, InfeasibleConfig, SynthConfig, biased_config,
                                 generate_synthetic, write_synthetic)

from conftest import small_config


def digest(d):
    h = hashlib.sha256()
    for p in sorted(d.rglob("*")):
        if p.is_file():
            h.update(p.relative_to(d).as_posix().encode())
            h.update(p.read_bytes())
    return h.hexdigest()


def test_byte_identical_corpora(tmp_path):
    cfg = small_config(emit_pages=True)
    write_synthetic(tmp_path / "a", cfg, seed=3)
    write_synthetic(tmp_path / "b", cfg, seed=3)
    write_synthetic(tmp_path / "c", cfg, seed=4)
    assert digest(tmp_path / "a") == digest(tmp_path / "b")
    assert digest(tmp_path / "a") != digest(tmp_path / "c")


def test_truth_is_discoverable(small_synthetic):
    corpus, truth = small_synthetic
    assert truth.correspondences <= set(generate_candidates(corpus))
    assert truth.cross_name() and all(not is_name_identity(c) for c in truth.cross_name())


def test_one_name_per_merchant_attribute(small_synthetic):
    corpus, truth = small_synthetic
    for (m, c), names in truth.synonyms.items():
        assert len(set(names.values())) == len(names)


def test_truth_json_round_trip(small_synthetic):
    _, truth = small_synthetic
    again = GroundTruth.from_json(truth.to_json())
    assert again.correspondences == truth.correspondences
    assert again.product_by_key().keys() == truth.product_by_key().keys()


def test_degenerate_path():
    # one attribute and no key attributes: each (merchant, category) offers a
    # single candidate, the name identity, so there are no negatives
    cfg = small_config(noise_rate=0.0, perturbation_rate=0.0, p_identity=1.0, format_rate=0.0,
                       attributes=1, key_attributes=[])
    corpus, _ = generate_synthetic(cfg, seed=1)
    cands = generate_candidates(corpus)
    assert cands and all(is_name_identity(c) for c in cands)
    with pytest.raises(DegenerateTrainingSet):
        learn(corpus)


def test_all_identity_names_still_yield_negatives():
    cfg = small_config(noise_rate=0.0, perturbation_rate=0.0, p_identity=1.0, format_rate=0.0)
    corpus, truth = generate_synthetic(cfg, seed=1)
    assert truth.cross_name() == set()
    result = learn(corpus)
    assert 0 < result.counters()["positives"] < result.counters()["labeled"]


@pytest.mark.parametrize("kw", [dict(synonym_pool=99), dict(merchants=0), dict(attributes=999),
                                dict(offers_per_product=(5, 2)), dict(noise_rate=1.5),
                                dict(segments=50)])
def test_infeasible_configs(kw):
    with pytest.raises(InfeasibleConfig):
        generate_synthetic(SynthConfig(**kw))


def test_config_dict_round_trip():
    cfg = biased_config()
    assert SynthConfig.from_dict(cfg.to_dict()) == cfg
    with pytest.raises(InfeasibleConfig):
        SynthConfig.from_dict({"bogus": 1})


def test_default_corpus_has_enough_cross_name_truth():
    _, truth = generate_synthetic(SynthConfig(emit_pages=False), seed=42)
    assert len(truth.cross_name()) >= 1000
