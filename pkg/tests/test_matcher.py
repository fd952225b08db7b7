import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from prodsynth.corpus import CandidateTuple
from prodsynth.distsim import LN2, FeatureVector, feature_matrix
from prodsynth.matcher import (Correspondence, DegenerateTrainingSet, LabeledExample, LogisticModel,
                               build_training_set, fit_logistic, generate_candidates,
                               label_candidates, learn, predict, predict_all,
                               read_correspondences, select_correspondences, train,
                               write_correspondences)


def fv(js, jac):
    return FeatureVector(js, js, js, jac, jac, jac)


def cand(ap, ao, m="M", c="C"):
    return CandidateTuple(ap, ao, m, c)


def test_figure5_candidates(figure5):
    cands = generate_candidates(figure5)
    assert len(cands) == 8
    assert cands == sorted(cands, key=lambda c: (c.category, c.merchant, c.catalog_attribute,
                                                 c.offer_attribute))
    assert cand("Speed", "RPM", "drives.example.com", "Hard Drives") in cands


def test_no_matches_no_candidates(figure5):
    figure5.matches = []
    figure5._reindex()
    assert generate_candidates(figure5) == []


def test_labeling_rules():
    cs = [cand("Resolution", "Resolution"), cand("Resolution", "Res"), cand("Speed", "RPM"),
          cand("Speed", "Res"), cand("Zoom", " zoom ")]
    labels = label_candidates(cs)
    assert labels == {cs[0]: 1, cs[1]: 0, cs[4]: 1}
    assert build_training_set([], []) == []


def test_labeling_is_per_merchant_and_category():
    cs = [cand("A", "A", m="M1"), cand("A", "B", m="M2"), cand("A", "B", m="M1", c="D")]
    assert label_candidates(cs) == {cs[0]: 1}


def test_separable_training_accuracy():
    X = np.array([[0, 0, 0, 1, 1, 1]] * 100 + [[LN2, LN2, LN2, 0, 0, 0]] * 100, dtype=float)
    y = np.r_[np.ones(100), np.zeros(100)]
    model = fit_logistic(X, y)
    assert ((model.predict_proba(X) > 0.5) == (y == 1)).all()


def test_no_signal_gives_prior():
    X = np.zeros((200, 6))
    y = np.r_[np.ones(30), np.zeros(170)]
    model = fit_logistic(X, y)
    assert model.predict_proba(X)[0] == pytest.approx(0.15, abs=0.01)
    assert (model.feature_stds == 1.0).all()


def test_degenerate_training_sets():
    with pytest.raises(DegenerateTrainingSet):
        train([])
    ex = [LabeledExample(cand("A", "A"), fv(0.0, 1.0), 1)] * 3
    with pytest.raises(DegenerateTrainingSet):
        train(ex)


def test_zero_model_scores_half():
    model = LogisticModel(np.zeros(6), 0.0, np.zeros(6), np.ones(6))
    assert predict(model, cand("A", "B"), fv(0.3, 0.2)).score == 0.5


def test_score_monotone_in_js_mc():
    rng = np.random.default_rng(0)
    X = rng.random((300, 6))
    y = (X[:, 0] < 0.5).astype(float)
    model = fit_logistic(X, y)
    assert model.weights[0] < 0
    base = rng.random(6)
    grid = np.linspace(1, 0, 11)
    rows = np.tile(base, (11, 1))
    rows[:, 0] = grid
    scores = model.predict_proba(rows)
    assert (np.diff(scores) >= 0).all()


def test_affine_rescaling_invariance():
    rng = np.random.default_rng(1)
    X = rng.random((400, 6))
    y = (X[:, 0] + 0.5 * X[:, 3] + 0.2 * rng.standard_normal(400) > 0.8).astype(float)
    a = fit_logistic(X, y)
    X2 = X.copy()
    X2[:, 2] = 10 * X2[:, 2] + 3
    b = fit_logistic(X2, y)
    assert np.allclose(a.predict_proba(X), b.predict_proba(X2), atol=1e-9)


def test_training_deterministic(small_synthetic):
    corpus, _ = small_synthetic
    r1, r2 = learn(corpus), learn(corpus)
    assert r1.model.to_json() == r2.model.to_json()
    assert [c.score for c in r1.scored] == [c.score for c in r2.scored]


def test_model_json_round_trip(small_synthetic):
    model = learn(small_synthetic[0]).model
    again = LogisticModel.from_json(model.to_json())
    assert again.to_json() == model.to_json()
    assert list(__import__("json").loads(model.to_json())) == [
        "feature_names", "weights", "bias", "feature_means", "feature_stds", "info"]


def test_labeling_count_identity(small_synthetic):
    corpus, _ = small_synthetic
    cands = generate_candidates(corpus)
    ident = [c for c in cands if c.catalog_attribute.strip().casefold()
             == c.offer_attribute.strip().casefold()]
    keys = {(c.catalog_attribute.strip().casefold(), c.merchant, c.category) for c in ident}
    sharing = [c for c in cands if c not in ident
               and (c.catalog_attribute.strip().casefold(), c.merchant, c.category) in keys]
    assert len(label_candidates(cands)) == len(ident) + len(sharing)


def test_select_examples():
    s = [Correspondence(cand("Speed", "RPM"), 0.9), Correspondence(cand("Interface", "RPM"), 0.4),
         Correspondence(cand("Brand", "Maker"), 0.5), Correspondence(cand("Model", "Name"), 0.6)]
    assert select_correspondences(s, 1.0) == []
    kept = select_correspondences(s, 0.0)
    assert cand("Interface", "RPM") not in [c.candidate for c in kept]
    assert [c.score for c in select_correspondences(s[2:], 0.5)] == [0.6]
    tie = [Correspondence(cand("B", "x"), 0.7), Correspondence(cand("A", "x"), 0.7)]
    assert [c.candidate.catalog_attribute for c in select_correspondences(tie, 0.5)] == ["A"]
    assert len(select_correspondences(tie, 0.5, resolve=False)) == 2


@given(st.lists(st.floats(0, 1), max_size=30), st.floats(0, 1), st.floats(0, 1))
def test_selection_antitone(scores, t1, t2):
    lo, hi = sorted((t1, t2))
    s = [Correspondence(cand(f"A{i % 3}", f"B{i}"), x) for i, x in enumerate(scores)]
    a = select_correspondences(s, lo, resolve=False)
    b = select_correspondences(s, hi, resolve=False)
    assert set(map(id, b)) <= set(map(id, a))


def test_correspondence_io(tmp_path):
    items = [Correspondence(cand("A", "B"), 0.25), Correspondence(cand("C", "D"), 0.5, "nb")]
    write_correspondences(tmp_path / "c.jsonl", items)
    assert read_correspondences(tmp_path / "c.jsonl") == items


def test_figure5_scored_by_model_trained_on_synthetic(small_synthetic, figure5):
    model = learn(small_synthetic[0]).model
    cands = generate_candidates(figure5)
    X, _ = feature_matrix(cands, figure5)
    scored = {c.candidate[:2]: c.score for c in predict_all(model, cands, X)}
    assert scored[("Speed", "RPM")] > scored[("Interface", "RPM")]
    assert scored[("Speed", "RPM")] > 0.5
    assert scored[("Interface", "Int. Type")] > 0.5
    kept = {c.candidate[:2] for c in select_correspondences(predict_all(model, cands, X), 0.5)}
    assert {("Speed", "RPM"), ("Interface", "Int. Type")} <= kept
