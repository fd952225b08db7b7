"""Learn correspondences on a synthetic corpus and build products from offers.

Generates a corpus with planted attribute synonyms, trains the classifier
from auto-labeled name identities, compares it with the single-feature
baseline, then reconciles, clusters and fuses the offers.

    python demos/03_end_to_end.py [seed]
"""

import sys
from collections import Counter

from prodsynth import SynthConfig, generate_synthetic, learn, select_correspondences, synthesize
from prodsynth.baselines import single_feature_correspondences
from prodsynth.evaluation import coverage_at_precision, precision_coverage, product_accuracy
from prodsynth.matcher import is_name_identity, resolve_conflicts

seed = int(sys.argv[1]) if len(sys.argv) > 1 else 7
cfg = SynthConfig(categories=3, merchants=12, attributes=8, products_per_category=120,
                  emit_pages=False)
corpus, truth = generate_synthetic(cfg, seed=seed)
print(f"{len(corpus.products)} products, {len(corpus.offers)} offers, "
      f"{len(corpus.matches)} matches, {len(truth.cross_name())} planted cross-name synonyms")

result = learn(corpus)
labels = Counter(e.label for e in result.examples)
print(f"{len(result.candidates)} candidates, auto-labeled {labels[1]} positive / {labels[0]} negative")
print("weights:", {n: round(float(w), 2) for n, w in zip(result.model.feature_names, result.model.weights)})

selected = select_correspondences(result.scored, theta=0.5)
cross = [c for c in selected if not is_name_identity(c.candidate)]
for c in cross[:5]:
    k = c.candidate
    print(f"  {k.merchant:>14}  {k.offer_attribute!r:>22} -> {k.catalog_attribute!r:<22} {c.score:.3f}")

# Coverage at 90% precision, name identities excluded.
clf = precision_coverage(resolve_conflicts(result.scored), truth.correspondences)
js = precision_coverage(
    resolve_conflicts(single_feature_correspondences(result.candidates, result.X, "js_mc")),
    truth.correspondences)
print(f"coverage at precision 0.9: classifier {coverage_at_precision(clf, 0.9)}, "
      f"js_mc {coverage_at_precision(js, 0.9)}")

products, report = synthesize(corpus.offers.values(), selected, corpus.schemas)
print("synthesis:", report)
print("accuracy:", product_accuracy(products, truth))
print("example:", products[0].key_attribute, products[0].key, dict(products[0].spec))
