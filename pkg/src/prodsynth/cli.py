"""Command line entry point.

    prodsynth generate   --out DIR [--seed N]
    prodsynth extract    --offers F --pages DIR --out DIR
    prodsynth learn      --catalog F --offers F --matches F --out DIR [--baselines]
    prodsynth synthesize --catalog F --offers F --correspondences F --out DIR
    prodsynth eval       --truth F --scored DIR [--products F] --out DIR

Every path can also come from a JSON ``--config`` file whose keys are the
``RunConfig`` fields; command-line flags win over the file.  Exit codes:
0 success, 2 bad input or configuration, 3 degenerate data.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .corpus import CorpusError, load_corpus, load_offers, offer_record, write_jsonl
from .matcher import DegenerateTrainingSet

log = logging.getLogger("prodsynth")

EXIT_OK, EXIT_INPUT, EXIT_DEGENERATE = 0, 2, 3


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    catalog: str | None = None
    offers: str | None = None
    matches: str | None = None
    pages: str | None = None
    out: str | None = None
    correspondences: str | None = None
    truth: str | None = None
    products: str | None = None
    scored: str | None = None
    theta: float = 0.5
    seed: int = 42
    strict: bool = False
    restricted: bool = True
    resolve_conflicts: bool = True
    lam: float = 1e-4
    max_iters: int = 10_000
    baselines: bool = False
    features: bool = False
    methods: list[str] | None = None
    synth: dict = field(default_factory=dict)

    @classmethod
    def load(cls, path) -> "RunConfig":
        try:
            rec = json.loads(Path(path).read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except json.JSONDecodeError as e:
            raise ConfigError(f"config file {path} is not valid JSON: {e}") from None
        if not isinstance(rec, dict):
            raise ConfigError("config file must hold a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(rec) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {unknown}")
        return cls(**rec)

    def require(self, *names):
        missing = [n for n in names if getattr(self, n) in (None, "")]
        if missing:
            raise ConfigError("missing required settings: " + ", ".join(missing))
        for n in names:
            if n in ("out",):
                continue
            if not Path(getattr(self, n)).exists():
                raise ConfigError(f"{n} path does not exist: {getattr(self, n)}")


def _out_dir(cfg: RunConfig) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_report(out: Path, command: str, counters: dict, cfg: RunConfig):
    rec = {"command": command, "counters": counters, "config": asdict(cfg)}
    path = out / f"run_report.{command}.json"
    path.write_text(json.dumps(rec, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    log.info("wrote %s", path)


# ---------------------------------------------------------------- subcommands


def cmd_generate(cfg: RunConfig) -> int:
    from .synthetic import SynthConfig, write_synthetic

    cfg.require("out")
    synth = SynthConfig.from_dict(cfg.synth)
    counts = write_synthetic(cfg.out, synth, cfg.seed)
    log.info("generated %s", counts)
    _write_report(Path(cfg.out), "generate", counts, cfg)
    return EXIT_OK


def cmd_extract(cfg: RunConfig) -> int:
    from .extract import enrich_offers

    cfg.require("offers", "pages", "out")
    if not Path(cfg.pages).is_dir():
        raise ConfigError(f"page store is not a directory: {cfg.pages}")
    warnings: list = []
    offers = load_offers(cfg.offers, cfg.strict, warnings)
    for w in warnings:
        log.warning("%s", w)
    report: dict = {}
    enriched = enrich_offers(offers, cfg.pages, report)
    out = _out_dir(cfg)
    write_jsonl(out / "offers.enriched.jsonl", (offer_record(o) for o in enriched))
    report["rejected_records"] = len(warnings)
    log.info("extract %s", report)
    _write_report(out, "extract", report, cfg)
    return EXIT_OK


def cmd_learn(cfg: RunConfig) -> int:
    from .baselines import dumas_correspondences, nb_correspondences, single_feature_correspondences
    from .matcher import learn, resolve_conflicts, select_correspondences, write_correspondences

    cfg.require("catalog", "offers", "matches", "out")
    corpus = load_corpus(cfg.catalog, cfg.offers, cfg.matches, cfg.strict)
    t0 = time.perf_counter()
    result = learn(corpus, restricted=cfg.restricted, lam=cfg.lam, max_iters=cfg.max_iters)
    log.info("trained on %d examples in %.1fs (%s)", len(result.examples),
             time.perf_counter() - t0, result.model.info)
    out = _out_dir(cfg)

    (out / "model.json").write_text(result.model.to_json(), encoding="utf-8")
    selected = select_correspondences(result.scored, cfg.theta, resolve=cfg.resolve_conflicts)
    write_correspondences(out / "correspondences.jsonl", selected)

    def ranked(items):
        return resolve_conflicts(items) if cfg.resolve_conflicts else list(items)

    name = "classifier" if cfg.restricted else "classifier_unrestricted"
    scored = {name: ranked(result.scored)}
    if cfg.baselines:
        for feat in ("js_mc", "jaccard_mc"):
            scored[feat] = ranked(single_feature_correspondences(result.candidates, result.X, feat))
        scored["nb"] = nb_correspondences(corpus)
        scored["dumas"] = dumas_correspondences(corpus)
        other = learn(corpus, restricted=not cfg.restricted, lam=cfg.lam, max_iters=cfg.max_iters)
        other_name = "classifier_unrestricted" if cfg.restricted else "classifier"
        scored[other_name] = ranked(other.scored)
    for method, items in scored.items():
        write_correspondences(out / "scored" / f"{method}.jsonl", items)

    if cfg.features:
        write_jsonl(out / "features.jsonl", (
            {"candidate": list(c), **f.as_dict()}
            for c, f in zip(result.candidates, result.features)))

    counters = result.counters(cfg.theta)
    counters["selected"] = len(selected)
    counters["methods"] = sorted(scored)
    log.info("learn %s", counters)
    _write_report(out, "learn", counters, cfg)
    return EXIT_OK


def cmd_synthesize(cfg: RunConfig) -> int:
    from .corpus import load_catalog
    from .matcher import read_correspondences
    from .pipeline import synthesize

    cfg.require("catalog", "offers", "correspondences", "out")
    schemas, _ = load_catalog(cfg.catalog, cfg.strict)
    offers = load_offers(cfg.offers, cfg.strict)
    corr = read_correspondences(cfg.correspondences)
    products, report = synthesize(offers, corr, {s.category: s for s in schemas})
    out = _out_dir(cfg)
    write_jsonl(out / "products.jsonl", (p.as_record() for p in products))
    log.info("synthesize %s", report)
    _write_report(out, "synthesize", report, cfg)
    return EXIT_OK


def cmd_eval(cfg: RunConfig) -> int:
    from .evaluation import METHODS, UnknownMethod, score_pipeline
    from .matcher import read_correspondences
    from .pipeline import SynthesizedProduct
    from .synthetic import GroundTruth

    cfg.require("truth", "scored", "out")
    scored_dir = Path(cfg.scored)
    available = sorted(p.stem for p in scored_dir.glob("*.jsonl"))
    methods = cfg.methods if cfg.methods else available
    for m in methods:
        if m not in METHODS:
            raise UnknownMethod(f"unknown method {m!r}; expected one of {METHODS}")
        if m not in available:
            raise ConfigError(f"no scored output for method {m!r} in {scored_dir}")
    truth = GroundTruth.from_json(Path(cfg.truth).read_text(encoding="utf-8"))
    outputs = {m: read_correspondences(scored_dir / f"{m}.jsonl", m) for m in methods}
    products = None
    if cfg.products:
        with open(cfg.products, encoding="utf-8") as fh:
            products = [SynthesizedProduct(r["category"], r["key"], r["key_attribute"],
                                           [tuple(x) for x in r["spec"]])
                        for r in map(json.loads, fh) if r]
    out = _out_dir(cfg)
    report = score_pipeline(outputs, truth, out, products)
    summary = report.summary()
    log.info("eval coverage at precision %s", summary["coverage_at_precision"])
    _write_report(out, "eval", {"methods": methods,
                                "curve_points": {m: len(p) for m, p in report.curves.items()}}, cfg)
    return EXIT_OK


COMMANDS = {"generate": cmd_generate, "extract": cmd_extract, "learn": cmd_learn,
            "synthesize": cmd_synthesize, "eval": cmd_eval}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="prodsynth", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config")
        s.add_argument("--out")
        s.add_argument("--seed", type=int)
        s.add_argument("--theta", type=float)
        s.add_argument("--strict", action="store_true", default=None)
        for path_arg in ("catalog", "offers", "matches", "pages", "correspondences", "truth",
                         "products", "scored"):
            s.add_argument(f"--{path_arg}")
        if name == "learn":
            s.add_argument("--lambda", dest="lam", type=float)
            s.add_argument("--max-iters", dest="max_iters", type=int)
            s.add_argument("--baselines", action="store_true", default=None)
            s.add_argument("--features", action="store_true", default=None,
                           help="also write features.jsonl")
            s.add_argument("--unrestricted", dest="restricted", action="store_false", default=None,
                           help="compute features over all offers and products")
            s.add_argument("--no-conflict-resolution", dest="resolve_conflicts",
                           action="store_false", default=None)
        if name == "eval":
            s.add_argument("--methods", nargs="+")
    return p


def resolve_config(args) -> RunConfig:
    cfg = RunConfig.load(args.config) if args.config else RunConfig()
    for f in fields(RunConfig):
        v = getattr(args, f.name, None)
        if v is not None:
            setattr(cfg, f.name, v)
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(stream=sys.stderr, level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s", force=True)
    from .evaluation import UnknownMethod
    from .synthetic import InfeasibleConfig
    try:
        cfg = resolve_config(args)
        return COMMANDS[args.command](cfg)
    except DegenerateTrainingSet as e:
        log.error("%s", e)
        return EXIT_DEGENERATE
    except (ConfigError, CorpusError, InfeasibleConfig, UnknownMethod, FileNotFoundError) as e:
        log.error("%s", e)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
