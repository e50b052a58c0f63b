"""``persona`` command line: synthesize, score, extract, discretize, train, evaluate, predict, report.

Exit codes: 0 success, 1 invalid input (missing file, malformed row, schema
mismatch, bad flag), 2 internal error. Set ``PERSONA_LOG`` to a logging
level name (``INFO``, ``DEBUG``) for progress messages on stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from ._io import atomic_write_text, dump_json, write_json
from .c45 import Dataset, TrainParams, model_from_json, model_to_json, predict, top_features, train
from .discretize import MID, THREE_CLASS, TWO_CLASS, discretize, labels_csv, read_labels
from .emotion import default_emotion_model, load_emotion_model, read_corpus, read_lexicon, train_emotion_model
from .errors import ValidationError
from .evaluation import THRESHOLD_MODES, cross_validate, metrics_csv, metrics_table
from .features import (
    extract_features,
    features_csv,
    read_features,
    read_records,
    records_jsonl,
    schema_stamp,
    schema_version,
    stamp_path,
)
from .inventory import DIMENSIONS, inventories_csv, read_inventories, read_scores, score_bfi, scores_csv
from .synth import CohortConfig, cohort_report, generate_cohort

log = logging.getLogger("persona")

MODES = {"3class": THREE_CLASS, "2class": TWO_CLASS}


@dataclass(frozen=True)
class PipelineConfig:
    out: Path
    mode: str = "3class"
    dims: tuple[str, ...] = DIMENSIONS
    folds: int = 10
    seed: int = 0
    params: TrainParams = TrainParams()
    emotion_model: Path | None = None
    thresholds: str = "global"

    def __post_init__(self):
        if self.folds < 2:
            raise ValidationError("--folds must be >= 2")
        if not self.dims:
            raise ValidationError("--dims must name at least one dimension")
        if self.mode not in MODES:
            raise ValidationError(f"--mode must be one of {sorted(MODES)}")


def parse_dims(text: str) -> tuple[str, ...]:
    raw = [c for c in text.replace(",", "").upper() if not c.isspace()]
    bad = [c for c in raw if c not in DIMENSIONS]
    if bad or not raw:
        raise ValidationError(f"--dims takes letters from {''.join(DIMENSIONS)}, got {text!r}")
    return tuple(d for d in DIMENSIONS if d in raw)


def _need(path) -> Path:
    p = Path(path)
    if not p.exists():
        raise ValidationError("file not found", str(p))
    return p


def _emotion_model(path):
    return load_emotion_model(_need(path)) if path else default_emotion_model()


# -- commands ---------------------------------------------------------------

def cmd_synth(out: Path, n: int, seed: int, config: Path | None = None) -> dict[str, Path]:
    """Write ``records.jsonl``, ``inventories.csv`` and ``cohort.json`` under ``out``."""
    if config:
        obj = json.loads(_need(config).read_text(encoding="utf-8"))
        cfg = CohortConfig.from_json({**obj, "n": obj.get("n", n), "seed": obj.get("seed", seed)})
    else:
        cfg = CohortConfig(n=n, seed=seed)
    log.info("generating %d participants (seed %d)", cfg.n, cfg.seed)
    cohort = generate_cohort(cfg)
    paths = {"records": out / "records.jsonl", "inventories": out / "inventories.csv", "config": out / "cohort.json"}
    atomic_write_text(paths["records"], records_jsonl(p.record for p in cohort))
    atomic_write_text(paths["inventories"], inventories_csv(p.inventory for p in cohort))
    write_json(paths["config"], cfg.to_json())
    return paths


def cmd_cohort_report(records: Path, inventories: Path, config: Path | None, emotion_model=None) -> str:
    """Recompute the cohort summary from files on disk."""
    from .synth import SyntheticParticipant

    cfg = CohortConfig.from_json(json.loads(_need(config).read_text())) if config else CohortConfig()
    recs = {r.user_id: r for r in read_records(_need(records))}
    invs = read_inventories(_need(inventories))
    missing = [i.participant_id for i in invs if i.participant_id not in recs]
    if missing:
        raise ValidationError(f"participant {missing[0]!r} has no behavior record", str(records))
    cohort = [SyntheticParticipant(score_bfi(i), i, recs[i.participant_id]) for i in invs]
    return dump_json(cohort_report(cohort, cfg.links, _emotion_model(emotion_model)))


def cmd_score(inventories: Path, out: Path) -> Path:
    responses = read_inventories(_need(inventories))
    atomic_write_text(out, scores_csv({r.participant_id: score_bfi(r) for r in responses}))
    return out


def cmd_features(records: Path, out: Path, emotion_model: Path | None = None, reference_date: str | None = None) -> Path:
    model = _emotion_model(emotion_model)
    recs = read_records(_need(records))
    log.info("extracting features for %d users", len(recs))
    atomic_write_text(out, features_csv(extract_features(r, reference_date, model) for r in recs))
    write_json(stamp_path(out), schema_stamp())
    return out


def cmd_discretize(scores: Path, out: Path, mode: str = "3class", dims: Sequence[str] = DIMENSIONS) -> dict[str, Path]:
    """Write ``labels.csv`` and ``thresholds.json``.

    Thresholds always come from all scores; in 2-class mode ``mid`` cells
    are written empty so they are excluded downstream.
    """
    table = read_scores(_need(scores))
    ids = list(table)
    labels, thresholds = {}, {}
    for d in dims:
        labs, t = discretize([table[p][d] for p in ids], dimension=d)
        labels[d] = ["" if mode == "2class" and lab == MID else lab for lab in labs]
        thresholds[d] = t.to_json()
    paths = {"labels": out / "labels.csv", "thresholds": out / "thresholds.json"}
    atomic_write_text(paths["labels"], labels_csv(ids, labels))
    write_json(paths["thresholds"], {"mode": mode, "thresholds": thresholds})
    return paths


def _labelled(features: Path, labels: Path, dim: str, mode: str):
    """Feature vectors joined to non-empty labels of ``dim`` (mids dropped in 2-class mode)."""
    vectors = read_features(_need(features))
    table = read_labels(_need(labels))
    by_id = {v.user_id: v for v in vectors}
    rows, labs = [], []
    for pid, cells in table.items():
        if dim not in cells:
            raise ValidationError(f"labels file has no column {dim!r}", str(labels))
        lab = cells[dim]
        if not lab or (mode == "2class" and lab == MID):
            continue
        if pid not in by_id:
            raise ValidationError(f"participant {pid!r} has no feature row", str(features))
        rows.append(by_id[pid])
        labs.append(lab)
    if not rows:
        raise ValidationError(f"no labelled samples for dimension {dim}")
    return rows, labs


def cmd_train(features: Path, labels: Path, dim: str, out: Path, mode: str = "3class",
              params: TrainParams = TrainParams()) -> Path:
    vectors, labs = _labelled(features, labels, dim, mode)
    model = train(Dataset.from_vectors(vectors, labs, MODES[mode]), params, schema_version(), dim)
    write_json(out, model_to_json(model))
    return out


def cmd_cv(features: Path, labels: Path, cfg: PipelineConfig, scores: Path | None = None) -> str:
    """Cross-validate every requested dimension; returns the aligned table."""
    score_table = read_scores(_need(scores)) if scores else None
    if cfg.thresholds == "per-fold" and score_table is None:
        raise ValidationError("--thresholds per-fold needs --scores")
    if cfg.thresholds == "per-fold":
        vectors = read_features(_need(features))
        missing = [v.user_id for v in vectors if v.user_id not in score_table]
        if missing:
            raise ValidationError(f"no score for participant {missing[0]!r}", str(scores))
    rows, confusion = [], {}
    for d in cfg.dims:
        log.info("cross-validating %s (%d folds)", d, cfg.folds)
        if cfg.thresholds == "per-fold":
            sc = [score_table[v.user_id][d] for v in vectors]
            labs, _ = discretize(sc, dimension=d)
            data = Dataset.from_vectors(vectors, labs, THREE_CLASS)
        else:
            vectors, labs = _labelled(features, labels, d, cfg.mode)
            data, sc = Dataset.from_vectors(vectors, labs, MODES[cfg.mode]), None
        res = cross_validate(data, d, cfg.mode, cfg.folds, cfg.params, cfg.seed, sc, cfg.thresholds, schema_version())
        rows.append(res.metrics)
        confusion[d] = res.confusion.to_json()
    title = "Three-class classification" if cfg.mode == "3class" else "Two-class classification"
    table = metrics_table(rows, title)
    atomic_write_text(cfg.out / "metrics.csv", metrics_csv(rows))
    atomic_write_text(cfg.out / "metrics.txt", table)
    write_json(cfg.out / "confusion.json", confusion)
    return table


def cmd_predict(model_path: Path, records: Path | None = None, features: Path | None = None,
                emotion_model: Path | None = None, reference_date: str | None = None) -> str:
    """One JSON line per user: label and decision path."""
    model = model_from_json(json.loads(_need(model_path).read_text(encoding="utf-8")))
    if (records is None) == (features is None):
        raise ValidationError("give exactly one of --records or --features")
    if records is not None:
        em = _emotion_model(emotion_model)
        vectors = [extract_features(r, reference_date, em) for r in read_records(_need(records))]
    else:
        vectors = read_features(_need(features))
    lines = []
    for v in vectors:
        label, path = predict(model, v.as_dict())
        lines.append(json.dumps({"user_id": v.user_id, "dimension": model.dimension, "label": label,
                                 "path": [list(step) for step in path]}))
    return "".join(line + "\n" for line in lines)


def cmd_report(models: Sequence[Path]) -> str:
    """Root and second-level features of each model, one line per dimension."""
    entries = []
    for path in models:
        model = model_from_json(json.loads(_need(path).read_text(encoding="utf-8")))
        levels = top_features(model, depth_limit=2)
        root = ", ".join(n for lvl, n in levels if lvl == 0) or "-"
        second = ", ".join(n for lvl, n in levels if lvl == 1) or "-"
        entries.append((model.dimension or Path(path).stem, root, second))
    width = max([len(r) for _, r, _ in entries] + [len("ROOT")]) + 2
    lines = ["Strong contribution features", f"{'DIMENSION':<11}{'ROOT':<{width}}2ND-ROOT"]
    lines += [f"{d:<11}{r:<{width}}{s}" for d, r, s in entries]
    return "\n".join(lines) + "\n"


def cmd_train_emotion(corpus: Path, lexicon: Path | None, out: Path) -> Path:
    lex = read_lexicon(_need(lexicon)) if lexicon else frozenset()
    write_json(out, train_emotion_model(read_corpus(_need(corpus)), lex).to_json())
    return out


def cmd_run(cfg: PipelineConfig, n: int = 500, reference_date: str | None = None) -> str:
    """Synthesize a cohort and run every stage into ``cfg.out``."""
    out = cfg.out
    cohort = cmd_synth(out / "cohort", n, cfg.seed)
    scores = cmd_score(cohort["inventories"], out / "scores.csv")
    features = cmd_features(cohort["records"], out / "features.csv", cfg.emotion_model, reference_date)
    labels = cmd_discretize(scores, out, cfg.mode, cfg.dims)["labels"]
    models = []
    for d in cfg.dims:
        models.append(cmd_train(features, labels, d, out / "models" / f"{d}.json", cfg.mode, cfg.params))
    table = cmd_cv(features, labels, cfg, scores)
    report = cmd_report(models)
    atomic_write_text(out / "report.txt", report)
    return table + "\n" + report


# -- argument parsing -------------------------------------------------------

def _train_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--min-leaf", type=int, default=2, help="minimum samples per branch (default 2)")
    p.add_argument("--cf", type=float, default=0.25, help="pruning confidence factor (default 0.25)")
    p.add_argument("--no-prune", action="store_true", help="keep the fully grown tree")
    p.add_argument("--seed", type=int, default=0, help="seed for every random choice (default 0)")


def _pipeline_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mode", choices=sorted(MODES), default="3class")
    p.add_argument("--dims", default="EACNO", help="dimensions to process, e.g. 'E,N' (default all)")
    p.add_argument("--folds", type=int, default=10, help="cross-validation folds (default 10)")
    p.add_argument("--thresholds", choices=THRESHOLD_MODES, default="global",
                   help="discretize once on all scores, or again inside every training fold")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="persona", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic cohort")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--n", type=int, default=500, help="participants (default 500)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config", help="cohort config JSON (links, moments, noise)")
    p.add_argument("--report", action="store_true", help="also write cohort_report.json")

    p = sub.add_parser("score", help="score BFI-44 inventories")
    p.add_argument("--inventories", required=True)
    p.add_argument("--out", required=True, help="scores CSV")

    p = sub.add_parser("features", help="extract feature vectors from behavior records")
    p.add_argument("--records", required=True)
    p.add_argument("--out", required=True, help="features CSV (a .schema.json stamp is written beside it)")
    p.add_argument("--emotion-model")
    p.add_argument("--reference-date", help="ISO date; defaults to each record's collected_at")

    p = sub.add_parser("discretize", help="mean +/- sigma labels per dimension")
    p.add_argument("--scores", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--mode", choices=sorted(MODES), default="3class")
    p.add_argument("--dims", default="EACNO")

    p = sub.add_parser("train", help="train one C4.5 model")
    p.add_argument("--features", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--dim", required=True, choices=DIMENSIONS)
    p.add_argument("--out", required=True, help="model JSON")
    p.add_argument("--mode", choices=sorted(MODES), default="3class")
    _train_flags(p)

    p = sub.add_parser("cv", help="k-fold cross-validation with P/R/F table")
    p.add_argument("--features", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--scores", help="scores CSV, needed for --thresholds per-fold")
    p.add_argument("--out", required=True, help="output directory")
    _pipeline_flags(p)
    _train_flags(p)

    p = sub.add_parser("predict", help="classify users with a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("--records")
    p.add_argument("--features")
    p.add_argument("--emotion-model")
    p.add_argument("--reference-date")
    p.add_argument("--out", help="write JSON lines here instead of stdout")

    p = sub.add_parser("report", help="root and second-level features of trained models")
    p.add_argument("--models", nargs="+", required=True)
    p.add_argument("--out", help="write the table here as well")

    p = sub.add_parser("train-emotion", help="train the emotion classifier")
    p.add_argument("--corpus", required=True, help="JSONL with text and label")
    p.add_argument("--lexicon", help="one emotion word per line")
    p.add_argument("--out", required=True)

    p = sub.add_parser("run", help="synthesize a cohort and run the full pipeline")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--n", type=int, default=500)
    p.add_argument("--emotion-model")
    p.add_argument("--reference-date")
    _pipeline_flags(p)
    _train_flags(p)
    return parser


def _params(args) -> TrainParams:
    try:
        return TrainParams(min_leaf=args.min_leaf, cf=args.cf, seed=args.seed, prune=not args.no_prune)
    except ValueError as exc:
        raise ValidationError(str(exc)) from None


def _pipeline(args) -> PipelineConfig:
    return PipelineConfig(Path(args.out), args.mode, parse_dims(args.dims), args.folds, args.seed, _params(args),
                          getattr(args, "emotion_model", None), args.thresholds)


def _emit(text: str, out: str | None) -> None:
    if out:
        atomic_write_text(out, text)
    sys.stdout.write(text)


def dispatch(args) -> None:
    c = args.command
    if c == "synth":
        paths = cmd_synth(Path(args.out), args.n, args.seed, args.config)
        if args.report:
            report = cmd_cohort_report(paths["records"], paths["inventories"], paths["config"])
            atomic_write_text(Path(args.out) / "cohort_report.json", report)
        print("\n".join(str(p) for p in paths.values()))
    elif c == "score":
        print(cmd_score(Path(args.inventories), Path(args.out)))
    elif c == "features":
        print(cmd_features(Path(args.records), Path(args.out), args.emotion_model, args.reference_date))
    elif c == "discretize":
        paths = cmd_discretize(Path(args.scores), Path(args.out), args.mode, parse_dims(args.dims))
        print("\n".join(str(p) for p in paths.values()))
    elif c == "train":
        print(cmd_train(Path(args.features), Path(args.labels), args.dim, Path(args.out), args.mode, _params(args)))
    elif c == "cv":
        sys.stdout.write(cmd_cv(Path(args.features), Path(args.labels), _pipeline(args), args.scores))
    elif c == "predict":
        _emit(cmd_predict(Path(args.model), args.records, args.features, args.emotion_model, args.reference_date),
              args.out)
    elif c == "report":
        _emit(cmd_report([Path(m) for m in args.models]), args.out)
    elif c == "train-emotion":
        print(cmd_train_emotion(Path(args.corpus), args.lexicon, Path(args.out)))
    elif c == "run":
        sys.stdout.write(cmd_run(_pipeline(args), args.n, args.reference_date))


def main(argv: Sequence[str] | None = None) -> int:
    level = getattr(logging, os.environ.get("PERSONA_LOG", "WARNING").upper(), logging.WARNING)
    logging.basicConfig(level=level if isinstance(level, int) else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse reports usage problems with status 2
        return 0 if exc.code == 0 else 1
    try:
        dispatch(args)
    except (ValidationError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001
        log.debug("internal error", exc_info=True)
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
