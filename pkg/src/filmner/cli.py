"""Command-line entry point: ``filmner <command> ...``.

Commands communicate only through files. Every structured output carries a
digest of the settings that produced it (output paths and ``--jobs``
excluded), so reruns can be compared byte for byte.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

from . import __version__
from .corpus import (
    iter_jsonl,
    read_labels,
    read_transcript,
    read_transcripts,
    write_jsonl,
    write_labels,
    write_transcript,
)
from .evaluation import SYSTEMS, evaluate_systems
from .features import feature_matrix, feature_names, featurize
from .gazetteer import read_gazetteer, write_gazetteer
from .matcher import DEFAULT_GRID as MATCHER_GRID
from .matcher import ThresholdProfile, calibrate_thresholds
from .model import PENALTIES, STRENGTHS, select_hyperparameters, train
from .pipeline import FilmDetector, label_candidates, raw_matches_many, select_candidates
from .synth import CorruptionConfig, generate_corpus, synthetic_gazetteer

import numpy as np

DEFAULTS = {
    "seed": 0,
    "jobs": 1,
    "matcher_grid": list(MATCHER_GRID),
    "strengths": list(STRENGTHS),
    "penalties": list(PENALTIES),
    "system": ["model"],
    "films": 150,
    "title_lengths": [0.2, 0.3, 0.2, 0.15, 0.1, 0.05],
    "missing_rate": 0.7,
    "char_error_rate": 0.05,
    "channels": 9,
    "transcripts_per_channel": 3,
    "mentions": [3, 6],
    "distractors": [0, 0],
    "near_miss_fraction": 0.5,
    "keyword_rate": 0.8,
    "distractor_vocab_size": 200,
}
# settings that never change results
_NOT_DIGESTED = {"jobs", "output", "config", "command", "save_thresholds", "thresholds_out"}
# input paths are digested by content, so moving files does not change outputs
_INPUT_PATHS = {"gazetteer", "transcripts", "labels", "model", "thresholds", "inputs"}


class CliError(Exception):
    pass


def _content_digest(paths) -> str:
    h = hashlib.sha256()
    for p in [paths] if isinstance(paths, str) else paths:
        p = Path(p)
        files = sorted(q for q in p.rglob("*") if q.is_file()) if p.is_dir() else [p]
        for f in files:
            h.update(f.name.encode() + b"\0")
            h.update(f.read_bytes() if f.exists() else b"")
    return h.hexdigest()


def config_digest(settings: dict) -> str:
    kept = {k: (_content_digest(v) if k in _INPUT_PATHS and v else v)
            for k, v in sorted(settings.items()) if k not in _NOT_DIGESTED}
    blob = json.dumps(kept, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _meta(settings: dict) -> dict:
    return {
        "command": settings["command"],
        "seed": settings["seed"],
        "config_digest": config_digest(settings),
        "version": __version__,
    }


def _write_records(path, records, settings) -> None:
    write_jsonl([{"meta": _meta(settings)}] + list(records), path)


def _need(settings, *names):
    for name in names:
        if not settings.get(name):
            raise CliError(f"--{name.replace('_', '-')} is required")


def _transcripts(settings):
    paths = settings["transcripts"]
    for p in paths:
        if not Path(p).exists():
            raise CliError(f"no such file or directory: {p}")
    return read_transcripts(paths)


def _labels(settings, corpus):
    if not settings.get("labels"):
        raise CliError("a labeled corpus is required (--labels)")
    labels = read_labels(settings["labels"])
    if not any(labels.get(t.episode_id) for t in corpus):
        raise CliError("labels file has no labels for these transcripts")
    return labels


def _model_grid(settings):
    return [(p, float(s)) for p in settings["penalties"] for s in settings["strengths"]]


# -- commands -----------------------------------------------------------------------

def cmd_normalize(s):
    _need(s, "inputs", "output")
    out = Path(s["output"])
    out.mkdir(parents=True, exist_ok=True)
    for p in s["inputs"]:
        t = read_transcript(p)
        write_transcript(t, out / f"{t.episode_id}.json")
        print(f"{t.episode_id}\t{len(t)} tokens")


def cmd_match(s):
    _need(s, "gazetteer", "transcripts", "output")
    g = read_gazetteer(s["gazetteer"])
    corpus = _transcripts(s)
    if s.get("thresholds"):
        profile = ThresholdProfile.load(s["thresholds"])
    elif s.get("labels"):
        labels = _labels(s, corpus)
        profile = calibrate_thresholds([(t, labels.get(t.episode_id, [])) for t in corpus],
                                       g, s["matcher_grid"])
    else:
        raise CliError("need --thresholds or --labels to calibrate them")
    s["profile"] = profile.to_dict()
    if s.get("save_thresholds"):
        profile.save(s["save_thresholds"])
    raw = raw_matches_many(corpus, g, profile, s["jobs"])
    records = [c.to_record() for r in raw for c in select_candidates(r, profile, g)]
    _write_records(s["output"], records, s)
    print(f"{len(records)} candidates from {len(corpus)} transcripts")


def cmd_train(s):
    _need(s, "gazetteer", "transcripts", "output")
    g = read_gazetteer(s["gazetteer"])
    corpus = _transcripts(s)
    labels = _labels(s, corpus)
    gold = [labels.get(t.episode_id, []) for t in corpus]
    loose = ThresholdProfile.uniform(max(s["matcher_grid"]))
    raw = raw_matches_many(corpus, g, loose, s["jobs"])
    profile = calibrate_thresholds(list(zip(corpus, gold)), g, s["matcher_grid"], raw=raw)
    cands = [select_candidates(r, profile, g) for r in raw]
    X = np.vstack([feature_matrix(featurize(t, c, g)) for t, c in zip(corpus, cands)])
    y = np.concatenate([label_candidates(c, gl) for c, gl in zip(cands, gold)])
    groups = [t.channel_id for t, c in zip(corpus, cands) for _ in c]
    missed = {}
    for t, c, gl in zip(corpus, cands, gold):
        missed[t.channel_id] = missed.get(t.channel_id, 0) + len(gl) - int(label_candidates(c, gl).sum())
    if len(np.unique(y)) < 2:
        raise CliError("candidates do not contain both true and false mentions; cannot train")
    sel = select_hyperparameters(X, y, groups, _model_grid(s), missed, seed=s["seed"], jobs=s["jobs"])
    model = train(X, y, sel.penalty, sel.strength, seed=s["seed"],
                  decision_threshold=sel.decision_threshold, feature_names=feature_names())
    thresholds_path = s.get("thresholds_out") or str(Path(s["output"]).with_suffix(".thresholds.json"))
    profile.save(thresholds_path)
    model.save(s["output"], extra={"meta": _meta(s), "thresholds": profile.to_dict(),
                                   "inner_f1": sel.score})
    print(f"trained on {len(y)} candidates ({int(y.sum())} true): penalty={sel.penalty} "
          f"strength={sel.strength} threshold={sel.decision_threshold} inner F1={sel.score:.3f}")


def cmd_detect(s):
    from .model import LinearModel

    _need(s, "gazetteer", "transcripts", "model", "output")
    g = read_gazetteer(s["gazetteer"])
    corpus = _transcripts(s)
    payload = json.loads(Path(s["model"]).read_text())
    model = LinearModel.from_dict(payload)
    if s.get("thresholds"):
        profile = ThresholdProfile.load(s["thresholds"])
    elif "thresholds" in payload:
        profile = ThresholdProfile.from_dict(payload["thresholds"])
    else:
        raise CliError("need --thresholds (model file carries none)")
    detector = FilmDetector(g, profile, model)
    records = [d.to_record() for t in corpus for d in detector.score(t)]
    _write_records(s["output"], records, s)
    print(f"{sum(r['accepted'] for r in records)} detections among {len(records)} candidates")


def cmd_evaluate(s):
    _need(s, "gazetteer", "transcripts", "output")
    g = read_gazetteer(s["gazetteer"])
    corpus = _transcripts(s)
    labels = _labels(s, corpus)
    reports = evaluate_systems(s["system"], corpus, labels, g, s["matcher_grid"],
                               _model_grid(s), seed=s["seed"], jobs=s["jobs"])
    out = Path(s["output"])
    out.mkdir(parents=True, exist_ok=True)
    for name, rep in reports.items():
        rep.meta.update(_meta(s))
        rep.save(out)
        sys.stdout.write(rep.to_table())


def cmd_generate(s):
    _need(s, "output")
    out = Path(s["output"])
    if s.get("gazetteer"):
        g = read_gazetteer(s["gazetteer"])
    else:
        g = synthetic_gazetteer(s["films"], s["seed"], s["title_lengths"], s["missing_rate"])
    try:
        cfg = CorruptionConfig(
            char_error_rate=s["char_error_rate"], seed=s["seed"],
            distractor_vocab_size=s["distractor_vocab_size"],
            mentions_per_transcript=tuple(s["mentions"]),
            transcripts_per_channel=s["transcripts_per_channel"], channels=s["channels"],
            keyword_rate=s["keyword_rate"], distractors_per_transcript=tuple(s["distractors"]),
            near_miss_fraction=s["near_miss_fraction"],
        )
    except (TypeError, ValueError) as exc:
        raise CliError(f"invalid corruption config: {exc}") from None
    corpus = generate_corpus(g, cfg)
    (out / "transcripts").mkdir(parents=True, exist_ok=True)
    write_gazetteer(g, out / "gazetteer.jsonl")
    for t in corpus.transcripts:
        write_transcript(t, out / "transcripts" / f"{t.episode_id}.json")
    write_labels(corpus.all_labels(), out / "labels.jsonl")
    manifest = {"meta": _meta(s), "corruption": cfg.to_dict(), "films": len(g),
                "transcripts": len(corpus.transcripts), "mentions": len(corpus.mentions)}
    (out / "manifest.json").write_text(json.dumps(manifest, sort_keys=True, indent=1) + "\n")
    print(f"{len(corpus.transcripts)} transcripts, {len(corpus.mentions)} mentions -> {out}")


COMMANDS = {
    "normalize": cmd_normalize,
    "match": cmd_match,
    "train": cmd_train,
    "detect": cmd_detect,
    "evaluate": cmd_evaluate,
    "generate": cmd_generate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="filmner", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON file of settings; flags override it")
        p.add_argument("--seed", type=int)
        p.add_argument("--jobs", type=int, help="worker processes (results do not depend on it)")
        p.add_argument("-o", "--output")

    def corpus_args(p, labels=False):
        p.add_argument("--gazetteer")
        p.add_argument("--transcripts", nargs="+", help="transcript files or directories")
        p.add_argument("--labels", required=False)
        p.add_argument("--matcher-grid", type=float, nargs="+")

    p = sub.add_parser("normalize", help="normalize raw transcripts")
    common(p)
    p.add_argument("inputs", nargs="*")

    p = sub.add_parser("match", help="write fuzzy-match candidates")
    common(p)
    corpus_args(p)
    p.add_argument("--thresholds", help="threshold profile JSON")
    p.add_argument("--save-thresholds", help="write the profile used here")

    for name, help_ in [("train", "calibrate thresholds and fit the classifier"),
                        ("evaluate", "leave-one-channel-out evaluation")]:
        p = sub.add_parser(name, help=help_)
        common(p)
        corpus_args(p)
        p.add_argument("--strengths", type=float, nargs="+")
        p.add_argument("--penalties", nargs="+", choices=PENALTIES)
        if name == "train":
            p.add_argument("--thresholds-out")
        else:
            p.add_argument("--system", nargs="+", choices=SYSTEMS)

    p = sub.add_parser("detect", help="apply a trained model")
    common(p)
    corpus_args(p)
    p.add_argument("--model")
    p.add_argument("--thresholds")

    p = sub.add_parser("generate", help="write a synthetic labeled corpus")
    common(p)
    p.add_argument("--gazetteer", help="use this gazetteer instead of a synthetic one")
    p.add_argument("--films", type=int)
    p.add_argument("--title-lengths", type=float, nargs="+")
    p.add_argument("--missing-rate", type=float)
    p.add_argument("--char-error-rate", type=float)
    p.add_argument("--channels", type=int)
    p.add_argument("--transcripts-per-channel", type=int)
    p.add_argument("--mentions", type=int, nargs=2)
    p.add_argument("--distractors", type=int, nargs=2)
    p.add_argument("--near-miss-fraction", type=float)
    p.add_argument("--keyword-rate", type=float)
    p.add_argument("--distractor-vocab-size", type=int)
    return parser


def resolve_settings(args: argparse.Namespace) -> dict:
    settings = dict(DEFAULTS)
    if args.config:
        try:
            settings.update(json.loads(Path(args.config).read_text()))
        except (OSError, ValueError) as exc:
            raise CliError(f"cannot read config {args.config}: {exc}") from None
    settings.update({k: v for k, v in vars(args).items() if v is not None})
    return settings


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        settings = resolve_settings(args)
        COMMANDS[args.command](settings)
    except (CliError, OSError, ValueError, KeyError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"filmner {args.command}: error: {msg}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
