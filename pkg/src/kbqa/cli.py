"""Command-line entry point (``kbqa`` / ``python -m kbqa``)."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import plots
from .classifier import MIX_PRESETS, LinearClassifier, Origin, accuracy, mix_data, train
from .config import Config, ConfigError, load_config, parse_config
from .experiments import (
    ablation_csv,
    ablation_harness,
    beam_benchmark,
    beam_csv,
    data_mixing,
    labeled,
    link_questions,
    loss_csv,
    mixing_csv,
)
from .kb import KBFormatError, Node, avg_relation_count, load_kb
from .lexicon import LexiconFormatError, lexicon_from_kb, load_lexicon
from .linker import FEATURE_NAMES
from .pipeline import KBQA, evaluate, report_csv
from .records import read_questions
from .schemas import SCHEMAS, path_to_json
from .scoring import ScorerError
from .synth import GenerationError, TEMPLATES, export, generate, load_templates, parse_ratios

log = logging.getLogger("kbqa")


def _write(path, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8", newline="")


def _config(args) -> Config:
    cfg = load_config(args.config) if getattr(args, "config", None) else Config()
    overrides = getattr(args, "set", None) or []
    if overrides:
        cfg = parse_config("\n".join(overrides), cfg)
    if getattr(args, "include_kb_subjects", False):
        cfg.lexicon_include_kb_subjects = True
    return cfg


def _kb_lex(args, cfg: Config):
    kb = load_kb(args.kb)
    if getattr(args, "lexicon", None):
        lex = load_lexicon(args.lexicon, cfg.lexicon_normalize)
    else:
        lex = lexicon_from_kb(kb, cfg.lexicon_normalize)
    return kb, lex


def _engine(args) -> KBQA:
    cfg = _config(args)
    kb, lex = _kb_lex(args, cfg)
    model = LinearClassifier.load(args.model) if getattr(args, "model", None) else None
    return KBQA(kb, lex, cfg, model=model)


def _add_kb(p, lexicon=True):
    p.add_argument("--kb", required=True, help="TSV triples file")
    if lexicon:
        p.add_argument("--lexicon", help="TSV mention/entity file (default: KB subjects)")
        p.add_argument("--include-kb-subjects", action="store_true",
                       help="add every KB subject as a mention of itself")


def _add_cfg(p):
    p.add_argument("--config", help="key = value config file")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override one config key")


def _answer_json(a) -> dict:
    obj = {
        "id": a.qid,
        "question": a.question,
        "answers": sorted(a.answers),
        "class": a.question_class.value if a.question_class else None,
        "topic_entities": list(a.topic_entities),
        "reason": a.reason,
    }
    if a.path is not None:
        obj["schema"] = a.path.path.schema
        obj["path"] = path_to_json(a.path.path)
        obj["verbalization"] = a.path.verbalization
        obj["score"] = round(a.path.score, 6)
    if a.candidates:
        obj["candidates"] = [
            {"verbalization": c.verbalization, "score": round(c.score, 6), "path": path_to_json(c.path)}
            for c in a.candidates
        ]
    return obj


def cmd_answer(args) -> int:
    eng = _engine(args)
    a = eng.answer(args.question, args.id, keep_candidates=args.candidates)
    print(json.dumps(_answer_json(a), ensure_ascii=False, indent=2))
    return 0


def cmd_eval(args) -> int:
    eng = _engine(args)
    records = read_questions(args.questions)
    answers = eng.answer_all(records, args.workers)
    report = evaluate(answers, {r.id: r.answers for r in records})
    _write(args.out, report_csv(answers, report))
    if not args.no_plot:
        plots.plot_f1(report, plots.figure_path(args.out))
    if args.answers_out:
        _write(args.answers_out, "".join(json.dumps(_answer_json(a), ensure_ascii=False) + "\n" for a in answers))
    print(f"questions={len(report.rows)} avg_f1={report.avg_f1:.6f}")
    return 0


def _int_list(text: str) -> list[int | None]:
    out = []
    for part in text.split(","):
        part = part.strip()
        if part:
            out.append(None if part in {"inf", "0"} else int(part))
    return out


def cmd_benchmark_beam(args) -> int:
    eng = _engine(args)
    records = read_questions(args.questions)
    hops = [int(h) for h in args.hops.split(",")] if args.hops else eng.cfg.beam_hops
    rows = beam_benchmark(eng.kb, records, eng.scorer, _int_list(args.ks), eng.lex, hops)
    _write(args.out, beam_csv(rows))
    if not args.no_plot:
        plots.plot_beam(rows, plots.figure_path(args.out))
    sys.stdout.write(beam_csv(rows))
    return 0


def cmd_gen_data(args) -> int:
    cfg = _config(args)
    kb, lex = _kb_lex(args, cfg)
    if cfg.lexicon_include_kb_subjects:
        lex = lex.merged(lexicon_from_kb(kb, cfg.lexicon_normalize))
    ratios = parse_ratios(args.ratios) if args.ratios else None
    schemas = [SCHEMAS[s] for s in (sorted(ratios) if ratios else cfg.schemas_enabled)]
    language = args.language or cfg.synth_language
    tpl_path = args.templates or cfg.synth_templates
    templates = load_templates(tpl_path) if tpl_path else TEMPLATES[language]
    samples = generate(kb, lex, schemas, args.count, ratios, args.seed, templates, language, args.id_prefix)
    export(samples, args.out)
    print(f"wrote {len(samples)} samples to {args.out}")
    return 0


def _count_fn(args):
    """Linked-candidate counts: from the linker when a KB is given, else from gold paths."""
    if getattr(args, "kb", None):
        eng = _engine(args)
        return lambda r: eng.linked_count(r.question)

    def from_gold(r):
        if r.gold_path is None:
            raise SystemExit(f"question {r.id}: no gold path; pass --kb to count linked entities")
        return len({n for n in r.gold_path.topic_entities() if not n.literal})

    return from_gold


def cmd_train_classifier(args) -> int:
    count = _count_fn(args)
    real = labeled(read_questions(args.real), Origin.REAL, count)
    synth = labeled(read_questions(args.synthetic), Origin.SYNTHETIC, count) if args.synthetic else []
    synth_count = args.synth_count
    if synth_count is None:
        synth_count = min(MIX_PRESETS.get(args.real_fraction, 0), len(synth))
    data = mix_data(real, synth, args.real_fraction, synth_count, args.seed)
    res = train(data, epochs=args.epochs, lr=args.lr, seed=args.seed, dim=args.dim)
    res.model.save(args.out)
    loss_path = Path(str(args.out) + ".loss.csv")
    _write(loss_path, loss_csv(res.losses))
    if not args.no_plot:
        plots.plot_losses({"train": res.losses}, plots.figure_path(loss_path))
    msg = f"trained on {len(data)} questions ({len(data) - synth_count} real, {synth_count} synthetic)"
    msg += f"; train accuracy {res.accuracies[-1]:.4f}"
    if args.test:
        test = labeled(read_questions(args.test), Origin.REAL, count)
        msg += f"; test accuracy {accuracy(res.model, test):.4f}"
    print(msg)
    return 0


def _settings(text: str | None):
    if not text:
        out = []
        for frac, n in sorted(MIX_PRESETS.items()):
            out += [(frac, 0), (frac, n)]
        return out
    out = []
    for part in text.split(","):
        frac, _, n = part.partition(":")
        out.append((float(frac), int(n or 0)))
    return out


def cmd_mixing(args) -> int:
    count = _count_fn(args)
    real = labeled(read_questions(args.real), Origin.REAL, count)
    synth = labeled(read_questions(args.synthetic), Origin.SYNTHETIC, count)
    test = labeled(read_questions(args.test), Origin.REAL, count)
    settings = [(f, min(n, len(synth))) for f, n in _settings(args.settings)]
    rows = data_mixing(real, synth, test, settings, args.epochs, args.seed)
    _write(args.out, mixing_csv(rows))
    if not args.no_plot:
        plots.plot_mixing(rows, plots.figure_path(args.out))
        traces = {f"{r.real_fraction:g}+{r.synth_count}": r.losses for r in rows}
        plots.plot_losses(traces, Path(args.out).with_suffix(".loss.png"))
    sys.stdout.write(mixing_csv(rows))
    return 0


def cmd_link(args) -> int:
    eng = _engine(args)
    for c in eng.link(args.question):
        print(json.dumps({
            "mention": c.mention, "start": c.start, "end": c.end, "entity": c.entity,
            "raw": dict(zip(FEATURE_NAMES, c.raw)),
            "normalized": dict(zip(FEATURE_NAMES, c.normalized)),
            "score": c.score,
        }, ensure_ascii=False))
    return 0


def cmd_stats(args) -> int:
    kb = load_kb(args.kb)
    if args.entities:
        labels = [ln.strip() for ln in Path(args.entities).read_text(encoding="utf-8").splitlines() if ln.strip()]
        ents = [Node.entity(x) for x in labels]
    else:
        ents = kb.entities()
    lines = ["hops,avg_relation_count"]
    for h in ([args.hops] if args.hops else [1, 2, 3]):
        lines.append(f"{h},{avg_relation_count(kb, ents, h):.6f}")
    text = "\n".join(lines) + "\n"
    if args.out:
        _write(args.out, text)
    sys.stdout.write(f"triples={len(kb)} entities={len(kb.entities())} predicates={len(kb.predicates())}\n")
    sys.stdout.write(text)
    return 0


def cmd_ablation(args) -> int:
    eng = _engine(args)
    qs = link_questions(read_questions(args.questions))
    rows = ablation_harness(eng, qs)
    _write(args.out, ablation_csv(rows))
    if not args.no_plot:
        plots.plot_ablation(rows, plots.figure_path(args.out))
    sys.stdout.write(ablation_csv(rows))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="kbqa", description="Question answering over a triple store.")
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("answer", help="answer one question")
    _add_kb(p)
    _add_cfg(p)
    p.add_argument("--model", help="classifier model file")
    p.add_argument("--id", default="q")
    p.add_argument("--candidates", action="store_true", help="include every scored candidate path")
    p.add_argument("question")
    p.set_defaults(func=cmd_answer)

    p = sub.add_parser("eval", help="answer a questions file and write a per-question F1 report")
    _add_kb(p)
    _add_cfg(p)
    p.add_argument("--model")
    p.add_argument("--questions", required=True)
    p.add_argument("--out", required=True, help="report CSV")
    p.add_argument("--answers-out", help="also write predictions as JSONL")
    p.add_argument("--workers", type=int)
    p.add_argument("--no-plot", action="store_true")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("benchmark-beam", help="recall and candidate count per beam size")
    _add_kb(p)
    _add_cfg(p)
    p.add_argument("--questions", required=True, help="questions with gold paths")
    p.add_argument("--ks", default="1,2,4,8,16")
    p.add_argument("--hops", help="comma list of hops where pruning applies")
    p.add_argument("--out", required=True)
    p.add_argument("--no-plot", action="store_true")
    p.set_defaults(func=cmd_benchmark_beam)

    p = sub.add_parser("gen-data", help="generate synthetic questions")
    _add_kb(p)
    _add_cfg(p)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--ratios", help="e.g. S1=0.5,S2=0.5 (default: uniform over enabled schemas)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--language", choices=sorted(TEMPLATES))
    p.add_argument("--templates", help="JSON template table")
    p.add_argument("--id-prefix", default="syn")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("train-classifier", help="train the question-class perceptron")
    p.add_argument("--real", required=True)
    p.add_argument("--synthetic")
    p.add_argument("--real-fraction", type=float, default=1.0)
    p.add_argument("--synth-count", type=int, help="default: preset for the real fraction")
    p.add_argument("--test", help="held-out questions to score")
    p.add_argument("--kb", help="count linked entities with the linker instead of gold paths")
    p.add_argument("--lexicon")
    _add_cfg(p)
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--lr", type=float, default=1.0)
    p.add_argument("--dim", type=int, default=1 << 16)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--no-plot", action="store_true")
    p.set_defaults(func=cmd_train_classifier)

    p = sub.add_parser("mixing", help="real/synthetic data-mixing sweep for the classifier")
    p.add_argument("--real", required=True)
    p.add_argument("--synthetic", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--settings", help="fraction:count pairs, e.g. 0.1:0,0.1:50")
    p.add_argument("--kb")
    p.add_argument("--lexicon")
    _add_cfg(p)
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--no-plot", action="store_true")
    p.set_defaults(func=cmd_mixing)

    p = sub.add_parser("link", help="dump linking candidates and features")
    _add_kb(p)
    _add_cfg(p)
    p.add_argument("question")
    p.set_defaults(func=cmd_link)

    p = sub.add_parser("stats", help="KB size and average relation-path counts")
    p.add_argument("--kb", required=True)
    p.add_argument("--entities", help="file of entity labels (default: all entities)")
    p.add_argument("--hops", type=int, choices=[1, 2, 3])
    p.add_argument("--out")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("ablation", help="linking recall with each feature removed")
    _add_kb(p)
    _add_cfg(p)
    p.add_argument("--questions", required=True, help="questions with gold paths")
    p.add_argument("--out", required=True)
    p.add_argument("--no-plot", action="store_true")
    p.set_defaults(func=cmd_ablation)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, KBFormatError, LexiconFormatError, GenerationError, ScorerError,
            FileNotFoundError, ValueError, KeyError) as exc:
        print(f"kbqa: error: {exc}", file=sys.stderr)
        return 2
