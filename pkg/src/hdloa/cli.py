"""``hdloa`` command line.

Exit codes: 0 success, 1 configuration error, 2 data error, 3 backend error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import heuristics as hmod
from . import probe
from .core import RolePredictions, TaskKind, validate_instance
from .data import DataError, DatasetManifest, load, sample_subset
from .llm import ConfigurationError, LLMError, ResponseCache, client_from_config
from .promptkit.builder import Ablation, Style, build_baseline_prompt, build_hdloa_prompt, exemplar_from_dict
from .promptkit.defaults import default_exemplars, default_heuristics
from .promptkit.exemplars import Exemplar
from .promptkit.templates import TemplateError
from .runner import ConfigError, ReportBundle, RunConfig, compare_runs, run_experiment, summary_table
from .score import (
    MatchPolicy,
    format_report,
    pair_predictions,
    per_role_scores,
    score_classification,
    score_eae,
    shared_gold_instances,
)

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_BACKEND = 0, 1, 2, 3

logger = logging.getLogger("hdloa")


def _read_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc


def _read_jsonl(path) -> list[dict]:
    try:
        with open(path, encoding="utf-8") as fh:
            lines = list(fh)
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    out = []
    for lineno, line in enumerate(lines, start=1):
        if line.strip():
            try:
                out.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise DataError(f"invalid JSON: {exc.msg}", line=lineno) from exc
    return out


def _client(args):
    cfg = _read_json(args.backend) if args.backend else {"kind": "mock", "script": {"default": "fail"}}
    if args.model:
        cfg["model_id"] = args.model
    if isinstance(cfg.get("script"), str) and args.backend:
        cfg["script"] = str(Path(args.backend).parent / cfg["script"])
    return client_from_config(cfg, args.cache_dir)


def _emit(text: str, out: Optional[str]):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _add_backend(p):
    p.add_argument("--backend", help="backend config JSON (kind mock|http)")
    p.add_argument("--model", help="override model_id")
    p.add_argument("--cache-dir", help="response cache directory")


# data


def cmd_data_validate(args) -> int:
    manifest = DatasetManifest(args.task, args.path, args.split, args.expect)
    instances = load(manifest)
    bad = 0
    for inst in instances:
        if manifest.task.is_eae:
            for problem in validate_instance(inst):
                print(f"{inst.id}: {problem}")
                bad += 1
    print(f"{len(instances)} {manifest.task.value} instances, {bad} problem(s)")
    return EXIT_DATA if bad else EXIT_OK


# llm


def cmd_llm_ping(args) -> int:
    client = _client(args)
    result = client.ask(args.prompt)
    print(json.dumps({"backend": result.backend_id, "cached": result.cached, "latency_ms": result.latency_ms,
                      "text": result.text[:200]}))
    return EXIT_OK


def cmd_llm_cache_stats(args) -> int:
    print(json.dumps(ResponseCache(args.cache_dir).stats(), indent=1))
    return EXIT_OK


# heuristics


def cmd_heuristics_generate(args) -> int:
    hset = hmod.generate_heuristics(args.task_description, args.role, args.n, _client(args), strict=args.strict)
    hmod.write_heuristics(args.out, hset)
    print(f"wrote {len(hset)} heuristics to {args.out}")
    return EXIT_OK


def _exemplars(args, task: TaskKind, style: Style) -> tuple[Exemplar, ...]:
    if getattr(args, "exemplars", None):
        return tuple(exemplar_from_dict(e) for e in _read_json(args.exemplars))
    return default_exemplars(task, style)


def cmd_heuristics_select(args) -> int:
    task = TaskKind.parse(args.task)
    candidates = hmod.read_heuristics(args.candidates)
    data = load(DatasetManifest(task, args.subset, args.split))
    subset = sample_subset(data, args.fraction, args.seed)
    pipeline = hmod.SingleHeuristicPipeline(_client(args), _exemplars(args, task, Style.HDLOA)[0], task,
                                            args.role, policy=MatchPolicy.named(args.policy))
    ranked = hmod.select_heuristics(candidates, subset, args.k, pipeline, args.seed, args.max_parallel)
    hmod.write_heuristics(args.out, ranked.ranked)
    for h in ranked.all_scores:
        mark = "*" if h in ranked.ranked else " "
        print(f"{mark} {h.generation_index:>2} {h.eval_accuracy:.4f} {h.label}")
    print(f"selected {len(ranked)} of {len(candidates)} on {len(subset)} instances (seed {args.seed})")
    return EXIT_OK


# prompt


def cmd_prompt_build(args) -> int:
    task, style = TaskKind.parse(args.task), Style(args.style)
    instances = {inst.id: inst for inst in load(DatasetManifest(task, args.data, args.split))}
    if args.target_id not in instances:
        raise DataError(f"no instance with id {args.target_id!r} in {args.data}")
    target = instances[args.target_id]
    exemplars = _exemplars(args, task, style)
    if style is Style.HDLOA:
        if args.heuristics in (None, "default"):
            hs = default_heuristics(task)
        else:
            hs = hmod.read_heuristics(args.heuristics)
        bundle = build_hdloa_prompt(task, hs, exemplars, target, base_role=args.role,
                                    ablation=Ablation(args.ablation) if args.ablation else None)
    else:
        bundle = build_baseline_prompt(style, task, exemplars, target)
    _emit(bundle.rendered, args.out)
    return EXIT_OK


# score


def cmd_score(args) -> int:
    task = TaskKind.parse(args.task)
    policy = MatchPolicy.named(args.policy)
    instances = load(DatasetManifest(task, args.gold, args.split))
    rows = _read_jsonl(args.pred)
    if task.is_eae:
        per_instance: dict[str, dict] = {}
        for r in rows:
            per_instance.setdefault(r["instance_id"], {})[r["role"]] = r.get("spans", [])
        preds = {k: RolePredictions(v) for k, v in per_instance.items()}
        pairs = pair_predictions(instances, preds)
        text = format_report(score_eae(pairs, policy), policy, per_role_scores(pairs, policy),
                             shared_gold_instances(instances, policy))
    else:
        predicted = {r["instance_id"]: r.get("predicted_label") for r in rows}
        unknown = set(predicted) - {i.id for i in instances}
        if unknown:
            raise DataError(f"predictions for unknown instance ids: {sorted(unknown)}")
        acc = score_classification([(i.gold_label, predicted.get(i.id)) for i in instances])
        text = f"accuracy: {acc:.4f} ({len(instances)} instances)\n"
    _emit(text, args.out)
    return EXIT_OK


# probe


def _read_prompt_examples(path) -> list[Exemplar]:
    """JSON exemplar list, or plain text of ``Q: ...`` / ``A: ...`` blocks."""
    if str(path).endswith(".json"):
        return [exemplar_from_dict(e) for e in _read_json(path)]
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    examples = []
    for block in text.split("\n\n"):
        q = a = None
        for line in block.splitlines():
            if line.startswith("Q:"):
                q = line[2:].strip()
            elif line.startswith("A:"):
                a = line[2:].strip()
        if q and a:
            examples.append(Exemplar(q, a))
    if not examples:
        raise DataError(f"no Q:/A: examples found in {path}")
    return examples


def _read_pool(path) -> list[probe.ProbeExample]:
    pool = []
    for i, r in enumerate(_read_jsonl(path), start=1):
        try:
            ex = Exemplar(r["question"], r["answer"], r.get("reasoning", ""))
            pool.append(probe.ProbeExample(ex, r["category"]))
        except (KeyError, ValueError) as exc:
            raise DataError(f"bad pool record: {exc}", line=i) from exc
    return pool


def _pool_records(examples: Sequence[probe.ProbeExample]) -> str:
    return "".join(json.dumps({"question": p.exemplar.question, "answer": p.exemplar.answer,
                               "reasoning": p.exemplar.reasoning, "category": p.category.value}) + "\n"
                   for p in examples)


def cmd_probe_identify(args) -> int:
    examples = _read_prompt_examples(args.prompt)
    records = probe.identify_prompt_heuristics(examples, _client(args))
    aliases = probe.load_aliases(args.aliases)
    for r in records:
        print(json.dumps({"example_index": r.example_index, "category_label": r.category_label,
                          "category": probe.categorize(r.category_label, aliases).value,
                          "shared_with": sorted(r.shared_with)}))
    print(f"distinct heuristics: {probe.count_distinct_heuristics(records)}")
    return EXIT_OK


def cmd_probe_strategy(args) -> int:
    pool = _read_pool(args.pool)
    bundle = probe.build_strategy_prompt(pool, args.n, args.mode, args.seed)
    _emit(bundle.rendered, args.out)
    print(f"seed: {args.seed}", file=sys.stderr)
    return EXIT_OK


def cmd_probe_deduct(args) -> int:
    out = probe.deduct_heuristic(_read_pool(args.demo), probe.HeuristicCategory(args.remove), _read_pool(args.pool))
    _emit(_pool_records(out), args.out)
    return EXIT_OK


def cmd_probe_label(args) -> int:
    samples = [probe.ProbeSample(r["id"], r["question"]) for r in _read_jsonl(args.samples)]
    taxonomy = [probe.HeuristicCategory(c) for c in args.taxonomy.split(",")] if args.taxonomy else probe.TAXONOMY
    grouped = probe.label_samples_by_heuristic(samples, taxonomy, _client(args), probe.load_aliases(args.aliases))
    probe.write_groups(args.out, grouped)
    print(json.dumps({"counts": grouped.counts(), "diagnostics": grouped.diagnostics}))
    return EXIT_OK


def cmd_probe_group_acc(args) -> int:
    results = [(r["sample_id"], bool(r["correct"])) for r in _read_jsonl(args.results)]
    acc = probe.grouped_accuracy(results, probe.read_groups(args.groups))
    for category, value in acc.items():
        print(f"{category.value:<6} {100 * value:.1f}")
    return EXIT_OK


# runs


def cmd_run(args) -> int:
    cfg = RunConfig.from_file(args.config)
    out = args.out or str(Path(args.config).with_suffix("")) + "-run"
    bundle = run_experiment(cfg, out_dir=out)
    sys.stdout.write(summary_table(bundle))
    print(f"report: {Path(out) / 'report.json'}")
    if bundle.failed:
        for r in bundle.failed:
            print(r["error"], file=sys.stderr)
        return EXIT_BACKEND
    return EXIT_OK


def _load_reports(paths) -> list[ReportBundle]:
    try:
        return [ReportBundle.load(p) for p in paths]
    except (OSError, KeyError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot read report: {exc}") from exc


def cmd_compare(args) -> int:
    table = compare_runs(_load_reports(args.reports), args.baseline)
    _emit(table.render(args.format), args.out)
    return EXIT_OK


def cmd_report(args) -> int:
    bundles = _load_reports(args.reports)
    if len(bundles) > 1 and args.baseline is not None:
        sys.stdout.write(compare_runs(bundles, args.baseline).render(args.format))
    else:
        sys.stdout.write("\n".join(summary_table(b, args.format) for b in bundles))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hdloa", description="HD-LoA prompting experiments")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    tasks = [t.value for t in TaskKind]

    data = sub.add_parser("data").add_subparsers(dest="action", required=True)
    p = data.add_parser("validate", help="load and validate a dataset file")
    p.add_argument("--task", required=True, choices=tasks)
    p.add_argument("--path", required=True)
    p.add_argument("--split", default="test")
    p.add_argument("--expect", type=int)
    p.set_defaults(func=cmd_data_validate)

    llm = sub.add_parser("llm").add_subparsers(dest="action", required=True)
    p = llm.add_parser("ping", help="send one prompt to the backend")
    _add_backend(p)
    p.add_argument("--prompt", default="ping")
    p.set_defaults(func=cmd_llm_ping)
    p = llm.add_parser("cache-stats")
    p.add_argument("--cache-dir", required=True)
    p.set_defaults(func=cmd_llm_cache_stats)

    heur = sub.add_parser("heuristics").add_subparsers(dest="action", required=True)
    p = heur.add_parser("generate")
    _add_backend(p)
    p.add_argument("--role", default="giver")
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--task-description", default=hmod.DEFAULT_TASK_DESCRIPTION)
    p.add_argument("--strict", action="store_true", help="fail on lines that are not heuristics")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_heuristics_generate)
    p = heur.add_parser("select")
    _add_backend(p)
    p.add_argument("--candidates", required=True)
    p.add_argument("--subset", required=True, help="labeled EAE data to select on")
    p.add_argument("--task", default="rams", choices=["rams", "docee"])
    p.add_argument("--split", default="train")
    p.add_argument("--fraction", type=float, default=1.0, help="fraction of --subset to use")
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--role", default="giver")
    p.add_argument("--policy", default="default")
    p.add_argument("--exemplars")
    p.add_argument("--max-parallel", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_heuristics_select)

    prompt = sub.add_parser("prompt").add_subparsers(dest="action", required=True)
    p = prompt.add_parser("build")
    p.add_argument("--task", required=True, choices=tasks)
    p.add_argument("--style", default="hdloa", choices=[s.value for s in Style])
    p.add_argument("--heuristics", help="heuristics JSONL, or 'default'")
    p.add_argument("--ablation", choices=[a.value for a in Ablation])
    p.add_argument("--data", required=True)
    p.add_argument("--split", default="test")
    p.add_argument("--target-id", required=True)
    p.add_argument("--exemplars")
    p.add_argument("--role", default="giver")
    p.add_argument("--out")
    p.set_defaults(func=cmd_prompt_build)

    p = sub.add_parser("score", help="score predictions against gold data")
    p.add_argument("--pred", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--task", default="rams", choices=tasks)
    p.add_argument("--split", default="test")
    p.add_argument("--policy", default="default")
    p.add_argument("--out")
    p.set_defaults(func=cmd_score)

    pr = sub.add_parser("probe").add_subparsers(dest="action", required=True)
    p = pr.add_parser("identify")
    _add_backend(p)
    p.add_argument("--prompt", required=True)
    p.add_argument("--aliases")
    p.set_defaults(func=cmd_probe_identify)
    p = pr.add_parser("strategy")
    p.add_argument("--pool", required=True)
    p.add_argument("--mode", required=True, choices=["single", "diverse", "random"])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_probe_strategy)
    p = pr.add_parser("deduct")
    p.add_argument("--demo", required=True)
    p.add_argument("--pool", required=True)
    p.add_argument("--remove", required=True, choices=[c.value for c in probe.TAXONOMY])
    p.add_argument("--out")
    p.set_defaults(func=cmd_probe_deduct)
    p = pr.add_parser("label")
    _add_backend(p)
    p.add_argument("--samples", required=True)
    p.add_argument("--taxonomy", help="comma-separated category codes")
    p.add_argument("--aliases")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_probe_label)
    p = pr.add_parser("group-acc")
    p.add_argument("--results", required=True)
    p.add_argument("--groups", required=True)
    p.set_defaults(func=cmd_probe_group_acc)

    p = sub.add_parser("run", help="run an experiment config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", help="output directory (default: <config>-run)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("compare", help="compare reports against a baseline")
    p.add_argument("reports", nargs="+")
    p.add_argument("--baseline", type=int, default=0)
    p.add_argument("--format", default="table", choices=["table", "markdown"])
    p.add_argument("--out")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("report", help="summarize one or more reports")
    p.add_argument("reports", nargs="+")
    p.add_argument("--format", default="table", choices=["table", "markdown"])
    p.add_argument("--baseline", type=int)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigError, ConfigurationError, TemplateError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except LLMError as exc:
        print(f"backend error: {exc}", file=sys.stderr)
        return EXIT_BACKEND
    except (DataError, KeyError, probe.ProbeError, hmod.HeuristicParseError, ValueError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
