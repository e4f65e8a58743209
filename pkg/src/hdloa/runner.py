"""Experiment runs: config, the per-instance pipeline, reports and comparisons."""

from __future__ import annotations

import json
import logging
import os
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

from .core import EAEInstance, RolePredictions, TaskKind
from .data import DatasetManifest, classification_to_record, eae_to_record, load, sample_subset
from .heuristics import SingleHeuristicPipeline, generate_heuristics, read_heuristics, select_heuristics
from .llm import LLMClient, cache_key, client_from_config
from .parse import LabelParseError, parse_eae_output, parse_label_output
from .promptkit.builder import (
    Ablation,
    Style,
    exemplar_from_dict,
    build_baseline_prompt,
    build_hdloa_prompt,
    load_prompt_template,
)
from .promptkit.defaults import default_exemplars, default_heuristics
from .promptkit.templates import template_digest
from .score import MatchPolicy, per_role_scores, score_classification, score_eae, seen_unseen_breakdown

logger = logging.getLogger(__name__)

REPORT_VERSION = 1

_STYLE_NAMES = {"hdloa": "HD-LoA", "cot": "CoT", "standard": "Standard"}
_ABLATION_SUFFIX = {"no_heuristics": " w/o heuristics", "no_loa": " w/o LoA"}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    """Declarative description of one experiment.

    ``heuristics_path`` may be ``"default"`` for the built-in list. With
    ``generate=True`` and no path, heuristics are generated and then selected
    on ``selection_fraction`` of ``selection_dataset``.
    """

    task: TaskKind
    dataset: DatasetManifest
    style: Style = Style.HDLOA
    heuristics_path: Optional[str] = None
    k: int = 3
    n_generate: int = 10
    model_id: str = "mock-model"
    temperature: float = 0.0
    max_parallel: int = 4
    cache_dir: Optional[str] = None
    seed: int = 0
    ablation: Optional[Ablation] = None
    eval_limit: Optional[int] = None
    backend: dict = field(default_factory=lambda: {"kind": "mock"})
    exemplars_path: Optional[str] = None
    base_role: str = "giver"
    max_answers: Optional[int] = None
    policy: str = "default"
    generate: bool = False
    selection_dataset: Optional[DatasetManifest] = None
    selection_fraction: float = 0.01
    name: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "task", TaskKind.parse(self.task))
        object.__setattr__(self, "style", Style(self.style))
        if self.ablation is not None:
            object.__setattr__(self, "ablation", Ablation(self.ablation))
        self.validate()

    def validate(self) -> None:
        if self.ablation is not None and self.style is not Style.HDLOA:
            raise ConfigError("ablations apply to the hdloa style only")
        needs_heuristics = self.style is Style.HDLOA and self.ablation is not Ablation.NO_HEURISTICS
        if needs_heuristics and not self.heuristics_path and not self.generate:
            raise ConfigError("hdloa runs need heuristics_path or generate=true")
        if self.generate and not self.heuristics_path:
            if not self.task.is_eae:
                raise ConfigError("heuristic generation and selection are defined for EAE tasks only")
            if self.selection_dataset is None:
                raise ConfigError("generate=true needs a selection_dataset")
        if self.k < 1 or self.n_generate < 1:
            raise ConfigError("k and n_generate must be >= 1")
        if self.max_parallel < 1:
            raise ConfigError("max_parallel must be >= 1")
        if self.temperature < 0:
            raise ConfigError("temperature must be >= 0")
        if self.eval_limit is not None and self.eval_limit < 1:
            raise ConfigError("eval_limit must be >= 1")
        MatchPolicy.named(self.policy)

    @property
    def method(self) -> str:
        return self.name or _method_from_config(self.to_dict())

    def to_dict(self) -> dict:
        return {
            "task": self.task.value,
            "dataset": self.dataset.to_dict(),
            "style": self.style.value,
            "heuristics_path": self.heuristics_path,
            "k": self.k,
            "n_generate": self.n_generate,
            "model_id": self.model_id,
            "temperature": self.temperature,
            "max_parallel": self.max_parallel,
            "cache_dir": self.cache_dir,
            "seed": self.seed,
            "ablation": self.ablation.value if self.ablation else None,
            "eval_limit": self.eval_limit,
            "backend": self.backend,
            "exemplars_path": self.exemplars_path,
            "base_role": self.base_role,
            "max_answers": self.max_answers,
            "policy": self.policy,
            "generate": self.generate,
            "selection_dataset": self.selection_dataset.to_dict() if self.selection_dataset else None,
            "selection_fraction": self.selection_fraction,
            "name": self.name,
        }

    @classmethod
    def from_dict(cls, d: dict, base_dir=None) -> "RunConfig":
        d = dict(d)
        base = Path(base_dir) if base_dir else None

        def resolve(p):
            if p is None or p == "default" or base is None or os.path.isabs(p):
                return p
            return str(base / p)

        try:
            task = TaskKind.parse(d.pop("task"))
            ds = dict(d.pop("dataset"))
            ds.setdefault("task", task.value)
            ds["path"] = resolve(ds["path"])
            sel = d.pop("selection_dataset", None)
            if sel is not None:
                sel = dict(sel)
                sel.setdefault("task", task.value)
                sel["path"] = resolve(sel["path"])
                sel = DatasetManifest.from_dict(sel)
            for key in ("heuristics_path", "cache_dir", "exemplars_path"):
                if key in d:
                    d[key] = resolve(d[key])
            backend = dict(d.get("backend", {"kind": "mock"}))
            if isinstance(backend.get("script"), str):
                backend["script"] = resolve(backend["script"])
            d["backend"] = backend
            unknown = set(d) - set(cls.__dataclass_fields__)
            if unknown:
                raise ConfigError(f"unknown config keys: {sorted(unknown)}")
            return cls(task=task, dataset=DatasetManifest.from_dict(ds), selection_dataset=sel, **d)
        except KeyError as exc:
            raise ConfigError(f"missing config key {exc}") from None
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        path = Path(path)
        try:
            with open(path, encoding="utf-8") as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(raw, base_dir=path.parent)


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


@dataclass
class ReportBundle:
    config: dict
    records: list[dict]
    aggregate: dict
    template_digests: dict = field(default_factory=dict)
    timing: dict = field(default_factory=dict)
    cache: dict = field(default_factory=dict)
    sampling: dict = field(default_factory=dict)
    version: int = REPORT_VERSION

    @property
    def method(self) -> str:
        return self.config.get("name") or _method_from_config(self.config)

    @property
    def failed(self) -> list[dict]:
        return [r for r in self.records if r.get("failed")]

    def aggregate_json(self) -> str:
        """Canonical text of the aggregate section (no timing, no cache stats)."""
        return canonical_json(self.aggregate)

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "config": self.config,
            "template_digests": self.template_digests,
            "sampling": self.sampling,
            "aggregate": self.aggregate,
            "timing": self.timing,
            "cache": self.cache,
            "records": self.records,
        }

    def write(self, path) -> None:
        _atomic_write(Path(path), json.dumps(self.to_dict(), sort_keys=True, ensure_ascii=False, indent=1) + "\n")

    @classmethod
    def from_dict(cls, d: dict) -> "ReportBundle":
        return cls(d["config"], d["records"], d["aggregate"], d.get("template_digests", {}),
                   d.get("timing", {}), d.get("cache", {}), d.get("sampling", {}), d.get("version", REPORT_VERSION))

    @classmethod
    def load(cls, path) -> "ReportBundle":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def _method_from_config(cfg: dict) -> str:
    base = _STYLE_NAMES.get(cfg.get("style"), str(cfg.get("style", "?")))
    return base + _ABLATION_SUFFIX.get(cfg.get("ablation"), "")


def _load_exemplars(cfg: RunConfig):
    if cfg.exemplars_path:
        with open(cfg.exemplars_path, encoding="utf-8") as fh:
            return tuple(exemplar_from_dict(e) for e in json.load(fh))
    return default_exemplars(cfg.task, cfg.style)


def resolve_heuristics(cfg: RunConfig, client: LLMClient, exemplars) -> tuple:
    if cfg.style is not Style.HDLOA or cfg.ablation is Ablation.NO_HEURISTICS:
        return ()
    if cfg.heuristics_path == "default":
        return default_heuristics(cfg.task)[: cfg.k] if cfg.task.is_eae else default_heuristics(cfg.task)
    if cfg.heuristics_path:
        hs = read_heuristics(cfg.heuristics_path)
        if not hs:
            raise ConfigError(f"no heuristics in {cfg.heuristics_path}")
        if all(h.eval_accuracy is not None for h in hs):
            hs = sorted(hs, key=lambda h: (-h.eval_accuracy, h.generation_index))
        return tuple(hs[: cfg.k])
    generated = generate_heuristics("event argument extraction task", cfg.base_role, cfg.n_generate, client)
    subset = sample_subset(load(cfg.selection_dataset), cfg.selection_fraction, cfg.seed)
    pipeline = SingleHeuristicPipeline(client, exemplars[0], cfg.task, cfg.base_role, cfg.max_answers,
                                       MatchPolicy.named(cfg.policy))
    return select_heuristics(generated, subset, cfg.k, pipeline, cfg.seed, cfg.max_parallel).ranked


def build_prompt(cfg: RunConfig, heuristics, exemplars, inst):
    if cfg.style is Style.HDLOA:
        return build_hdloa_prompt(cfg.task, heuristics, exemplars, inst, base_role=cfg.base_role,
                                  ablation=cfg.ablation)
    return build_baseline_prompt(cfg.style, cfg.task, exemplars, inst)


def _gold_record(task: TaskKind, inst) -> dict:
    if task.is_eae:
        rec = eae_to_record(inst)
        return {"roles": rec["roles"], "gold": rec["gold"]}
    return {"gold_label": classification_to_record(inst)["gold_label"]}


def _run_instance(cfg: RunConfig, client: LLMClient, heuristics, exemplars, inst, out_dir) -> dict:
    record = {"instance_id": inst.id, **_gold_record(cfg.task, inst)}
    try:
        prompt = build_prompt(cfg, heuristics, exemplars, inst).rendered
        request = client.request(prompt, cfg.temperature)
        record["prompt_digest"] = cache_key(request)
        previous = _load_record(out_dir, inst.id)
        if previous and previous.get("prompt_digest") == record["prompt_digest"] and not previous.get("failed"):
            return previous
        result = client.complete(request)
        record["raw_output"] = result.text
        record["cached"] = result.cached
        if cfg.task.is_eae:
            max_answers = cfg.max_answers or cfg.task.default_max_answers
            preds, diag = parse_eae_output(result.text, inst.roles, max_answers)
            record["predictions"] = {r: list(s) for r, s in preds.per_role.items()}
            record["diagnostics"] = diag.to_dict()
        else:
            try:
                record["predicted_label"] = parse_label_output(result.text, cfg.task)
            except LabelParseError as exc:
                record["predicted_label"] = None
                record["parse_error"] = str(exc)
        record["failed"] = False
    except Exception as exc:
        logger.error("instance %s failed: %s", inst.id, exc)
        record["failed"] = True
        record["error"] = f"instance {inst.id}: {type(exc).__name__}: {exc}"
    if out_dir is not None:
        _atomic_write(_record_path(out_dir, inst.id), canonical_json(record) + "\n")
    return record


def _record_path(out_dir, instance_id: str) -> Path:
    safe = "".join(c if c.isalnum() or c in "-_." else "_" for c in instance_id)
    return Path(out_dir) / "records" / f"{safe}.json"


def _load_record(out_dir, instance_id: str) -> Optional[dict]:
    if out_dir is None:
        return None
    path = _record_path(out_dir, instance_id)
    if not path.is_file():
        return None
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError:
        return None


def aggregate_records(records: Sequence[dict], task: TaskKind, policy: MatchPolicy,
                      exemplar_roles: Sequence[str] = ()) -> dict:
    """Scores from per-instance records alone; failed instances score zero."""
    task = TaskKind.parse(task)
    failed = sum(1 for r in records if r.get("failed"))
    out = {"task": task.value, "instances": len(records), "failed": failed, "policy": policy.to_dict()}
    if task.is_eae:
        pairs = []
        for r in records:
            inst = EAEInstance(r["instance_id"], "", "", tuple(r["roles"]), r["gold"])
            preds = {} if r.get("failed") else r.get("predictions", {})
            pairs.append((inst, RolePredictions(preds)))
        scores = score_eae(pairs, policy)
        split = seen_unseen_breakdown(pairs, exemplar_roles, policy)
        out["scores"] = scores.to_dict()
        out["per_role"] = {role: s.to_dict() for role, s in per_role_scores(pairs, policy).items()}
        out["seen_unseen"] = {
            "exemplar_roles": sorted(exemplar_roles),
            "seen": split.seen.to_dict(), "unseen": split.unseen.to_dict(),
            "seen_pairs": split.seen_pairs, "unseen_pairs": split.unseen_pairs,
        }
        out["fallback_parses"] = sum(1 for r in records if r.get("diagnostics", {}).get("used_fallback"))
    else:
        pairs = [(r["gold_label"], None if r.get("failed") else r.get("predicted_label")) for r in records]
        out["accuracy"] = score_classification(pairs) if pairs else 0.0
        out["correct"] = sum(1 for g, p in pairs if p == g)
        out["parse_errors"] = sum(1 for r in records if not r.get("failed") and r.get("predicted_label") is None)
    return out


def _sampling_info(cfg: RunConfig, n_total: int) -> dict:
    info = {"rule": "ceil(fraction*N) by seeded permutation, file order kept", "seed": cfg.seed,
            "eval_limit": cfg.eval_limit, "dataset_size": n_total}
    if cfg.generate and not cfg.heuristics_path:
        info["selection_fraction"] = cfg.selection_fraction
    return info


def run_experiment(cfg: RunConfig, client: Optional[LLMClient] = None, out_dir=None) -> ReportBundle:
    """Build, complete, parse and score every instance; write ``report.json`` to ``out_dir``.

    Per-instance records are written to ``out_dir/records`` as they finish,
    so an interrupted run can resume; a record is reused only when its
    prompt digest still matches.
    """
    started = time.monotonic()
    instances = load(cfg.dataset)
    n_total = len(instances)
    if cfg.eval_limit is not None and cfg.eval_limit < n_total:
        instances = sample_subset(instances, Fraction(cfg.eval_limit, n_total), cfg.seed)
    if client is None:
        client = client_from_config({"model_id": cfg.model_id, **cfg.backend}, cfg.cache_dir)
    exemplars = _load_exemplars(cfg)
    heuristics = resolve_heuristics(cfg, client, exemplars)

    with ThreadPoolExecutor(max_workers=cfg.max_parallel) as pool:
        records = list(pool.map(lambda inst: _run_instance(cfg, client, heuristics, exemplars, inst, out_dir),
                                instances))

    exemplar_roles = sorted({r for ex in exemplars for r in ex.label_coverage}) if cfg.task.is_eae else []
    aggregate = aggregate_records(records, cfg.task, MatchPolicy.named(cfg.policy), exemplar_roles)
    aggregate["method"] = cfg.method
    aggregate["heuristics"] = [h.to_record() for h in heuristics]
    instruction = load_prompt_template(cfg.task, cfg.style, cfg.ablation)
    bundle = ReportBundle(
        config=cfg.to_dict(),
        records=records,
        aggregate=aggregate,
        template_digests={f"{cfg.task.value}/{cfg.style.value}": template_digest(instruction)},
        timing={"wall_seconds": round(time.monotonic() - started, 3)},
        cache={"requests": client.requests, "hits": client.cache_hits, "hit_rate": client.hit_rate},
        sampling=_sampling_info(cfg, n_total),
    )
    if out_dir is not None:
        bundle.write(Path(out_dir) / "report.json")
    return bundle


# comparison tables


def headline_metrics(bundle: ReportBundle) -> dict[str, float]:
    """Percentages: Arg-I/Arg-C F1 for EAE, accuracy otherwise."""
    agg = bundle.aggregate
    if "scores" in agg:
        return {"Arg-I": 100 * agg["scores"]["arg_i"]["f1"], "Arg-C": 100 * agg["scores"]["arg_c"]["f1"]}
    return {"Accuracy": 100 * agg["accuracy"]}


def _dataset_key(bundle: ReportBundle):
    ds = bundle.config.get("dataset", {})
    return bundle.config.get("task"), ds.get("split"), os.path.basename(str(ds.get("path", "")))


@dataclass(frozen=True)
class ComparisonTable:
    methods: tuple[str, ...]
    metrics: tuple[str, ...]
    values: tuple[tuple[float, ...], ...]
    baseline: int

    def delta(self, row: int, col: int) -> float:
        return round(self.values[row][col] - self.values[self.baseline][col], 2)

    def to_dict(self) -> dict:
        return {
            "baseline": self.methods[self.baseline],
            "rows": [
                {"method": m, **{k: round(v, 2) for k, v in zip(self.metrics, vals)},
                 **{f"delta {k}": self.delta(i, j) for j, k in enumerate(self.metrics)}}
                for i, (m, vals) in enumerate(zip(self.methods, self.values))
            ],
        }

    def render(self, fmt: str = "table") -> str:
        headers = ["method"] + [m for m in self.metrics] + [f"Δ {m}" for m in self.metrics]
        rows = []
        for i, (m, vals) in enumerate(zip(self.methods, self.values)):
            label = f"{m} (baseline)" if i == self.baseline else m
            deltas = ["-" if i == self.baseline else f"{self.delta(i, j):+.2f}" for j in range(len(self.metrics))]
            rows.append([label] + [f"{v:.2f}" for v in vals] + deltas)
        if fmt == "markdown":
            out = ["| " + " | ".join(headers) + " |", "|" + "|".join("---" for _ in headers) + "|"]
            out += ["| " + " | ".join(r) + " |" for r in rows]
            return "\n".join(out) + "\n"
        if fmt != "table":
            raise ValueError(f"unknown format {fmt!r}")
        widths = [max(len(r[c]) for r in rows + [headers]) for c in range(len(headers))]
        fmt_row = lambda r: "  ".join(v.ljust(w) if c == 0 else v.rjust(w)  # noqa: E731
                                      for c, (v, w) in enumerate(zip(r, widths)))
        return "\n".join([fmt_row(headers)] + [fmt_row(r) for r in rows]) + "\n"


def compare_runs(bundles: Sequence[ReportBundle], baseline: int = 0) -> ComparisonTable:
    if len(bundles) < 2:
        raise ValueError("comparison needs at least two reports")
    keys = {_dataset_key(b) for b in bundles}
    if len(keys) != 1:
        raise ValueError(f"reports cover different datasets: {sorted(map(str, keys))}")
    if not 0 <= baseline < len(bundles):
        raise ValueError(f"baseline index {baseline} out of range")
    metrics = [headline_metrics(b) for b in bundles]
    names = tuple(metrics[0])
    return ComparisonTable(
        tuple(b.method for b in bundles), names,
        tuple(tuple(m[n] for n in names) for m in metrics), baseline,
    )


def summary_table(bundle: ReportBundle, fmt: str = "table") -> str:
    """One-report summary: headline metrics plus run bookkeeping."""
    metrics = headline_metrics(bundle)
    agg = bundle.aggregate
    rows = [("method", bundle.method), ("task", agg.get("task", "?")), ("instances", str(agg.get("instances"))),
            ("failed", str(agg.get("failed")))]
    rows += [(k, f"{v:.2f}") for k, v in metrics.items()]
    if bundle.cache:
        rows.append(("cache hit rate", f"{bundle.cache.get('hit_rate', 0.0):.4f}"))
    if fmt == "markdown":
        return "\n".join(["| field | value |", "|---|---|"] + [f"| {k} | {v} |" for k, v in rows]) + "\n"
    width = max(len(k) for k, _ in rows)
    return "\n".join(f"{k:<{width}}  {v}" for k, v in rows) + "\n"
