"""Heuristic generation with an LLM and accuracy-based selection."""

from __future__ import annotations

import json
import logging
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

from .core import EMPTY_SCORES, EAEInstance, EAEScores, Heuristic, HeuristicSet, Provenance, RolePredictions, TaskKind
from .llm import LLMClient
from .parse import parse_eae_output
from .promptkit.builder import build_hdloa_prompt
from .promptkit.exemplars import Exemplar
from .promptkit.templates import load_template, render_template
from .score import DEFAULT_POLICY, MatchPolicy, score_instance

logger = logging.getLogger(__name__)

DEFAULT_TASK_DESCRIPTION = "event argument extraction task"
DEFAULT_EXAMPLE = (
    "Semantic heuristic: The '{role}' is identified as the individual, group, or organization mentioned "
    "in the document that is responsible for providing a gift or grant."
)

# "3. **Lexical heuristic:** body", "- Syntactic Heuristic: body"
_LINE = re.compile(
    r"^\s*(?:[-*•]+\s*|\d+[.)]\s*)?\**\s*(?P<label>[^:]*?)\s+heuristic\s*\**\s*:\s*\**\s*(?P<body>.+?)\s*$",
    re.IGNORECASE,
)


class HeuristicParseError(ValueError):
    pass


@dataclass(frozen=True)
class RankedHeuristics:
    """Top-k heuristics ordered by accuracy (ties: lower generation_index first).

    ``all_scores`` keeps every candidate's Arg-C and ``failures`` lists the
    (label, instance id, error) triples that were scored as zero credit.
    """

    ranked: tuple[Heuristic, ...]
    k: int
    subset_size: int
    seed: int = 0
    all_scores: tuple[Heuristic, ...] = ()
    per_role: dict = field(default_factory=dict)
    failures: tuple[tuple[str, str, str], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "ranked", tuple(self.ranked))
        if any(h.eval_accuracy is None for h in self.ranked):
            raise ValueError("ranked heuristics need eval_accuracy")
        if list(self.ranked) != sorted(self.ranked, key=rank_key):
            raise ValueError("ranked heuristics are not in rank order")
        if len(self.ranked) > self.k:
            raise ValueError(f"{len(self.ranked)} heuristics ranked for k={self.k}")

    def __iter__(self):
        return iter(self.ranked)

    def __len__(self):
        return len(self.ranked)


def rank_key(h: Heuristic):
    return (-(h.eval_accuracy or 0.0), h.generation_index)


def split_heuristic_lines(text: str) -> tuple[list[Heuristic], list[str]]:
    heuristics, skipped = [], []
    for line in text.splitlines():
        if not line.strip():
            continue
        m = _LINE.match(line)
        label = m.group("label").strip(" *") if m else ""
        if not m or not label:
            skipped.append(line)
            continue
        heuristics.append(Heuristic(label, m.group("body").strip(" *"), Provenance.GENERATED, len(heuristics)))
    return heuristics, skipped


def parse_heuristic_lines(text: str, strict: bool = False) -> list[Heuristic]:
    """One heuristic per ``<Label> heuristic: <body>`` line, in order."""
    heuristics, skipped = split_heuristic_lines(text)
    for line in skipped:
        logger.info("skipped non-heuristic line: %r", line)
    if strict and skipped:
        raise HeuristicParseError(f"{len(skipped)} line(s) are not heuristics, first: {skipped[0]!r}")
    return heuristics


def generation_prompt(base_role: str, n: int, task_description: str = DEFAULT_TASK_DESCRIPTION,
                      example: Optional[str] = None) -> str:
    if n < 1:
        raise ValueError("n must be >= 1")
    example = example or DEFAULT_EXAMPLE.format(role=base_role)
    return render_template(load_template("heuristics", "generate"), {
        "n": str(n), "role": base_role, "task_description": task_description, "example": example,
    })


def generate_heuristics(task_description: str, base_role: str, n: int, backend: LLMClient,
                        strict: bool = False) -> HeuristicSet:
    """Ask the model for ``n`` heuristics and parse exactly ``n`` back."""
    prompt = generation_prompt(base_role, n, task_description or DEFAULT_TASK_DESCRIPTION)
    text = backend.ask(prompt).text
    heuristics = parse_heuristic_lines(text, strict=strict)
    if len(heuristics) < n:
        raise HeuristicParseError(f"parsed {len(heuristics)} of {n} heuristics")
    if len(heuristics) > n:
        logger.warning("model returned %d heuristics, keeping the first %d", len(heuristics), n)
        heuristics = heuristics[:n]
    return HeuristicSet(tuple(heuristics), base_role)


@dataclass
class SingleHeuristicPipeline:
    """Prompt with one heuristic and one exemplar, complete, parse, score."""

    client: LLMClient
    exemplar: Exemplar
    task: TaskKind = TaskKind.EAE_RAMS
    base_role: str = "giver"
    max_answers: Optional[int] = None
    policy: MatchPolicy = DEFAULT_POLICY

    def prompt(self, heuristic: Heuristic, inst: EAEInstance) -> str:
        return build_hdloa_prompt(self.task, (heuristic,), (self.exemplar,), inst, base_role=self.base_role).rendered

    def predict(self, heuristic: Heuristic, inst: EAEInstance) -> RolePredictions:
        text = self.client.ask(self.prompt(heuristic, inst)).text
        max_answers = self.max_answers or TaskKind.parse(self.task).default_max_answers
        preds, _ = parse_eae_output(text, inst.roles, max_answers)
        return preds

    def __call__(self, heuristic: Heuristic, inst: EAEInstance):
        return score_instance(inst, self.predict(heuristic, inst), self.policy)


def _zero_credit(inst: EAEInstance) -> EAEScores:
    n_gold = sum(len(v) for v in inst.gold.values())
    return EAEScores(0, 0, n_gold, 0, 0, n_gold)


def _evaluate(heuristic: Heuristic, subset: Sequence[EAEInstance], pipeline: Callable):
    total, per_role, failures = EMPTY_SCORES, {}, []
    for inst in subset:
        try:
            counts = pipeline(heuristic, inst)
        except Exception as exc:  # zero credit, not fatal
            logger.warning("heuristic %r failed on %s: %s", heuristic.label, inst.id, exc)
            failures.append((heuristic.label, inst.id, f"{type(exc).__name__}: {exc}"))
            total = total + _zero_credit(inst)
            continue
        total = total + counts.scores
        for role, s in counts.per_role.items():
            per_role[role] = per_role.get(role, EMPTY_SCORES) + s
    return total, per_role, failures


def select_heuristics(candidates: Iterable[Heuristic], eval_subset: Sequence[EAEInstance], k: int,
                      pipeline: Callable, seed: int = 0, max_parallel: int = 1) -> RankedHeuristics:
    """Score each heuristic alone on ``eval_subset`` (pooled Arg-C F1) and keep the top ``k``."""
    candidates = tuple(candidates)
    if not candidates:
        raise ValueError("no candidate heuristics")
    if not eval_subset:
        raise ValueError("evaluation subset is empty")
    if k < 1:
        raise ValueError("k must be >= 1")
    with ThreadPoolExecutor(max_workers=max(1, max_parallel)) as pool:
        results = list(pool.map(lambda h: _evaluate(h, eval_subset, pipeline), candidates))
    scored, per_role, failures = [], {}, []
    for h, (total, roles, fails) in zip(candidates, results):
        scored.append(Heuristic(h.label, h.body, h.provenance, h.generation_index, total.arg_c.f1))
        per_role[h.label] = {r: s.to_dict() for r, s in sorted(roles.items())}
        failures.extend(fails)
    ordered = sorted(scored, key=rank_key)
    return RankedHeuristics(tuple(ordered[:k]), k, len(eval_subset), seed,
                            tuple(sorted(scored, key=lambda h: h.generation_index)), per_role, tuple(failures))


def read_heuristics(path) -> list[Heuristic]:
    with open(path, encoding="utf-8") as fh:
        return [Heuristic.from_record(json.loads(line)) for line in fh if line.strip()]


def write_heuristics(path, heuristics: Iterable[Heuristic]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for h in heuristics:
            fh.write(json.dumps(h.to_record(), ensure_ascii=False) + "\n")
