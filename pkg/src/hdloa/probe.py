"""Tools for probing the heuristics implicit in few-shot demonstrations.

Identify the heuristic behind each example with a model, count distinct
heuristics, build single- or diverse-heuristic demonstrations, swap out one
heuristic type, and compute accuracy per heuristic group.
"""

from __future__ import annotations

import enum
import json
import random
import re
import string
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

from .llm import LLMClient
from .promptkit.builder import PromptBundle, Style, build_baseline_prompt
from .promptkit.exemplars import Exemplar
from .promptkit.templates import load_template, render_template

ALIAS_FILE = Path(__file__).with_name("probe_aliases.json")


class HeuristicCategory(str, enum.Enum):
    ER = "ER"
    COMP = "Comp"
    KB = "KB"
    DEF = "Def"
    CHRON = "Chron"
    OTHER = "Other"


TAXONOMY = (HeuristicCategory.ER, HeuristicCategory.COMP, HeuristicCategory.KB,
            HeuristicCategory.DEF, HeuristicCategory.CHRON)

CATEGORY_NAMES = {
    HeuristicCategory.ER: "empathetic reasoning",
    HeuristicCategory.COMP: "comparison",
    HeuristicCategory.KB: "knowledge-based",
    HeuristicCategory.DEF: "definition-based",
    HeuristicCategory.CHRON: "chronological",
    HeuristicCategory.OTHER: "other",
}


class ProbeError(ValueError):
    pass


def load_aliases(path=None) -> dict[str, HeuristicCategory]:
    with open(path or ALIAS_FILE, encoding="utf-8") as fh:
        raw = json.load(fh)
    return {normalize_label(k): HeuristicCategory(v) for k, v in raw.items()}


_PUNCT = string.punctuation.replace("-", "") + "“”‘’"


def normalize_label(label: str) -> str:
    """``'Comparison Heuristic,'`` -> ``'comparison'``."""
    text = " ".join(label.casefold().split()).strip(_PUNCT + " ")
    text = re.sub(r"\s*heuristics?$", "", text).strip(_PUNCT + " ")
    return text


def categorize(label: str, aliases: Optional[Mapping[str, HeuristicCategory]] = None) -> HeuristicCategory:
    aliases = load_aliases() if aliases is None else aliases
    return aliases.get(normalize_label(label), HeuristicCategory.OTHER)


@dataclass(frozen=True)
class IdentifiedHeuristic:
    example_index: int  # 1-based, as in the identifier output
    category_label: str
    shared_with: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "shared_with", frozenset(self.shared_with))


def identification_prompt(examples: Sequence[Exemplar]) -> str:
    blocks = []
    for i, ex in enumerate(examples, start=1):
        answer = f"{ex.reasoning} {ex.answer}" if ex.reasoning else ex.answer
        blocks.append(f"example {i}\nQ: {ex.question}\nA: {answer}")
    return render_template(load_template("probe", "identify"), {"examples": "\n\n".join(blocks)})


_EXAMPLE_HEAD = re.compile(r"^\s*\**\s*example\s+(\d+)\s*\**\s*[:.)-]", re.IGNORECASE | re.MULTILINE)
_EXAMPLE_REF = re.compile(r"\bexamples?\s+(\d+)", re.IGNORECASE)
_QUOTE = re.compile(r"[\"“”]([^\"“”]+)[\"“”]")
_BEFORE_HEURISTIC = re.compile(r"([\w-]+(?:\s+[\w-]+)?)\s+heuristic", re.IGNORECASE)


def _paragraph_label(body: str) -> str:
    m = _QUOTE.search(body)
    if m:
        return normalize_label(m.group(1))
    m = _BEFORE_HEURISTIC.search(body)
    if m:
        words = [w for w in m.group(1).split() if w.casefold() not in {"the", "a", "an", "this", "uses"}]
        return normalize_label(" ".join(words))
    return ""


def parse_identification(text: str, n_examples: int) -> list[IdentifiedHeuristic]:
    """Turn ``Example N: ...`` paragraphs into records.

    The label is the first quoted phrase of each paragraph. Examples that
    share a normalized label, or whose paragraph names another example, are
    linked both ways.
    """
    heads = list(_EXAMPLE_HEAD.finditer(text))
    labels, refs = {}, {}
    for pos, m in enumerate(heads):
        idx = int(m.group(1))
        end = heads[pos + 1].start() if pos + 1 < len(heads) else len(text)
        body = text[m.end():end]
        if idx in labels:
            raise ProbeError(f"identifier output describes example {idx} twice")
        labels[idx] = _paragraph_label(body)
        refs[idx] = {int(r) for r in _EXAMPLE_REF.findall(body)} - {idx}
    expected = set(range(1, n_examples + 1))
    missing = sorted(expected - set(labels))
    if missing:
        raise ProbeError(f"identifier output is missing example(s) {missing} "
                         f"({len(labels)} records for {n_examples} examples)")
    extra = sorted(set(labels) - expected)
    if extra:
        raise ProbeError(f"identifier output names example(s) {extra} beyond the {n_examples} given")
    shared = {i: set(refs[i]) & expected for i in expected}
    for i in expected:
        for j in expected:
            if i != j and labels[i] and labels[i] == labels[j]:
                shared[i].add(j)
    for i in expected:
        for j in list(shared[i]):
            shared[j].add(i)
    return [IdentifiedHeuristic(i, labels[i], frozenset(shared[i])) for i in sorted(expected)]


def identify_prompt_heuristics(prompt_examples: Sequence[Exemplar], backend: LLMClient) -> list[IdentifiedHeuristic]:
    if not prompt_examples:
        raise ValueError("need at least one example")
    text = backend.ask(identification_prompt(prompt_examples)).text
    return parse_identification(text, len(prompt_examples))


def count_distinct_heuristics(identified: Iterable[IdentifiedHeuristic]) -> int:
    """Number of groups once shared examples and equal labels are merged."""
    records = list(identified)
    parent = {r.example_index: r.example_index for r in records}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a, b):
        if a in parent and b in parent:
            parent[find(a)] = find(b)

    by_label = {}
    for r in records:
        for other in r.shared_with:
            union(r.example_index, other)
        label = normalize_label(r.category_label)
        if label:
            if label in by_label:
                union(r.example_index, by_label[label])
            by_label.setdefault(label, r.example_index)
    return len({find(x) for x in parent})


@dataclass(frozen=True)
class ProbeExample:
    exemplar: Exemplar
    category: HeuristicCategory

    def __post_init__(self):
        object.__setattr__(self, "category", HeuristicCategory(self.category))


def _by_category(pool: Sequence[ProbeExample]) -> dict[HeuristicCategory, list[int]]:
    out: dict[HeuristicCategory, list[int]] = {}
    for i, ex in enumerate(pool):
        out.setdefault(ex.category, []).append(i)
    return out


def select_strategy(pool: Sequence[ProbeExample], n: int, strategy: str, seed: int = 0) -> list[ProbeExample]:
    """Pick ``n`` pool examples sharing one category (single) or all distinct (diverse)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = random.Random(seed)
    groups = _by_category(pool)
    order = sorted(groups, key=lambda c: list(HeuristicCategory).index(c))
    if strategy == "single":
        eligible = [c for c in order if len(groups[c]) >= n]
        if not eligible:
            largest = max((len(v) for v in groups.values()), default=0)
            raise ProbeError(f"single strategy needs {n} examples of one category, "
                             f"largest category has {largest}")
        chosen = sorted(rng.sample(groups[rng.choice(eligible)], n))
    elif strategy == "diverse":
        if len(order) < n:
            raise ProbeError(f"diverse strategy needs {n} distinct categories, pool has {len(order)}")
        chosen = sorted(rng.choice(groups[c]) for c in rng.sample(order, n))
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    return [pool[i] for i in chosen]


def select_random(pool: Sequence[ProbeExample], n: int, seed: int = 0) -> list[ProbeExample]:
    """Seeded random baseline; the seed should be reported with the results."""
    if n > len(pool):
        raise ProbeError(f"random selection needs {n} examples, pool has {len(pool)}")
    return [pool[i] for i in sorted(random.Random(seed).sample(range(len(pool)), n))]


def build_strategy_prompt(pool: Sequence[ProbeExample], n: int, strategy: str, seed: int = 0,
                          target: str = "Q:") -> PromptBundle:
    if strategy == "random":
        chosen = select_random(pool, n, seed)
    else:
        chosen = select_strategy(pool, n, strategy, seed)
    return build_baseline_prompt(Style.COT, None, [p.exemplar for p in chosen], target)


def deduct_heuristic(demo: Sequence[ProbeExample], remove: HeuristicCategory,
                     pool: Sequence[ProbeExample]) -> list[ProbeExample]:
    """Replace the single ``remove`` example with a pool example of a category already present."""
    remove = HeuristicCategory(remove)
    slots = [i for i, ex in enumerate(demo) if ex.category is remove]
    if not slots:
        raise ProbeError(f"category {remove.value} is not in the demonstration")
    if len(slots) > 1:
        raise ProbeError(f"category {remove.value} occurs {len(slots)} times; deduction needs exactly one")
    present = {ex.category for ex in demo} - {remove}
    for cand in pool:
        if cand.category in present and cand not in demo:
            out = list(demo)
            out[slots[0]] = cand
            return out
    raise ProbeError(f"no pool example of a category in {sorted(c.value for c in present)} "
                     f"can replace {remove.value}")


@dataclass(frozen=True)
class ProbeSample:
    id: str
    question: str


@dataclass
class GroupedSamples:
    groups: dict[HeuristicCategory, list[ProbeSample]]
    diagnostics: dict[str, str] = field(default_factory=dict)

    def counts(self) -> dict[str, int]:
        return {c.value: len(v) for c, v in self.groups.items()}

    def category_of(self) -> dict[str, HeuristicCategory]:
        return {s.id: c for c, samples in self.groups.items() for s in samples}


def labeling_prompt(sample: ProbeSample, taxonomy: Sequence[HeuristicCategory]) -> str:
    lines = "\n".join(f"{c.value}: {CATEGORY_NAMES[c]}" for c in taxonomy)
    return render_template(load_template("probe", "label"), {"taxonomy": lines, "sample": sample.question})


def parse_category(text: str, taxonomy: Sequence[HeuristicCategory],
                   aliases: Mapping[str, HeuristicCategory]) -> Optional[HeuristicCategory]:
    """First taxonomy code or alias in the answer; ``None`` if nothing fits."""
    allowed = set(taxonomy) | {HeuristicCategory.OTHER}
    tokens = re.findall(r"[A-Za-z][\w-]*", text)
    for token in tokens:
        for c in allowed:
            if token.casefold() == c.value.casefold():
                return c
    # two-word aliases ("knowledge based") win over their first word
    for i, token in enumerate(tokens):
        for candidate in (" ".join(tokens[i:i + 2]), token):
            c = aliases.get(normalize_label(candidate))
            if c in allowed:
                return c
    return None


def label_samples_by_heuristic(samples: Sequence[ProbeSample], taxonomy: Sequence[HeuristicCategory],
                               backend: LLMClient, aliases=None) -> GroupedSamples:
    """Ask the model which heuristic fits each sample; unparseable answers go to Other."""
    aliases = load_aliases() if aliases is None else aliases
    taxonomy = [HeuristicCategory(c) for c in taxonomy]
    groups = {c: [] for c in taxonomy}
    groups.setdefault(HeuristicCategory.OTHER, [])
    diagnostics = {}
    for sample in samples:
        text = backend.ask(labeling_prompt(sample, taxonomy)).text
        category = parse_category(text, taxonomy, aliases)
        if category is None:
            diagnostics[sample.id] = f"unparseable category answer: {text[:80]!r}"
            category = HeuristicCategory.OTHER
        groups[category].append(sample)
    return GroupedSamples(groups, diagnostics)


def grouped_accuracy(results: Iterable[tuple[str, bool]],
                     groups: Mapping[HeuristicCategory, Iterable]) -> dict[HeuristicCategory, float]:
    """Accuracy per category; categories with no results are left out.

    ``results`` holds ``(sample_id, correct)``; group members may be sample
    ids or objects with an ``id``.
    """
    owner = {}
    for category, members in groups.items():
        for m in members:
            sid = getattr(m, "id", m)
            if sid in owner:
                raise ProbeError(f"sample {sid!r} is in more than one group")
            owner[sid] = HeuristicCategory(category)
    totals: dict[HeuristicCategory, list[int]] = {}
    for sid, correct in results:
        if sid not in owner:
            raise ProbeError(f"sample {sid!r} has no group")
        t = totals.setdefault(owner[sid], [0, 0])
        t[0] += bool(correct)
        t[1] += 1
    order = list(HeuristicCategory)
    return {c: t[0] / t[1] for c, t in sorted(totals.items(), key=lambda kv: order.index(kv[0]))}


def read_groups(path) -> dict[HeuristicCategory, list[str]]:
    """Line-delimited ``{sample_id, category}`` records."""
    groups: dict[HeuristicCategory, list[str]] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                rec = json.loads(line)
                groups.setdefault(HeuristicCategory(rec["category"]), []).append(rec["sample_id"])
    return groups


def write_groups(path, grouped: GroupedSamples) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for category, samples in grouped.groups.items():
            for s in samples:
                fh.write(json.dumps({"sample_id": s.id, "category": category.value}) + "\n")
