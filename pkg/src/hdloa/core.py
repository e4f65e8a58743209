"""Domain model shared across the package.

All types are frozen dataclasses; collections are stored as tuples or
read-only mappings so values can be shared between threads freely.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping, Optional, Sequence

NOT_SPECIFIED = "not specified"

# Upper bound on answers per role for any task; RAMS defaults to 1.
MAX_ANSWERS = 3


class TaskKind(str, enum.Enum):
    EAE_RAMS = "rams"
    EAE_DOCEE = "docee"
    SENTIMENT = "sst2"
    NLI = "snli"

    @property
    def is_eae(self) -> bool:
        return self in (TaskKind.EAE_RAMS, TaskKind.EAE_DOCEE)

    @property
    def labels(self) -> tuple[str, ...]:
        """Closed label set for classification tasks, empty for EAE."""
        return _LABELS.get(self, ())

    @property
    def default_max_answers(self) -> int:
        return MAX_ANSWERS if self is TaskKind.EAE_DOCEE else 1

    @property
    def min_exemplars(self) -> int:
        return _MIN_EXEMPLARS[self]

    @classmethod
    def parse(cls, value: "str | TaskKind") -> "TaskKind":
        if isinstance(value, TaskKind):
            return value
        key = str(value).strip().lower()
        for kind in cls:
            if key in (kind.value, kind.name.lower()):
                return kind
        raise ValueError(f"unknown task kind: {value!r}")


_LABELS = {
    TaskKind.SENTIMENT: ("positive", "negative"),
    TaskKind.NLI: ("yes", "no", "it is not possible to tell"),
}

_MIN_EXEMPLARS = {
    TaskKind.EAE_RAMS: 1,
    TaskKind.EAE_DOCEE: 1,
    TaskKind.SENTIMENT: 2,
    TaskKind.NLI: 3,
}


def _freeze_gold(gold: Mapping[str, Sequence[str]]) -> Mapping[str, tuple[str, ...]]:
    frozen = {}
    for role, spans in gold.items():
        if isinstance(spans, str):
            spans = (spans,)
        frozen[role] = tuple(dict.fromkeys(spans))
    return MappingProxyType(frozen)


@dataclass(frozen=True)
class Trigger:
    text: str
    char_start: int
    char_end: int


@dataclass(frozen=True)
class EAEInstance:
    """One event mention to extract arguments for.

    ``gold`` maps a role to the set of gold argument strings. Roles without
    a gold argument are absent from the map.
    """

    id: str
    document: str
    event_type: str
    roles: tuple[str, ...]
    gold: Mapping[str, tuple[str, ...]] = field(default_factory=dict)
    trigger: Optional[Trigger] = None
    domain_tag: str = ""

    def __post_init__(self):
        object.__setattr__(self, "roles", tuple(self.roles))
        object.__setattr__(self, "gold", _freeze_gold(self.gold))

    def marked_document(self) -> str:
        """Document with the trigger wrapped in ``<t>``/``</t>``."""
        if self.trigger is None:
            return self.document
        t = self.trigger
        return (
            self.document[: t.char_start]
            + "<t>"
            + self.document[t.char_start : t.char_end]
            + "</t>"
            + self.document[t.char_end :]
        )


@dataclass(frozen=True)
class ClassificationInstance:
    """A sentence (SST-2) or a premise/hypothesis pair (SNLI)."""

    id: str
    text: str
    gold_label: str
    hypothesis: Optional[str] = None


class Provenance(str, enum.Enum):
    GENERATED = "generated"
    MANUAL = "manual"


@dataclass(frozen=True)
class Heuristic:
    label: str
    body: str
    provenance: Provenance = Provenance.GENERATED
    generation_index: int = 0
    eval_accuracy: Optional[float] = None

    def __post_init__(self):
        if not self.label.strip():
            raise ValueError("heuristic label must be non-empty")
        if not self.body.strip():
            raise ValueError(f"heuristic {self.label!r} has an empty body")
        if self.generation_index < 0:
            raise ValueError("generation_index must be >= 0")
        if self.eval_accuracy is not None and not 0.0 <= self.eval_accuracy <= 1.0:
            raise ValueError(f"eval_accuracy out of [0, 1]: {self.eval_accuracy}")
        object.__setattr__(self, "provenance", Provenance(self.provenance))

    def to_record(self) -> dict:
        return {
            "label": self.label,
            "body": self.body,
            "provenance": self.provenance.value,
            "generation_index": self.generation_index,
            "eval_accuracy": self.eval_accuracy,
        }

    @classmethod
    def from_record(cls, record: Mapping) -> "Heuristic":
        return cls(
            label=record["label"],
            body=record["body"],
            provenance=Provenance(record.get("provenance", "generated")),
            generation_index=int(record.get("generation_index", 0)),
            eval_accuracy=record.get("eval_accuracy"),
        )


@dataclass(frozen=True)
class HeuristicSet:
    items: tuple[Heuristic, ...]
    base_role: str

    def __post_init__(self):
        items = tuple(self.items)
        object.__setattr__(self, "items", items)
        labels = [h.label.casefold() for h in items]
        if len(set(labels)) != len(labels):
            dupes = sorted({lab for lab in labels if labels.count(lab) > 1})
            raise ValueError(f"duplicate heuristic labels: {dupes}")
        indices = [h.generation_index for h in items]
        if len(set(indices)) != len(indices):
            raise ValueError("generation_index values must be unique within a set")

    def __len__(self):
        return len(self.items)

    def __iter__(self):
        return iter(self.items)


@dataclass(frozen=True)
class RolePredictions:
    """Predicted spans per role; an empty list means "not specified"."""

    per_role: Mapping[str, tuple[str, ...]]
    raw_output: str = ""

    def __post_init__(self):
        frozen = {}
        for role, spans in self.per_role.items():
            spans = tuple(spans)
            if len(spans) > MAX_ANSWERS:
                raise ValueError(f"role {role!r} has {len(spans)} spans (max {MAX_ANSWERS})")
            for span in spans:
                if span.strip().casefold() == NOT_SPECIFIED:
                    raise ValueError(f"sentinel {NOT_SPECIFIED!r} used as a span for {role!r}")
            frozen[role] = spans
        object.__setattr__(self, "per_role", MappingProxyType(frozen))

    def spans(self, role: str) -> tuple[str, ...]:
        return self.per_role.get(role, ())


def prf(tp: int, n_pred: int, n_gold: int) -> tuple[float, float, float]:
    precision = tp / n_pred if n_pred else 0.0
    recall = tp / n_gold if n_gold else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


@dataclass(frozen=True)
class PRF:
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class EAEScores:
    """Arg-I / Arg-C micro scores. Fractions are derived from the counts."""

    tp_i: int
    fp_i: int
    fn_i: int
    tp_c: int
    fp_c: int
    fn_c: int

    def __post_init__(self):
        counts = (self.tp_i, self.fp_i, self.fn_i, self.tp_c, self.fp_c, self.fn_c)
        if any(c < 0 for c in counts):
            raise ValueError(f"negative count in {counts}")

    @property
    def arg_i(self) -> PRF:
        return PRF(*prf(self.tp_i, self.tp_i + self.fp_i, self.tp_i + self.fn_i))

    @property
    def arg_c(self) -> PRF:
        return PRF(*prf(self.tp_c, self.tp_c + self.fp_c, self.tp_c + self.fn_c))

    @property
    def counts(self) -> dict:
        return {
            "tp_i": self.tp_i, "fp_i": self.fp_i, "fn_i": self.fn_i,
            "tp_c": self.tp_c, "fp_c": self.fp_c, "fn_c": self.fn_c,
        }

    def __add__(self, other: "EAEScores") -> "EAEScores":
        return EAEScores(**{k: v + other.counts[k] for k, v in self.counts.items()})

    def to_dict(self) -> dict:
        return {
            "arg_i": vars(self.arg_i),
            "arg_c": vars(self.arg_c),
            "counts": self.counts,
        }


EMPTY_SCORES = EAEScores(0, 0, 0, 0, 0, 0)


def _normalize_ws(text: str) -> str:
    return " ".join(text.split())


def validate_instance(inst: EAEInstance) -> list[str]:
    """Return one description per violated invariant (empty when valid)."""
    problems = []
    if not inst.id:
        problems.append("id is empty")
    if not inst.roles:
        problems.append("roles list is empty")
    if len(set(inst.roles)) != len(inst.roles):
        problems.append("roles contain duplicates")
    if inst.trigger is not None:
        t = inst.trigger
        if not 0 <= t.char_start < t.char_end <= len(inst.document):
            problems.append(
                f"trigger offsets [{t.char_start}, {t.char_end}) out of range for document "
                f"of length {len(inst.document)}"
            )
        elif _normalize_ws(inst.document[t.char_start : t.char_end]) != _normalize_ws(t.text):
            problems.append(
                f"trigger text {t.text!r} does not match document slice "
                f"{inst.document[t.char_start:t.char_end]!r}"
            )
    for role, spans in inst.gold.items():
        if role not in inst.roles:
            problems.append(f"gold role {role!r} not in roles")
        if not spans:
            problems.append(f"gold role {role!r} has an empty span set")
        for span in spans:
            if not span.strip():
                problems.append(f"gold role {role!r} has a blank span")
            elif span.strip().casefold() == NOT_SPECIFIED:
                problems.append(f"gold role {role!r} uses the {NOT_SPECIFIED!r} sentinel")
    return problems
