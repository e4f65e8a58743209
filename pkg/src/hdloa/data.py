"""Dataset loading and subsampling.

Datasets are stored as JSON Lines, one record per line.

EAE record::

    {"id": "...", "document": "...", "event_type": "...",
     "trigger": {"text": "...", "char_start": 0, "char_end": 5},   # optional
     "roles": ["giver", "recipient"],
     "gold": {"giver": ["..."]},
     "domain_tag": "normal"}                                       # optional

Classification record: ``{"id", "text", "gold_label"}`` for SST-2 and
``{"id", "premise", "hypothesis", "gold_label"}`` for SNLI.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from numbers import Real
from pathlib import Path
from typing import Optional, Sequence, TypeVar

from .core import ClassificationInstance, EAEInstance, TaskKind, Trigger, validate_instance

T = TypeVar("T")

SPLITS = ("train", "validation", "test")


class DataError(ValueError):
    """A dataset file does not match the canonical record schema."""

    def __init__(self, message: str, line: Optional[int] = None, field: Optional[str] = None):
        self.line = line
        self.field = field
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)


@dataclass(frozen=True)
class DatasetManifest:
    task: TaskKind
    path: Path
    split: str = "test"
    expected_count: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "task", TaskKind.parse(self.task))
        object.__setattr__(self, "path", Path(self.path))
        if self.split not in SPLITS:
            raise ValueError(f"split must be one of {SPLITS}, got {self.split!r}")

    def to_dict(self) -> dict:
        return {
            "task": self.task.value,
            "path": str(self.path),
            "split": self.split,
            "expected_count": self.expected_count,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DatasetManifest":
        return cls(d["task"], d["path"], d.get("split", "test"), d.get("expected_count"))


def _read_records(path: Path):
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"invalid JSON ({exc.msg})", lineno) from None
            if not isinstance(record, dict):
                raise DataError("record is not an object", lineno)
            yield lineno, record


def _require(record: dict, key: str, lineno: int, kind=str):
    if key not in record:
        raise DataError(f"missing field {key!r}", lineno, key)
    value = record[key]
    if not isinstance(value, kind):
        raise DataError(f"field {key!r} has wrong type {type(value).__name__}", lineno, key)
    return value


def eae_from_record(record: dict, lineno: int = 0) -> EAEInstance:
    trigger = None
    if record.get("trigger") is not None:
        t = _require(record, "trigger", lineno, dict)
        try:
            trigger = Trigger(str(t["text"]), int(t["char_start"]), int(t["char_end"]))
        except (KeyError, TypeError, ValueError):
            raise DataError("trigger needs text, char_start, char_end", lineno, "trigger") from None
    gold = _require(record, "gold", lineno, dict) if "gold" in record else {}
    for role, spans in gold.items():
        if not isinstance(spans, list) or not all(isinstance(s, str) for s in spans):
            raise DataError(f"gold[{role!r}] must be a list of strings", lineno, "gold")
    roles = _require(record, "roles", lineno, list)
    return EAEInstance(
        id=str(_require(record, "id", lineno, (str, int))),
        document=_require(record, "document", lineno),
        event_type=_require(record, "event_type", lineno),
        roles=tuple(str(r) for r in roles),
        gold={role: spans for role, spans in gold.items() if spans},
        trigger=trigger,
        domain_tag=str(record.get("domain_tag") or ""),
    )


def eae_to_record(inst: EAEInstance) -> dict:
    record = {
        "id": inst.id,
        "document": inst.document,
        "event_type": inst.event_type,
        "roles": list(inst.roles),
        "gold": {role: list(spans) for role, spans in inst.gold.items()},
    }
    if inst.trigger is not None:
        t = inst.trigger
        record["trigger"] = {"text": t.text, "char_start": t.char_start, "char_end": t.char_end}
    if inst.domain_tag:
        record["domain_tag"] = inst.domain_tag
    return record


def classification_from_record(record: dict, task: TaskKind, lineno: int = 0) -> ClassificationInstance:
    hypothesis = None
    if task is TaskKind.NLI:
        text = _require(record, "premise", lineno) if "text" not in record else _require(record, "text", lineno)
        hypothesis = _require(record, "hypothesis", lineno)
    else:
        text = _require(record, "text", lineno)
    label = _require(record, "gold_label", lineno).strip().lower()
    if label not in task.labels:
        raise DataError(f"label {label!r} not in {task.labels}", lineno, "gold_label")
    return ClassificationInstance(
        id=str(_require(record, "id", lineno, (str, int))),
        text=text,
        gold_label=label,
        hypothesis=hypothesis,
    )


def classification_to_record(inst: ClassificationInstance) -> dict:
    if inst.hypothesis is not None:
        return {"id": inst.id, "premise": inst.text, "hypothesis": inst.hypothesis,
                "gold_label": inst.gold_label}
    return {"id": inst.id, "text": inst.text, "gold_label": inst.gold_label}


def _check_count(manifest: DatasetManifest, n: int):
    if manifest.expected_count is not None and n != manifest.expected_count:
        raise DataError(f"{manifest.path}: expected {manifest.expected_count} records, found {n}")


def load_eae(manifest: DatasetManifest) -> list[EAEInstance]:
    """Load EAE instances in file order, validating every record."""
    if not manifest.task.is_eae:
        raise ValueError(f"{manifest.task} is not an EAE task")
    instances = []
    for lineno, record in _read_records(manifest.path):
        inst = eae_from_record(record, lineno)
        problems = validate_instance(inst)
        if problems:
            raise DataError("; ".join(problems), lineno)
        instances.append(inst)
    _check_count(manifest, len(instances))
    return instances


def load_classification(manifest: DatasetManifest) -> list[ClassificationInstance]:
    if manifest.task.is_eae:
        raise ValueError(f"{manifest.task} is not a classification task")
    instances = [
        classification_from_record(record, manifest.task, lineno)
        for lineno, record in _read_records(manifest.path)
    ]
    _check_count(manifest, len(instances))
    return instances


def load(manifest: DatasetManifest) -> list:
    return load_eae(manifest) if manifest.task.is_eae else load_classification(manifest)


def write_jsonl(path, records) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")


def _as_fraction(value: Real) -> Fraction:
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    # str() keeps the decimal literal the caller wrote (0.07 stays 7/100)
    return Fraction(str(value))


def subset_size(n: int, fraction: Real) -> int:
    return math.ceil(_as_fraction(fraction) * n)


def sample_subset(instances: Sequence[T], fraction: Real, seed: int) -> list[T]:
    """Pick ``ceil(fraction * N)`` items with a seeded permutation.

    The chosen items keep their original relative order.
    """
    if not instances:
        raise ValueError("cannot sample from an empty list")
    frac = _as_fraction(fraction)
    if not 0 < frac <= 1:
        raise ValueError(f"fraction must be in (0, 1], got {fraction}")
    m = subset_size(len(instances), frac)
    chosen = sorted(random.Random(seed).sample(range(len(instances)), m))
    return [instances[i] for i in chosen]
