"""Parsing model completions into role predictions and labels."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .core import MAX_ANSWERS, NOT_SPECIFIED, RolePredictions, TaskKind

# straight and curly double quotes
_OPEN = "\"“”"
_CLOSE = "\"“”"
_QUOTED = re.compile(f"[{_OPEN}]([^{_CLOSE}]*)[{_CLOSE}]")
_SEP = re.compile(r"\s*,\s*")
_TRAILER = re.compile(r"[\s.;]*$")


class LabelParseError(ValueError):
    pass


@dataclass
class ParseDiagnostics:
    matched_roles: set = field(default_factory=set)
    missing_roles: set = field(default_factory=set)
    stray_lines: int = 0
    used_fallback: bool = False

    def to_dict(self) -> dict:
        return {
            "matched_roles": sorted(self.matched_roles),
            "missing_roles": sorted(self.missing_roles),
            "stray_lines": self.stray_lines,
            "used_fallback": self.used_fallback,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ParseDiagnostics":
        return cls(set(d.get("matched_roles", ())), set(d.get("missing_roles", ())),
                   int(d.get("stray_lines", 0)), bool(d.get("used_fallback", False)))


def _role_line(role: str) -> re.Pattern:
    return re.compile(r"^\s*\[?\s*" + re.escape(role) + r"\s*\]?\s*:(.*)$", re.IGNORECASE)


def _strict_spans(rest: str) -> Optional[list[str]]:
    """Spans when ``rest`` is nothing but comma-separated quoted strings."""
    rest = _TRAILER.sub("", rest.strip())
    if rest.casefold() == NOT_SPECIFIED:
        return []
    spans, pos = [], 0
    while True:
        m = _QUOTED.match(rest, pos)
        if m is None:
            return None
        spans.append(m.group(1))
        pos = m.end()
        if pos == len(rest):
            return spans
        sep = _SEP.match(rest, pos)
        if sep is None or sep.end() == pos:
            return None
        pos = sep.end()


def _loose_spans(rest: str) -> list[str]:
    return _QUOTED.findall(rest)


def _clean(spans: Sequence[str], max_answers: int) -> list[str]:
    spans = [s.strip() for s in spans]
    if any(s.casefold() == NOT_SPECIFIED for s in spans):
        return []
    return [s for s in spans if s][:max_answers]


def parse_eae_output(text: str, roles: Sequence[str], max_answers: int = 1) -> tuple[RolePredictions, ParseDiagnostics]:
    """Read the final ``[role]: "span", ...`` line for every role.

    A line counts as an answer line when everything after the colon is
    quoted spans; elaboration lines like ``[giver]: the giver is ...`` are
    ignored. If a role has no such line, the last line for that role with
    any quoted text is used instead and ``used_fallback`` is set.
    """
    if not roles:
        raise ValueError("roles must be non-empty")
    if not 1 <= max_answers <= MAX_ANSWERS:
        raise ValueError(f"max_answers must be in [1, {MAX_ANSWERS}]")
    lines = text.splitlines()
    per_role, diag = {}, ParseDiagnostics()
    consumed = set()
    for role in roles:
        pattern = _role_line(role)
        strict = loose = None
        for i, line in enumerate(lines):
            m = pattern.match(line)
            if not m:
                continue
            spans = _strict_spans(m.group(1))
            if spans is not None:
                strict = (i, spans)
            elif _loose_spans(m.group(1)):
                loose = (i, _loose_spans(m.group(1)))
        chosen = strict or loose
        if chosen is None:
            per_role[role] = []
            diag.missing_roles.add(role)
            continue
        if strict is None:
            diag.used_fallback = True
        consumed.add(chosen[0])
        per_role[role] = _clean(chosen[1], max_answers)
        diag.matched_roles.add(role)
    diag.stray_lines = sum(1 for i, line in enumerate(lines) if line.strip() and i not in consumed)
    if not diag.matched_roles:
        diag.used_fallback = True
    return RolePredictions(per_role, text), diag


def _cue(task: TaskKind) -> re.Pattern:
    if task is TaskKind.SENTIMENT:
        return re.compile(r"sentiment\s*:\s*", re.IGNORECASE)
    if task is TaskKind.NLI:
        return re.compile(r"the answer is\s*:?\s*", re.IGNORECASE)
    raise ValueError(f"{task} has no label cue")


def parse_label_output(text: str, task: TaskKind) -> str:
    """Last label following the task's answer cue, in canonical casing."""
    task = TaskKind.parse(task)
    cue = _cue(task)
    # longest label first so "no" never shadows a longer label
    labels = sorted(task.labels, key=len, reverse=True)
    found = None
    for m in cue.finditer(text):
        tail = text[m.end():].lstrip("\"'“ ").casefold()
        for label in labels:
            if tail.startswith(label) and not tail[len(label):len(label) + 1].isalnum():
                found = label
                break
    if found is None:
        raise LabelParseError(f"no {task.value} label after the answer cue")
    return found
