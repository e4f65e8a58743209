"""Demonstration exemplars and their link-of-analogy rendering.

An EAE exemplar walks through every demonstrated role in three steps:
pick heuristics from the list, apply each one (adapted to the role), then
re-evaluate the candidates and commit to an answer line.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Mapping, Optional, Sequence

from ..core import NOT_SPECIFIED, Heuristic


def render_answer_line(role: str, spans: Sequence[str]) -> str:
    if not spans:
        return f'[{role}]: "{NOT_SPECIFIED}"'
    return f"[{role}]: " + ", ".join(f'"{s}"' for s in spans)


def render_answer_block(per_role: Mapping[str, Sequence[str]], roles: Optional[Sequence[str]] = None) -> str:
    roles = list(per_role) if roles is None else roles
    return "\n".join(render_answer_line(role, per_role.get(role, ())) for role in roles)


def heuristic_name(label: str, term: str = "Heuristic") -> str:
    """``"Semantic"`` -> ``"Semantic Heuristic"`` (no double suffix)."""
    if label.lower().endswith(term.lower()):
        return label
    return f"{label} {term}"


def join_names(names: Sequence[str]) -> str:
    if len(names) <= 2:
        return " and ".join(names)
    return ", ".join(names[:-1]) + ", and " + names[-1]


@dataclass(frozen=True)
class Application:
    """Step 2 content: one heuristic adapted to the role, and what it found."""

    heuristic: str
    adapted: str
    finding: str


@dataclass(frozen=True)
class RoleWalkthrough:
    role: str
    selected: tuple[str, ...]
    applications: tuple[Application, ...]
    candidates: tuple[str, ...]
    reevaluation: tuple[str, ...]
    answer: tuple[str, ...] = ()

    def __post_init__(self):
        for name in ("selected", "applications", "candidates", "reevaluation", "answer"):
            object.__setattr__(self, name, tuple(getattr(self, name)))

    def check(self) -> None:
        if not self.selected:
            raise ValueError(f"role [{self.role}]: Step 1 selects no heuristic")
        if not self.applications or any(
            not (a.heuristic.strip() and a.adapted.strip() and a.finding.strip()) for a in self.applications
        ):
            raise ValueError(f"role [{self.role}]: Step 2 content is missing")
        if not self.reevaluation or any(not line.strip() for line in self.reevaluation):
            raise ValueError(f"role [{self.role}]: Step 3 content is missing")


@dataclass(frozen=True)
class AnalogyMapping:
    """``base_role : base_heuristic :: target_role : target_heuristic_text``."""

    base_role: str
    base_heuristic: Heuristic
    target_role: str
    target_heuristic_text: str
    target_argument: Optional[str] = None

    def __post_init__(self):
        if self.base_role == self.target_role:
            raise ValueError("an analogy maps between two different roles")


@dataclass(frozen=True)
class Exemplar:
    """One in-context example.

    ``answer`` holds the final answer text exactly as rendered (an answer
    block for EAE, the cue line for classification). ``reasoning`` is the
    free-form rationale (CoT) or, for classification HD-LoA exemplars, the
    step-by-step pattern reasoning. EAE HD-LoA exemplars carry structured
    ``walkthroughs`` instead.
    """

    question: str
    answer: str
    reasoning: str = ""
    label_coverage: frozenset = field(default_factory=frozenset)
    elaboration: str = ""
    walkthroughs: tuple[RoleWalkthrough, ...] = ()

    def __post_init__(self):
        if not self.answer.strip():
            raise ValueError("exemplar answer must be non-empty")
        object.__setattr__(self, "label_coverage", frozenset(self.label_coverage))
        object.__setattr__(self, "walkthroughs", tuple(self.walkthroughs))

    @classmethod
    def for_eae(cls, question: str, walkthroughs: Sequence[RoleWalkthrough], elaboration: str = "",
                reasoning: str = "") -> "Exemplar":
        answer = render_answer_block({w.role: w.answer for w in walkthroughs}, [w.role for w in walkthroughs])
        return cls(question, answer, reasoning, frozenset(w.role for w in walkthroughs), elaboration,
                   tuple(walkthroughs))

    @property
    def is_loa(self) -> bool:
        return bool(self.walkthroughs)

    def analogy_mappings(self, heuristics: Sequence[Heuristic], base_role: str) -> list[AnalogyMapping]:
        """Analogies demonstrated by this exemplar for roles other than the base role."""
        by_label = {h.label.casefold(): h for h in heuristics}
        out = []
        for w in self.walkthroughs:
            if w.role == base_role:
                continue
            for app in w.applications:
                h = by_label.get(app.heuristic.casefold())
                if h is not None:
                    out.append(AnalogyMapping(base_role, h, w.role, app.adapted, w.answer[0] if w.answer else None))
        return out


@dataclass(frozen=True)
class StepPhrasing:
    header: str
    step1: str
    step2_intro: Optional[str]
    step2_item: str
    step2_single: str
    step3: str


RAMS_PHRASING = StepPhrasing(
    header="Recognizing [{role}] in the given document:",
    step1="Step 1: Select one or two heuristics in the heuristic list that are most suitable to identify "
          "the [{role}] in the given document: {selected}.",
    step2_intro="Step 2: Apply selected heuristics to identify [{role}] independently.",
    step2_item='Step 2.{i}: Identify the [{role}] based on {name}: "{adapted}". {finding}',
    step2_single='Step 2.1: Identify the [{role}] based on {name}: "{adapted}". {finding}',
    step3="Step 3 Reevaluate argument candidates: [{candidates}]",
)

DOCEE_PHRASING = StepPhrasing(
    header="Recognizing [{role}] in the given document:",
    step1="Step 1 Select a heuristic in the heuristic list that is most suitable to identify "
          "the [{role}] in the given document: {selected}.",
    step2_intro=None,
    step2_item="Step 2.{i} Identify the argument based on {name}: {adapted}. {finding}",
    step2_single="Step 2 Identify the argument based on {name}: {adapted}. {finding}",
    step3="Step 3: reevaluate_argument_candidates:",
)

# Used by the "no heuristics" ablation: no list exists, so Step 1 asks the
# model to formulate the heuristics itself.
RAMS_PHRASING_NO_LIST = replace(
    RAMS_PHRASING,
    step1="Step 1: Formulate one or two heuristics that are most suitable to identify "
          "the [{role}] in the given document: {selected}.",
)
DOCEE_PHRASING_NO_LIST = replace(
    DOCEE_PHRASING,
    step1="Step 1 Formulate a heuristic that is most suitable to identify "
          "the [{role}] in the given document: {selected}.",
)


def _render_walkthrough(w: RoleWalkthrough, phrasing: StepPhrasing, term: str) -> str:
    w.check()
    names = [heuristic_name(label, term) for label in w.selected]
    lines = [
        phrasing.header.format(role=w.role),
        phrasing.step1.format(role=w.role, selected=join_names(names)),
    ]
    if phrasing.step2_intro:
        lines.append(phrasing.step2_intro.format(role=w.role))
    for i, app in enumerate(w.applications, start=1):
        template = phrasing.step2_single if len(w.applications) == 1 else phrasing.step2_item
        lines.append(template.format(
            i=i, role=w.role, name=heuristic_name(app.heuristic, term),
            adapted=app.adapted.rstrip("."), finding=app.finding,
        ))
    candidates = ", ".join(f'"{c}"' for c in (w.candidates or (NOT_SPECIFIED,)))
    lines.append(phrasing.step3.format(role=w.role, candidates=candidates))
    lines.extend(w.reevaluation)
    lines.append(render_answer_line(w.role, w.answer))
    return "\n".join(lines)


def render_loa_exemplar(
    ex: Exemplar,
    mapping_demo: Optional[AnalogyMapping] = None,
    phrasing: StepPhrasing = RAMS_PHRASING,
    term: str = "Heuristic",
) -> str:
    """Render the answer part of an EAE exemplar as retrieve/map/evaluate steps.

    ``mapping_demo``, when given, replaces the adapted heuristic text of the
    matching Step 2 entry (same target role and base heuristic label), so a
    specific analogy can be demonstrated without rebuilding the exemplar.
    """
    if not ex.walkthroughs:
        raise ValueError("exemplar has no role walkthroughs to render")
    walkthroughs = list(ex.walkthroughs)
    if mapping_demo is not None:
        walkthroughs = _apply_mapping(walkthroughs, mapping_demo)
    parts = []
    if ex.elaboration:
        parts.append(ex.elaboration)
    parts.extend(_render_walkthrough(w, phrasing, term) for w in walkthroughs)
    return "\n\n".join(parts)


def _apply_mapping(walkthroughs: list[RoleWalkthrough], mapping: AnalogyMapping) -> list[RoleWalkthrough]:
    label = mapping.base_heuristic.label.casefold()
    for wi, w in enumerate(walkthroughs):
        if w.role != mapping.target_role:
            continue
        for ai, app in enumerate(w.applications):
            if app.heuristic.casefold() == label:
                apps = list(w.applications)
                apps[ai] = replace(app, adapted=mapping.target_heuristic_text)
                walkthroughs[wi] = replace(w, applications=tuple(apps))
                return walkthroughs
    raise ValueError(
        f"no Step 2 entry for role [{mapping.target_role}] uses heuristic {mapping.base_heuristic.label!r}"
    )
