"""Prompt assembly for HD-LoA, chain-of-thought and standard prompting."""

from __future__ import annotations

import enum
from dataclasses import asdict, dataclass
from typing import Iterable, Optional, Sequence, Union

from ..core import ClassificationInstance, EAEInstance, Heuristic, TaskKind
from .exemplars import (
    DOCEE_PHRASING,
    DOCEE_PHRASING_NO_LIST,
    RAMS_PHRASING,
    RAMS_PHRASING_NO_LIST,
    AnalogyMapping,
    Application,
    Exemplar,
    RoleWalkthrough,
    heuristic_name,
    join_names,
    render_loa_exemplar,
)
from .templates import load_template, render_template

Target = Union[EAEInstance, ClassificationInstance, str]


class Style(str, enum.Enum):
    HDLOA = "hdloa"
    COT = "cot"
    STANDARD = "standard"


class Ablation(str, enum.Enum):
    NO_HEURISTICS = "no_heuristics"
    NO_LOA = "no_loa"


NOT_SPECIFIED_INSTRUCTION = 'please respond with "not specified".'


def render_question(task: TaskKind, target: Union[EAEInstance, ClassificationInstance]) -> str:
    """The question block for one instance, without the trailing ``Answer:``."""
    if task is TaskKind.EAE_RAMS:
        trigger = ""
        if target.trigger is not None:
            trigger = (f', with the trigger word being "{target.trigger.text}", '
                       'highlighted between "<t>" and "</t>"')
        return (
            f"Question: Extract the event arguments of {join_names(list(target.roles))} in the "
            f'"{target.event_type}" event in the provided document{trigger}. When pinpointing each event '
            "argument, it's crucial to quote the entity exactly as it appears in the text. If an event "
            "argument is not explicitly mentioned or cannot be directly associated with the event indicated "
            f"by the trigger word, {NOT_SPECIFIED_INSTRUCTION}\n"
            f"Document: {target.marked_document()}"
        )
    if task is TaskKind.EAE_DOCEE:
        roles = ", ".join(f"'{r}'" for r in target.roles)
        return (
            f"Question: Extract the event arguments of {roles} in the '{target.event_type}' event in the "
            "provided news document. When pinpointing each event argument, it's crucial to quote the entity "
            "exactly as it appears in the text. Note that if an event argument is not explicitly mentioned or "
            f"cannot be directly associated with its argument role in question, {NOT_SPECIFIED_INSTRUCTION}\n"
            f"Document: {target.document}"
        )
    if task is TaskKind.SENTIMENT:
        return f'Question: What is the sentiment of the following sentence?\nSentence: "{target.text}"'
    if task is TaskKind.NLI:
        options = "\n".join(f"- {label}" for label in task.labels)
        return (
            f'Premise: "{target.text}"\n'
            f'Based on this premise, can we conclude the hypothesis "{target.hypothesis}" is true?\n'
            f"OPTIONS:\n{options}"
        )
    raise ValueError(f"no question format for {task}")


def render_target(task: Optional[TaskKind], target: Target) -> str:
    if isinstance(target, str):
        return target
    if task is None:
        raise ValueError("a structured target needs a task")
    if task.is_eae and not target.roles:
        raise ValueError(f"target {target.id!r} has no roles to extract")
    return render_question(task, target) + "\nAnswer:"


def answer_cue(task: TaskKind, label: str) -> str:
    """Final answer line of a classification exemplar."""
    if task is TaskKind.SENTIMENT:
        return f"sentiment: {label}"
    if task is TaskKind.NLI:
        return f"Therefore, the answer is: {label}"
    raise ValueError(f"{task} has no label cue")


def _term(task: Optional[TaskKind]) -> str:
    return "Heuristic" if task is None or task.is_eae else "Pattern"


def _exemplar_mode(style: Style, ablation: Optional[Ablation]) -> str:
    if style is Style.COT:
        return "rationale"
    if style is Style.STANDARD or ablation is Ablation.NO_LOA:
        return "direct"
    return "loa"


def _phrasing(task: TaskKind, ablation: Optional[Ablation]):
    no_list = ablation is Ablation.NO_HEURISTICS
    if task is TaskKind.EAE_DOCEE:
        return DOCEE_PHRASING_NO_LIST if no_list else DOCEE_PHRASING
    return RAMS_PHRASING_NO_LIST if no_list else RAMS_PHRASING


def render_exemplar(ex: Exemplar, task: Optional[TaskKind], style: Style,
                    ablation: Optional[Ablation] = None) -> str:
    mode = _exemplar_mode(style, ablation)
    if task is None:
        # generic Q/A demonstrations (probe prompts)
        body = f"{ex.reasoning} {ex.answer}" if ex.reasoning and mode != "direct" else ex.answer
        return f"Q: {ex.question}\nA: {body}"
    head = f"{ex.question}\nAnswer:\n"
    if mode == "direct":
        return head + ex.answer
    if mode == "rationale":
        if not ex.reasoning.strip():
            raise ValueError("chain-of-thought exemplars need a rationale")
        return head + ex.reasoning + "\n" + ex.answer
    if task.is_eae:
        return head + render_loa_exemplar(ex, phrasing=_phrasing(task, ablation), term=_term(task))
    steps = ex.reasoning
    if not ("Step 1" in steps and "Step 2" in steps and steps.index("Step 1") < steps.index("Step 2")):
        raise ValueError("HD-LoA classification exemplars need Step 1 and Step 2 reasoning")
    return head + steps + "\n" + ex.answer


def render_heuristic_block(heuristics: Sequence[Heuristic], task: Optional[TaskKind]) -> str:
    term = _term(task)
    return "\n".join(f"{heuristic_name(h.label, term)}: {h.body}" for h in heuristics)


def _template_name(style: Style, ablation: Optional[Ablation]) -> str:
    if style is Style.HDLOA and ablation is Ablation.NO_HEURISTICS:
        return "hdloa_no_heuristics"
    return style.value


def load_prompt_template(task: Optional[TaskKind], style: Style, ablation: Optional[Ablation] = None) -> str:
    if task is None:
        return load_template("generic", "cot")
    return load_template(task.value, _template_name(style, ablation))


@dataclass(frozen=True)
class PromptBundle:
    """A rendered prompt together with everything it was rendered from.

    ``instruction`` is the template text (slots included); ``rendered`` is a
    pure function of the other fields and is checked on construction.
    """

    style: Style
    task: Optional[TaskKind]
    instruction: str
    heuristic_block: tuple[Heuristic, ...]
    exemplars: tuple[Exemplar, ...]
    target: str
    rendered: str = ""
    base_role: str = "giver"
    ablation: Optional[Ablation] = None

    def __post_init__(self):
        object.__setattr__(self, "style", Style(self.style))
        if self.task is not None:
            object.__setattr__(self, "task", TaskKind.parse(self.task))
        if self.ablation is not None:
            object.__setattr__(self, "ablation", Ablation(self.ablation))
        object.__setattr__(self, "heuristic_block", tuple(self.heuristic_block))
        object.__setattr__(self, "exemplars", tuple(self.exemplars))
        if self.ablation is not None and self.style is not Style.HDLOA:
            raise ValueError("ablations apply to HD-LoA prompts only")
        if self.style is Style.HDLOA:
            if self.ablation is Ablation.NO_HEURISTICS:
                if self.heuristic_block:
                    raise ValueError("the no_heuristics ablation carries no heuristics")
            elif not self.heuristic_block:
                raise ValueError("HD-LoA prompts need at least one heuristic")
            if self.task is not None and len(self.exemplars) != self.task.min_exemplars:
                raise ValueError(
                    f"{self.task.value} HD-LoA prompts use {self.task.min_exemplars} exemplar(s), "
                    f"got {len(self.exemplars)}"
                )
        elif self.heuristic_block:
            raise ValueError(f"{self.style.value} prompts carry no heuristic block")
        if not self.exemplars:
            raise ValueError("a prompt needs at least one exemplar")
        rendered = self.render()
        if not self.rendered:
            object.__setattr__(self, "rendered", rendered)
        elif self.rendered != rendered:
            raise ValueError("rendered text does not match the bundle fields")

    def render(self) -> str:
        values = {
            "heuristics": render_heuristic_block(self.heuristic_block, self.task),
            "exemplars": "\n\n".join(render_exemplar(ex, self.task, self.style, self.ablation)
                                     for ex in self.exemplars),
            "target": self.target,
            "base_role": self.base_role,
        }
        return render_template(self.instruction, values) + "\n"

    def to_dict(self) -> dict:
        d = asdict(self)
        d["style"] = self.style.value
        d["task"] = self.task.value if self.task else None
        d["ablation"] = self.ablation.value if self.ablation else None
        d["heuristic_block"] = [h.to_record() for h in self.heuristic_block]
        d["exemplars"] = [exemplar_to_dict(ex) for ex in self.exemplars]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "PromptBundle":
        heuristics = tuple(Heuristic.from_record(h) for h in d["heuristic_block"])
        exemplars = tuple(exemplar_from_dict(e) for e in d["exemplars"])
        return cls(d["style"], d["task"], d["instruction"], heuristics, exemplars, d["target"],
                   d["rendered"], d.get("base_role", "giver"), d.get("ablation"))


def exemplar_to_dict(ex: Exemplar) -> dict:
    d = asdict(ex)
    d["label_coverage"] = sorted(d["label_coverage"])
    return d


def exemplar_from_dict(d: dict) -> Exemplar:
    walkthroughs = tuple(
        RoleWalkthrough(
            w["role"], tuple(w["selected"]),
            tuple(Application(**a) for a in w["applications"]),
            tuple(w["candidates"]), tuple(w["reevaluation"]), tuple(w["answer"]),
        )
        for w in d.get("walkthroughs", ())
    )
    return Exemplar(d["question"], d["answer"], d.get("reasoning", ""), frozenset(d.get("label_coverage", ())),
                    d.get("elaboration", ""), walkthroughs)


def _as_heuristics(heuristics) -> tuple[Heuristic, ...]:
    return tuple(getattr(heuristics, "ranked", heuristics) or ())


def build_hdloa_prompt(
    task: TaskKind,
    heuristics: Iterable[Heuristic],
    exemplars: Sequence[Exemplar],
    target: Target,
    *,
    base_role: str = "giver",
    ablation: Optional[Ablation] = None,
) -> PromptBundle:
    """Heuristic list + minimal exemplars + target question.

    ``heuristics`` may be a ``RankedHeuristics`` or any sequence of
    ``Heuristic``. With ``ablation=NO_HEURISTICS`` the list is dropped.
    """
    task = TaskKind.parse(task)
    ablation = Ablation(ablation) if ablation is not None else None
    block = () if ablation is Ablation.NO_HEURISTICS else _as_heuristics(heuristics)
    if ablation is not Ablation.NO_HEURISTICS and not block:
        raise ValueError("HD-LoA prompts need at least one heuristic")
    return PromptBundle(
        Style.HDLOA, task, load_prompt_template(task, Style.HDLOA, ablation), block,
        tuple(exemplars), render_target(task, target), base_role=base_role, ablation=ablation,
    )


def build_baseline_prompt(style: Style, task: TaskKind, exemplars: Sequence[Exemplar], target: Target) -> PromptBundle:
    style = Style(style)
    if style is Style.HDLOA:
        raise ValueError("use build_hdloa_prompt for HD-LoA prompts")
    task = TaskKind.parse(task) if task is not None else None
    return PromptBundle(style, task, load_prompt_template(task, style), (), tuple(exemplars),
                        render_target(task, target))


__all__ = [
    "Ablation", "AnalogyMapping", "PromptBundle", "Style", "answer_cue", "build_baseline_prompt",
    "build_hdloa_prompt", "exemplar_from_dict", "exemplar_to_dict", "render_exemplar", "render_question", "render_target",
]
