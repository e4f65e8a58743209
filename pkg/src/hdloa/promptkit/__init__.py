"""Prompt templates, exemplars and prompt assembly."""

from .builder import (
    Ablation,
    PromptBundle,
    Style,
    answer_cue,
    build_baseline_prompt,
    build_hdloa_prompt,
    load_prompt_template,
    render_exemplar,
    render_heuristic_block,
    render_question,
    render_target,
)
from .defaults import default_exemplars, default_heuristics
from .exemplars import (
    AnalogyMapping,
    Application,
    Exemplar,
    RoleWalkthrough,
    render_answer_block,
    render_answer_line,
    render_loa_exemplar,
)
from .templates import TemplateError, load_template, render_template, template_digest

__all__ = [
    "Ablation", "AnalogyMapping", "Application", "Exemplar", "PromptBundle", "RoleWalkthrough", "Style",
    "TemplateError", "answer_cue", "build_baseline_prompt", "build_hdloa_prompt", "default_exemplars",
    "default_heuristics", "load_prompt_template", "load_template", "render_answer_block",
    "render_answer_line", "render_exemplar", "render_heuristic_block", "render_loa_exemplar",
    "render_question", "render_target", "render_template", "template_digest",
]
