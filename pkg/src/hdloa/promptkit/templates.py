"""Slot-based text templates stored as package data."""

from __future__ import annotations

import functools
import hashlib
import re
from pathlib import Path
from typing import Mapping

TEMPLATE_DIR = Path(__file__).parent / "templates"

_SLOT = re.compile(r"\{\{(\w+)\}\}")


class TemplateError(ValueError):
    pass


@functools.lru_cache(maxsize=None)
def load_template(group: str, name: str) -> str:
    path = TEMPLATE_DIR / group / f"{name}.txt"
    if not path.is_file():
        raise TemplateError(f"no template {group}/{name}.txt")
    return path.read_text(encoding="utf-8").rstrip("\n")


def template_slots(template: str) -> set[str]:
    return set(_SLOT.findall(template))


def render_template(template: str, values: Mapping[str, str]) -> str:
    """Fill every ``{{slot}}``; unknown or unfilled slots are errors."""
    missing = template_slots(template) - set(values)
    if missing:
        raise TemplateError(f"unfilled template slots: {sorted(missing)}")
    # single pass, so slot-like text inside values is left alone
    return _SLOT.sub(lambda m: values[m.group(1)], template)


def template_digest(template: str) -> str:
    return hashlib.sha256(template.encode("utf-8")).hexdigest()
