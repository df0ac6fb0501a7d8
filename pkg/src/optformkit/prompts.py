"""
Assembly of evaluation prompts from the three stored instruction templates
(fine-tuning, zero-shot, one-shot).

The templates live as data files under templates/ so their exact bytes are
auditable and hashable; they are never re-wrapped or re-flowed here. The
zero- and one-shot templates embed the default worked example (the hotel
staffing LP); a custom example can be substituted for ablations.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from importlib import resources

__all__ = ["PromptKind", "ExamplePair", "build_prompt", "default_example", "load_template", "EmptyDescription"]


class EmptyDescription(ValueError):
    """build_prompt called with an empty problem description."""


class PromptKind(Enum):
    FINE_TUNE = "finetune"
    ZERO_SHOT = "zero"
    ONE_SHOT = "one"


@dataclass(frozen=True)
class ExamplePair:
    """A worked example: a problem description and its IR-format response."""

    description: str
    response: str


_TEMPLATE_FILES = {
    PromptKind.FINE_TUNE: "finetune_instruction.txt",
    PromptKind.ZERO_SHOT: "zero_shot_instruction.txt",
    PromptKind.ONE_SHOT: "one_shot_instruction.txt",
}


@lru_cache(maxsize=None)
def _read(name: str) -> str:
    return resources.files(__package__).joinpath("templates", name).read_text(encoding="utf-8")


def load_template(kind: PromptKind) -> str:
    """The stored instruction template for a prompt kind, byte-exact."""
    return _read(_TEMPLATE_FILES[kind])


@lru_cache(maxsize=1)
def default_example() -> ExamplePair:
    """The hotel staffing example embedded in the stored templates."""
    return ExamplePair(description=_read("example_description.txt"), response=_read("example_response.txt"))


def build_prompt(kind: PromptKind, description: str, example: ExamplePair | None = None) -> str:
    """Build a prompt: the kind's instruction template, a single newline,
    then the problem description.

    FINE_TUNE ignores `example`. ZERO_SHOT embeds only the example response
    (format priming); ONE_SHOT embeds the example description and response.
    With no `example`, the default hotel pair already inlined in the stored
    templates is used; a custom example replaces the default blocks.
    """
    if not description:
        raise EmptyDescription("problem description must be nonempty")
    template = load_template(kind)
    if example is not None and kind is not PromptKind.FINE_TUNE:
        default = default_example()
        template = template.replace(default.response, example.response)
        if kind is PromptKind.ONE_SHOT:
            template = template.replace(default.description, example.description)
    return template + "\n" + description
