"""Simulated-user profiles."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional, Union


@dataclass(frozen=True)
class UserProfile:
    """Persona, demographics, needs, and interaction style of a simulated user.

    `additional_constraints` is the injection channel for out-of-workflow
    behavior: when set, it is rendered as an extra profile section for the
    current turn only.
    """

    persona: str
    details: Mapping[str, str] = field(default_factory=dict)
    needs: str = ""
    dialogue_style: str = ""
    interactive_pattern: str = ""
    additional_constraints: Optional[str] = None

    def render(self) -> str:
        sections = [f"**Persona**:  \n{self.persona}"]
        if self.details:
            detail_lines = "\n".join(f"- {key}: {value}  " for key, value in self.details.items())
            sections.append(f"**User Details**:  \n{detail_lines}")
        if self.needs:
            sections.append(f"**User Needs**:  \n{self.needs}")
        if self.dialogue_style:
            sections.append(f"**Dialogue Style**:  \n{self.dialogue_style}")
        if self.interactive_pattern:
            sections.append(f"**Interactive Pattern**:  \n{self.interactive_pattern}")
        if self.additional_constraints:
            sections.append(f"**Additional Constraints**:  \n{self.additional_constraints}")
        return "\n\n".join(sections)

    def with_constraints(self, constraints: Optional[str]) -> "UserProfile":
        return UserProfile(
            persona=self.persona,
            details=self.details,
            needs=self.needs,
            dialogue_style=self.dialogue_style,
            interactive_pattern=self.interactive_pattern,
            additional_constraints=constraints,
        )

    @classmethod
    def from_mapping(cls, data: Mapping) -> "UserProfile":
        return cls(
            persona=data.get("persona", ""),
            details=dict(data.get("details", {})),
            needs=data.get("needs", ""),
            dialogue_style=data.get("dialogue_style", ""),
            interactive_pattern=data.get("interactive_pattern", ""),
            additional_constraints=data.get("additional_constraints"),
        )

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "UserProfile":
        return cls.from_mapping(json.loads(Path(path).read_text(encoding="utf-8")))


def required_nodes_from_file(path: Union[str, Path]) -> list[str]:
    """The workflow steps this profile's needs entail (fixture sidecar data)."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    return list(data.get("required_nodes", []))
