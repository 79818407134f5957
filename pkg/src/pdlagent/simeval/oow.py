"""Out-of-workflow (OOW) interventions for simulated users.

OOW behavior comes in exactly three kinds: intent switching (changing a
request or its parameters mid-flow), procedure jumping (skipping ahead or
jumping back in the workflow order), and irrelevant answering (dodging the
agent's question with something off-topic).
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence


class OowKind(str, Enum):
    INTENT_SWITCHING = "intent_switching"
    PROCEDURE_JUMPING = "procedure_jumping"
    IRRELEVANT_ANSWERING = "irrelevant_answering"


DEFAULT_INSTRUCTIONS = {
    OowKind.INTENT_SWITCHING: (
        "In this round, you can suddenly change your original request or requirements, "
        "such as modifying a detail you already provided or asking to cancel."
    ),
    OowKind.PROCEDURE_JUMPING: (
        "In this round, you can break the expected order of the procedure, "
        "such as skipping ahead to a later step or jumping back to an earlier one."
    ),
    OowKind.IRRELEVANT_ANSWERING: (
        "In this round, you can ask a question unrelated to the current topic "
        "instead of directly answering the assistant."
    ),
}


@dataclass(frozen=True)
class OowSpec:
    """When and how to fire one kind of OOW intervention.

    Exactly one of `schedule` (1-based user-turn indices) or `probability`
    (per-turn chance, drawn from the injector's seeded generator) selects
    the firing turns.
    """

    kind: OowKind
    schedule: Optional[tuple[int, ...]] = None
    probability: Optional[float] = None
    instruction_text: Optional[str] = None
    subtype: Optional[str] = None

    def __post_init__(self):
        if (self.schedule is None) == (self.probability is None):
            raise ValueError("exactly one of schedule or probability must be set")
        if self.probability is not None and not 0.0 <= self.probability <= 1.0:
            raise ValueError("probability must be within [0, 1]")

    @property
    def instruction(self) -> str:
        return self.instruction_text or DEFAULT_INSTRUCTIONS[self.kind]

    def annotation(self) -> tuple[str, Optional[str]]:
        return (self.kind.value, self.subtype)


def inject_oow(spec: OowSpec, turn_index: int, rng: Optional[random.Random] = None) -> Optional[str]:
    """Instruction text when the spec fires at this user turn, else None."""
    if spec.schedule is not None:
        return spec.instruction if turn_index in spec.schedule else None
    draw = (rng or random).random()
    return spec.instruction if draw < spec.probability else None


class OowInjector:
    """Applies a list of OOW specs turn by turn with a seeded generator.

    Probabilistic draws consume the generator in spec order on every turn,
    so two injectors with the same specs and seed fire identically. Every
    firing is recorded for transcript annotation.
    """

    def __init__(self, specs: Sequence[OowSpec] = (), seed: int = 0):
        self.specs = list(specs)
        self.rng = random.Random(seed)
        self.firings: list[tuple[int, OowSpec]] = []

    def check(self, turn_index: int) -> Optional[OowSpec]:
        fired: Optional[OowSpec] = None
        for spec in self.specs:
            instruction = inject_oow(spec, turn_index, self.rng)
            if instruction is not None and fired is None:
                fired = spec
        if fired is not None:
            self.firings.append((turn_index, fired))
        return fired


def random_kind_spec(probability: float, rng_seed: int = 0) -> list[OowSpec]:
    """One probabilistic spec per kind, sharing the configured firing rate.

    The per-kind probability is scaled so the overall chance that some kind
    fires on a turn is approximately `probability`.
    """
    if probability <= 0.0:
        return []
    per_kind = min(1.0, probability / len(OowKind))
    return [OowSpec(kind=kind, probability=per_kind) for kind in OowKind]
