from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterable

from ..errors import BuildError
from ..ingest.fault_tree import CriticalityPolicy

DEFAULT_RPN_THRESHOLD = 100


class Technique(str, Enum):
    FTA = "FTA"
    FMEA = "FMEA"
    STPA = "STPA"


class Sequence(str, Enum):
    """Order in which the argument is laid out.

    TechniqueFirst groups the causal-reasoning modules per analysis
    technique; ItemFirst orders them by the hazard they address. Both
    produce the same nodes and edges.
    """

    ITEM_FIRST = "ItemFirst"
    TECHNIQUE_FIRST = "TechniqueFirst"


ALL_TECHNIQUES = frozenset(Technique)


@dataclass(frozen=True)
class BuildConfig:
    system_name: str
    sequence: Sequence = Sequence.TECHNIQUE_FIRST
    policy: CriticalityPolicy = field(default_factory=CriticalityPolicy)
    rpn_threshold: int = DEFAULT_RPN_THRESHOLD
    include: frozenset[Technique] = ALL_TECHNIQUES
    # Emit the interpretation (C2) and countermeasure-range (C3) contexts on M.
    m_contexts: bool = True

    def __post_init__(self) -> None:
        if not self.system_name.strip():
            raise BuildError("bad-config", "system name must not be empty")
        if not self.include:
            raise BuildError("bad-config", "include must name at least one technique")
        if not 1 <= self.rpn_threshold <= 1000:
            raise BuildError("bad-config", f"rpn threshold {self.rpn_threshold} outside 1..1000")
        object.__setattr__(self, "include", frozenset(Technique(t) for t in self.include))
        object.__setattr__(self, "sequence", Sequence(self.sequence))

    def to_data(self) -> dict[str, Any]:
        policy: dict[str, Any] = {}
        if self.policy.top_k is not None:
            policy["top_k"] = self.policy.top_k
        else:
            policy["threshold"] = self.policy.threshold
        return {
            "system_name": self.system_name,
            "sequence": self.sequence.value,
            "policy": policy,
            "rpn_threshold": self.rpn_threshold,
            "include": sorted(t.value for t in self.include),
            "m_contexts": self.m_contexts,
        }

    @classmethod
    def from_data(cls, data: dict[str, Any]) -> "BuildConfig":
        policy = data.get("policy", {})
        return cls(
            system_name=data["system_name"],
            sequence=Sequence(data.get("sequence", Sequence.TECHNIQUE_FIRST.value)),
            policy=CriticalityPolicy(threshold=policy.get("threshold"), top_k=policy.get("top_k")),
            rpn_threshold=int(data.get("rpn_threshold", DEFAULT_RPN_THRESHOLD)),
            include=frozenset(Technique(t) for t in data.get("include", [t.value for t in Technique])),
            m_contexts=bool(data.get("m_contexts", True)),
        )


def techniques(names: Iterable[str]) -> frozenset[Technique]:
    try:
        return frozenset(Technique(n.upper()) for n in names)
    except ValueError as exc:
        raise BuildError("bad-config", str(exc)) from None
