"""Three-valued certification outcomes with machine-checkable witnesses."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

CERTIFIED = "certified"
OBSTRUCTION = "obstruction-certified"
INCONCLUSIVE = "inconclusive"

_STATUSES = (CERTIFIED, OBSTRUCTION, INCONCLUSIVE)


@dataclass(frozen=True)
class Verdict:
    """Outcome of one certification step.

    A definite outcome (certified either way) always carries at least one
    witness that a verifier can recheck; inconclusive outcomes explain what
    is missing in ``diagnostics``.
    """

    status: str
    witnesses: tuple = ()
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.status not in _STATUSES:
            raise ValueError(f"unknown verdict status {self.status!r}")
        if self.status in (CERTIFIED, OBSTRUCTION) and not self.witnesses:
            raise ValueError(f"{self.status} verdict requires at least one witness")

    @property
    def is_certified(self) -> bool:
        return self.status == CERTIFIED

    @property
    def is_obstruction(self) -> bool:
        return self.status == OBSTRUCTION

    @property
    def is_inconclusive(self) -> bool:
        return self.status == INCONCLUSIVE

    def to_json(self) -> dict[str, Any]:
        return {
            "status": self.status,
            "witnesses": [_jsonable(w) for w in self.witnesses],
            "diagnostics": {k: _jsonable(v) for k, v in self.diagnostics.items()},
        }


def certified(*witnesses, **diagnostics) -> Verdict:
    return Verdict(CERTIFIED, tuple(witnesses), diagnostics)


def obstruction(*witnesses, **diagnostics) -> Verdict:
    return Verdict(OBSTRUCTION, tuple(witnesses), diagnostics)


def inconclusive(**diagnostics) -> Verdict:
    return Verdict(INCONCLUSIVE, (), diagnostics)


def _jsonable(v):
    if isinstance(v, (str, int, float, bool)) or v is None:
        return v
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, set, frozenset)):
        return [_jsonable(x) for x in v]
    if hasattr(v, "to_json"):
        return v.to_json()
    return repr(v)
