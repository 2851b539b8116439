"""Scalar operation counter used by every transform."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass
class OpCounter:
    """Running count of scalar multiplications and additions.

    Subtractions count as additions. Multiplication by an exact +-1 is a
    sign change and is not counted.
    """

    mults: int = 0
    adds: int = 0

    def reset(self) -> None:
        self.mults = 0
        self.adds = 0

    def tally(self, mults: int = 0, adds: int = 0) -> None:
        self.mults += int(mults)
        self.adds += int(adds)

    def as_tuple(self) -> tuple[int, int]:
        return (self.mults, self.adds)

    def __add__(self, other: "OpCounter") -> "OpCounter":
        return OpCounter(self.mults + other.mults, self.adds + other.adds)


def ensure_counter(counter: OpCounter | None) -> OpCounter:
    return OpCounter() if counter is None else counter
