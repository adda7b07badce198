"""Machine-readable residual reports produced by every verification sweep."""

from __future__ import annotations

from typing import Iterator, List, Tuple


class Report:
    """A named list of (label, residual) entries; passing means all zero."""

    __slots__ = ("check", "entries")

    def __init__(self, check: str):
        self.check = check
        self.entries: List[Tuple[str, object]] = []

    def add(self, label: str, residual) -> None:
        self.entries.append((label, residual))

    def extend(self, other: "Report") -> None:
        self.entries.extend(
            (f"{other.check}: {label}", res) for label, res in other.entries)

    @property
    def ok(self) -> bool:
        return all(res.is_zero() for _, res in self.entries)

    def failures(self) -> Iterator[Tuple[str, object]]:
        return ((label, res) for label, res in self.entries if not res.is_zero())

    def summary(self) -> str:
        bad = sum(1 for _, res in self.entries if not res.is_zero())
        status = "ok" if bad == 0 else f"FAILED ({bad} nonzero)"
        return f"{self.check}: {len(self.entries)} residuals, {status}"

    def to_records(self) -> List[dict]:
        return [{"check": self.check, "tuple": label, "residual": str(res),
                 "zero": res.is_zero()}
                for label, res in self.entries]

    def __repr__(self):
        return f"Report({self.summary()})"
