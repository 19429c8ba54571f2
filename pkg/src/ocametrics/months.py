"""Monthly calendar arithmetic.

All series in this package are monthly; dates are (year, month) pairs with
no day component.  A :class:`Month` converts to and from the ``YYYY-MM``
text form used by every CSV interface.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable

_MONTH_RE = re.compile(r"^(\d{4})-(\d{2})$")


@dataclass(frozen=True, order=True)
class Month:
    """A calendar month, ordered chronologically."""

    year: int
    month: int

    def __post_init__(self):
        if not 1 <= self.month <= 12:
            raise ValueError(f"month out of range: {self.month}")

    @classmethod
    def parse(cls, text: str) -> "Month":
        m = _MONTH_RE.match(text.strip())
        if not m:
            raise ValueError(f"expected YYYY-MM date, got {text!r}")
        return cls(int(m.group(1)), int(m.group(2)))

    @classmethod
    def from_index(cls, idx: int) -> "Month":
        return cls(idx // 12, idx % 12 + 1)

    @property
    def index(self) -> int:
        """Months since year 0, a convenient integer timeline."""
        return self.year * 12 + self.month - 1

    def __add__(self, n: int) -> "Month":
        return Month.from_index(self.index + n)

    def __sub__(self, other):
        if isinstance(other, Month):
            return self.index - other.index
        return Month.from_index(self.index - other)

    def __str__(self) -> str:
        return f"{self.year:04d}-{self.month:02d}"


def month_range(start: Month, n: int) -> tuple[Month, ...]:
    """``n`` consecutive months starting at ``start``."""
    return tuple(Month.from_index(start.index + i) for i in range(n))


def is_contiguous(dates: Iterable[Month]) -> bool:
    idx = [d.index for d in dates]
    return all(b - a == 1 for a, b in zip(idx, idx[1:]))
