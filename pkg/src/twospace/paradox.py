"""Small conditional-probability puzzles solved by exact enumeration."""

from __future__ import annotations

import csv
import enum
import itertools
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Optional

from .prob import FiniteDist, ProbabilityError, condition

WEEKDAYS = ("Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday", "Sunday")


# -- Monty Hall ---------------------------------------------------------------


def monty_hall_dist(doors: int) -> FiniteDist:
    """Joint over ``(prize, pick, opened, final_switch)`` for ``doors`` doors.

    The host opens one door uniformly among those that are neither picked
    nor hiding the prize; a switcher then moves uniformly to one of the
    other closed doors.
    """
    if doors < 3:
        raise ValueError("Monty Hall needs at least 3 doors")
    atoms = []
    share = Fraction(1, doors * doors)
    for prize, pick in itertools.product(range(doors), repeat=2):
        legal = [d for d in range(doors) if d not in (prize, pick)]
        for opened in legal:
            closed = [d for d in range(doors) if d not in (pick, opened)]
            for final in closed:
                w = share / len(legal) / len(closed)
                atoms.append(((str(prize), str(pick), str(opened), str(final)), w))
    return FiniteDist(atoms)


def monty_hall(doors: int, strategy: str) -> Fraction:
    if strategy not in ("stay", "switch"):
        raise ValueError(f"unknown strategy {strategy!r}")
    d = monty_hall_dist(doors)
    chosen = 1 if strategy == "stay" else 3
    return d.prob(lambda lbl: lbl[0] == lbl[chosen])


# -- two children -------------------------------------------------------------


class TwoChildVariant(str, enum.Enum):
    YOUNGER_BOY = "younger-boy"
    YOUNGER_BOY_DAY = "younger-boy-and-boy-born-on-day"
    AT_LEAST_ONE_BOY = "at-least-one-boy"
    AT_LEAST_ONE_BOY_DAY = "at-least-one-boy-born-on-day"

    @property
    def uses_day(self) -> bool:
        return self in (TwoChildVariant.YOUNGER_BOY_DAY, TwoChildVariant.AT_LEAST_ONE_BOY_DAY)


# Short names accepted on the command line.
VARIANT_ALIASES = {
    "younger-boy-tuesday": (TwoChildVariant.YOUNGER_BOY_DAY, "Tuesday"),
    "at-least-one-boy-tuesday": (TwoChildVariant.AT_LEAST_ONE_BOY_DAY, "Tuesday"),
}


@dataclass(frozen=True)
class TwoChildCondition:
    variant: TwoChildVariant
    day: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "variant", TwoChildVariant(self.variant))
        if self.variant.uses_day:
            if self.day not in WEEKDAYS:
                raise ValueError(f"variant {self.variant.value} needs a weekday, got {self.day!r}")
        elif self.day is not None:
            raise ValueError(f"variant {self.variant.value} takes no weekday")


def family_space() -> FiniteDist:
    """Uniform over ``(younger_sex, younger_day, older_sex, older_day)``: 196 atoms."""
    child = list(itertools.product("BG", WEEKDAYS))
    return FiniteDist.uniform(y + o for y in child for o in child)


def _boy_on(sex: str, day: str, wanted: str) -> bool:
    return sex == "B" and day == wanted


def two_child(cond: TwoChildCondition) -> Fraction:
    """Probability that the other child is a boy, given ``cond``.

    For the younger-boy variants "other" is the older child.  For the
    at-least-one variants it is the usual reading: both children are boys.
    """
    v, day = cond.variant, cond.day
    if v is TwoChildVariant.YOUNGER_BOY:
        event = lambda f: f[0] == "B"  # noqa: E731
    elif v is TwoChildVariant.YOUNGER_BOY_DAY:
        event = lambda f: f[0] == "B" and (_boy_on(*f[:2], day) or _boy_on(*f[2:], day))  # noqa: E731
    elif v is TwoChildVariant.AT_LEAST_ONE_BOY:
        event = lambda f: "B" in (f[0], f[2])  # noqa: E731
    else:
        event = lambda f: _boy_on(*f[:2], day) or _boy_on(*f[2:], day)  # noqa: E731
    try:
        given = condition(family_space(), event)
    except ProbabilityError:
        raise ValueError("condition has zero probability") from None
    if v in (TwoChildVariant.YOUNGER_BOY, TwoChildVariant.YOUNGER_BOY_DAY):
        return given.prob(lambda f: f[2] == "B")
    return given.prob(lambda f: f[0] == "B" and f[2] == "B")


# -- Simpson's paradox --------------------------------------------------------


@dataclass(frozen=True)
class Stratum:
    name: str
    success_a: int
    total_a: int
    success_b: int
    total_b: int

    def __post_init__(self):
        for s, t in ((self.success_a, self.total_a), (self.success_b, self.total_b)):
            if t <= 0 or not 0 <= s <= t:
                raise ValueError(f"stratum {self.name}: need 0 <= success <= total, total > 0")


@dataclass(frozen=True)
class SimpsonReport:
    per_stratum: dict[str, str]  # stratum -> "A" | "B" | "tie"
    aggregate: str
    reversal: bool
    rates: dict[str, tuple[Fraction, Fraction]]


def _direction(a: Fraction, b: Fraction) -> str:
    return "A" if a > b else "B" if b > a else "tie"


def simpson_check(strata: list[Stratum]) -> SimpsonReport:
    if not strata:
        raise ValueError("empty table")
    per, rates = {}, {}
    for st in strata:
        ra, rb = Fraction(st.success_a, st.total_a), Fraction(st.success_b, st.total_b)
        rates[st.name] = (ra, rb)
        per[st.name] = _direction(ra, rb)
    agg_a = Fraction(sum(s.success_a for s in strata), sum(s.total_a for s in strata))
    agg_b = Fraction(sum(s.success_b for s in strata), sum(s.total_b for s in strata))
    rates["aggregate"] = (agg_a, agg_b)
    aggregate = _direction(agg_a, agg_b)
    dirs = set(per.values())
    reversal = (
        len(strata) > 1
        and len(dirs) == 1
        and "tie" not in dirs
        and aggregate not in dirs
        and aggregate != "tie"
    )
    return SimpsonReport(per, aggregate, reversal, rates)


TABLE_HEADER = ["stratum", "successA", "totalA", "successB", "totalB"]


def read_table(path: str | Path) -> list[Stratum]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != TABLE_HEADER:
            raise ValueError(f"expected header {','.join(TABLE_HEADER)}")
        return [
            Stratum(
                row["stratum"],
                int(row["successA"]),
                int(row["totalA"]),
                int(row["successB"]),
                int(row["totalB"]),
            )
            for row in reader
        ]
