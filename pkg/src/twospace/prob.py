"""Exact finite probability distributions over tuple-labelled outcomes.

Weights are :class:`fractions.Fraction` throughout; nothing in this module
touches floating point.  A distribution is immutable and keeps its outcomes
in lexicographic label order so that two equal distributions compare and
print identically.
"""

from __future__ import annotations

from collections.abc import Callable, Iterable, Iterator, Mapping
from fractions import Fraction
from typing import Union

Rational = Fraction
Label = tuple
# An event is either an explicit set of labels or a predicate on labels.
Event = Union[Callable[[Label], bool], Iterable[Label]]


class ProbabilityError(ValueError):
    """Raised for degenerate probabilistic input (null events, zero mass...)."""


def rat_normalize(n: int, d: int) -> Fraction:
    if d == 0:
        raise ProbabilityError("zero denominator")
    return Fraction(n, d)


def parse_rational(text: str | int | Fraction) -> Fraction:
    """Parse ``"p/q"`` or an integer string into a Fraction."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int) and not isinstance(text, bool):
        return Fraction(text)
    if not isinstance(text, str):
        raise ProbabilityError(f"not a rational: {text!r}")
    s = text.strip()
    num, sep, den = s.partition("/")
    try:
        n = int(num)
        d = int(den) if sep else 1
    except ValueError:
        raise ProbabilityError(f"not a rational: {text!r}") from None
    return rat_normalize(n, d)


def format_rational(r: Fraction) -> str:
    return f"{r.numerator}/{r.denominator}"


def _as_label(x) -> Label:
    return x if isinstance(x, tuple) else (x,)


class FiniteDist:
    """A normalized distribution over finitely many tuple labels.

    Zero-weight outcomes are dropped at construction, so the support is
    exactly the label set.
    """

    __slots__ = ("_items", "_index")

    def __init__(self, items: Iterable[tuple[Label, Fraction]]):
        pairs = sorted((_as_label(lbl), Fraction(w)) for lbl, w in items)
        for (a, _), (b, _) in zip(pairs, pairs[1:]):
            if a == b:
                raise ProbabilityError(f"duplicate label {a!r}")
        if any(w < 0 for _, w in pairs):
            raise ProbabilityError("negative weight")
        total = sum((w for _, w in pairs), Fraction(0))
        if total != 1:
            raise ProbabilityError(f"weights sum to {total}, not 1")
        self._items = tuple((lbl, w) for lbl, w in pairs if w != 0)
        self._index = dict(self._items)

    # -- construction -------------------------------------------------
    @classmethod
    def from_weights(cls, pairs: Iterable[tuple[Label, Fraction | int]]) -> FiniteDist:
        pairs = [(_as_label(lbl), Fraction(w)) for lbl, w in pairs]
        seen = set()
        for lbl, w in pairs:
            if lbl in seen:
                raise ProbabilityError(f"duplicate label {lbl!r}")
            seen.add(lbl)
            if w < 0:
                raise ProbabilityError(f"negative weight for {lbl!r}")
        total = sum((w for _, w in pairs), Fraction(0))
        if total == 0:
            raise ProbabilityError("zero total mass")
        return cls((lbl, w / total) for lbl, w in pairs)

    @classmethod
    def from_mapping(cls, weights: Mapping) -> FiniteDist:
        return cls.from_weights(weights.items())

    @classmethod
    def uniform(cls, labels: Iterable) -> FiniteDist:
        return cls.from_weights((lbl, 1) for lbl in labels)

    @classmethod
    def point(cls, label) -> FiniteDist:
        return cls([(label, Fraction(1))])

    # -- access ---------------------------------------------------------
    def __iter__(self) -> Iterator[tuple[Label, Fraction]]:
        return iter(self._items)

    def __len__(self) -> int:
        return len(self._items)

    def __getitem__(self, label) -> Fraction:
        return self._index.get(_as_label(label), Fraction(0))

    def __eq__(self, other) -> bool:
        if not isinstance(other, FiniteDist):
            return NotImplemented
        return self._items == other._items

    def __hash__(self) -> int:
        return hash(self._items)

    def __repr__(self) -> str:
        body = ", ".join(f"{lbl!r}: {format_rational(w)}" for lbl, w in self._items)
        return f"FiniteDist({{{body}}})"

    @property
    def labels(self) -> tuple[Label, ...]:
        return tuple(lbl for lbl, _ in self._items)

    def total(self) -> Fraction:
        return sum((w for _, w in self._items), Fraction(0))

    def prob(self, event: Event) -> Fraction:
        keep = _event_filter(event)
        return sum((w for lbl, w in self._items if keep(lbl)), Fraction(0))

    def expect(self, f: Callable[[Label], Fraction]) -> Fraction:
        return sum((w * Fraction(f(lbl)) for lbl, w in self._items), Fraction(0))

    def marginal(self, *coords: int) -> FiniteDist:
        return pushforward(self, lambda lbl: tuple(lbl[i] for i in coords))


def _event_filter(event: Event) -> Callable[[Label], bool]:
    if callable(event):
        return event
    members = {_as_label(e) for e in event}
    return members.__contains__


def dist_from_weights(pairs: Iterable[tuple[Label, Fraction | int]]) -> FiniteDist:
    return FiniteDist.from_weights(pairs)


def condition(d: FiniteDist, event: Event) -> FiniteDist:
    keep = _event_filter(event)
    kept = [(lbl, w) for lbl, w in d if keep(lbl)]
    mass = sum((w for _, w in kept), Fraction(0))
    if mass == 0:
        raise ProbabilityError("conditioning on null event")
    return FiniteDist((lbl, w / mass) for lbl, w in kept)


def product(d1: FiniteDist, d2: FiniteDist) -> FiniteDist:
    """Independent joint; labels are concatenated tuples."""
    return FiniteDist((a + b, wa * wb) for a, wa in d1 for b, wb in d2)


def pushforward(d: FiniteDist, f: Callable[[Label], object]) -> FiniteDist:
    acc: dict[Label, Fraction] = {}
    for lbl, w in d:
        try:
            img = _as_label(f(lbl))
        except (KeyError, IndexError, TypeError) as exc:
            raise ProbabilityError(f"map undefined on {lbl!r}") from exc
        acc[img] = acc.get(img, Fraction(0)) + w
    return FiniteDist(acc.items())


def bind(d: FiniteDist, kernel: Callable[[Label], FiniteDist]) -> FiniteDist:
    """Compose ``d`` with a Markov kernel; child labels extend the parent's."""
    acc: dict[Label, Fraction] = {}
    for lbl, w in d:
        for sub, v in kernel(lbl):
            key = lbl + sub
            acc[key] = acc.get(key, Fraction(0)) + w * v
    return FiniteDist(acc.items())


def argmax_label(d: FiniteDist) -> tuple[Label, bool]:
    """Return ``(label, tie)``; ties go to the smallest label."""
    if not len(d):
        raise ProbabilityError("empty distribution")
    best = max(w for _, w in d)
    winners = [lbl for lbl, w in d if w == best]
    return winners[0], len(winners) > 1
