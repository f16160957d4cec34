"""Godel-algebra kernel: exact truth degrees plus sparse fuzzy sets and relations.

Every algorithm in this package only compares, mins and maxes degrees, so
degrees are stored as scaled integers (nine fractional decimal digits).
That keeps comparisons exact and makes every tie deterministic; no floating
point ever enters the algebra.
"""

from __future__ import annotations

import re
from functools import total_ordering
from typing import Dict, Iterable, Iterator, Mapping, Optional, Tuple, Union

import numpy as np

SCALE = 10 ** 9

_DECIMAL_RE = re.compile(r"^(\d+)(?:\.(\d+))?$")

DegreeLike = Union["Degree", int, float, str]


@total_ordering
class Degree:
    """A truth value in [0, 1] with exact fixed-point semantics.

    Accepts another Degree, an int (0 or 1), a decimal string with at most
    nine fractional digits, or a float that is the binary rounding of such a
    decimal.  Two degrees written as equal decimal literals always compare
    equal.
    """

    __slots__ = ("scaled",)

    def __init__(self, value: DegreeLike):
        if isinstance(value, Degree):
            scaled = value.scaled
        elif isinstance(value, int) and not isinstance(value, bool):
            scaled = value * SCALE
        elif isinstance(value, float):
            scaled = round(value * SCALE)
        elif isinstance(value, str):
            scaled = _parse_scaled(value)
        else:
            raise TypeError(f"cannot build a degree from {value!r}")
        if not 0 <= scaled <= SCALE:
            raise ValueError(f"degree out of [0,1]: {value!r}")
        self.scaled = scaled

    @classmethod
    def from_scaled(cls, scaled: int) -> "Degree":
        d = cls.__new__(cls)
        if not 0 <= scaled <= SCALE:
            raise ValueError(f"scaled degree out of range: {scaled}")
        d.scaled = scaled
        return d

    def __eq__(self, other) -> bool:
        return isinstance(other, Degree) and self.scaled == other.scaled

    def __lt__(self, other: "Degree") -> bool:
        return self.scaled < other.scaled

    def __hash__(self) -> int:
        return hash(self.scaled)

    def __str__(self) -> str:
        whole, frac = divmod(self.scaled, SCALE)
        if frac == 0:
            return str(whole)
        return f"{whole}.{frac:09d}".rstrip("0")

    def __repr__(self) -> str:
        return f"Degree('{self}')"

    @property
    def is_zero(self) -> bool:
        return self.scaled == 0

    @property
    def is_one(self) -> bool:
        return self.scaled == SCALE


def _parse_scaled(text: str) -> int:
    m = _DECIMAL_RE.match(text.strip())
    if m is None:
        raise ValueError(f"malformed degree literal: {text!r}")
    whole, frac = m.group(1), m.group(2) or ""
    if len(frac) > 9:
        raise ValueError(f"degree literal has more than 9 fractional digits: {text!r}")
    return int(whole) * SCALE + int(frac.ljust(9, "0") or "0")


ZERO = Degree(0)
ONE = Degree(1)


def tnorm(a: Degree, b: Degree) -> Degree:
    """Godel t-norm: min."""
    return a if a <= b else b


def residuum(a: Degree, b: Degree) -> Degree:
    """Godel residuum: 1 when a <= b, otherwise b."""
    return ONE if a <= b else b


def biresiduum(a: Degree, b: Degree) -> Degree:
    """Godel biresiduum: 1 when a = b, otherwise min(a, b)."""
    if a == b:
        return ONE
    return a if a < b else b


def inf_all(degrees: Iterable[Degree]) -> Degree:
    """Infimum of a finite set of degrees; 1 for the empty set."""
    best = ONE
    for d in degrees:
        if d < best:
            best = d
    return best


class FuzzySet:
    """Sparse fuzzy subset of a finite indexed carrier; only positive entries stored."""

    __slots__ = ("size", "_entries")

    def __init__(self, size: int, entries: Mapping[int, Degree] | Iterable[Tuple[int, Degree]] = ()):
        if size < 0:
            raise ValueError("carrier size must be non-negative")
        self.size = size
        data: Dict[int, Degree] = {}
        pairs = entries.items() if isinstance(entries, Mapping) else entries
        for key, deg in pairs:
            if not 0 <= key < size:
                raise ValueError(f"element index {key} outside carrier of size {size}")
            if not isinstance(deg, Degree):
                deg = Degree(deg)
            if deg.is_zero:
                raise ValueError(f"zero entries must be omitted (element {key})")
            if key in data:
                raise ValueError(f"duplicate entry for element {key}")
            data[key] = deg
        self._entries = data

    def value(self, key: int) -> Degree:
        return self._entries.get(key, ZERO)

    def support(self) -> Tuple[int, ...]:
        return tuple(sorted(self._entries))

    def items(self) -> Iterator[Tuple[int, Degree]]:
        return iter(sorted(self._entries.items()))

    def __len__(self) -> int:
        return len(self._entries)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, FuzzySet)
            and self.size == other.size
            and self._entries == other._entries
        )

    def __hash__(self):
        return hash((self.size, tuple(sorted(self._entries.items(), key=lambda kv: kv[0]))))

    def __repr__(self) -> str:
        body = ", ".join(f"{k}:{v}" for k, v in self.items())
        return f"FuzzySet({self.size}, {{{body}}})"

    def leq(self, other: "FuzzySet") -> bool:
        if self.size != other.size:
            raise ValueError("carrier mismatch")
        return all(d <= other.value(k) for k, d in self._entries.items())


class FuzzyRelation:
    """Sparse fuzzy relation between two finite indexed carriers.

    Keeps forward and inverse adjacency so that successors(x) and
    predecessors(y) are cheap; the inverse index always mirrors the entries
    of the inverse relation.
    """

    __slots__ = ("rows", "cols", "_entries", "_fwd", "_inv")

    def __init__(
        self,
        rows: int,
        cols: int,
        entries: Mapping[Tuple[int, int], Degree] | Iterable[Tuple[Tuple[int, int], Degree]] = (),
    ):
        if rows < 0 or cols < 0:
            raise ValueError("carrier sizes must be non-negative")
        self.rows = rows
        self.cols = cols
        data: Dict[Tuple[int, int], Degree] = {}
        pairs = entries.items() if isinstance(entries, Mapping) else entries
        fwd: Dict[int, list] = {}
        inv: Dict[int, list] = {}
        for (i, j), deg in pairs:
            if not (0 <= i < rows and 0 <= j < cols):
                raise ValueError(f"pair ({i},{j}) outside carrier {rows}x{cols}")
            if not isinstance(deg, Degree):
                deg = Degree(deg)
            if deg.is_zero:
                raise ValueError(f"zero entries must be omitted (pair ({i},{j}))")
            if (i, j) in data:
                raise ValueError(f"duplicate entry for pair ({i},{j})")
            data[i, j] = deg
            fwd.setdefault(i, []).append((j, deg))
            inv.setdefault(j, []).append((i, deg))
        self._entries = data
        self._fwd = {i: tuple(sorted(v)) for i, v in fwd.items()}
        self._inv = {j: tuple(sorted(v)) for j, v in inv.items()}

    def value(self, i: int, j: int) -> Degree:
        return self._entries.get((i, j), ZERO)

    def successors(self, i: int) -> Tuple[Tuple[int, Degree], ...]:
        return self._fwd.get(i, ())

    def predecessors(self, j: int) -> Tuple[Tuple[int, Degree], ...]:
        return self._inv.get(j, ())

    def items(self) -> Iterator[Tuple[Tuple[int, int], Degree]]:
        return iter(sorted(self._entries.items()))

    def support_size(self) -> int:
        return len(self._entries)

    def sources(self) -> Tuple[int, ...]:
        return tuple(sorted(self._fwd))

    def targets(self) -> Tuple[int, ...]:
        return tuple(sorted(self._inv))

    def degrees(self) -> Tuple[Degree, ...]:
        return tuple(sorted(set(self._entries.values())))

    def inverse(self) -> "FuzzyRelation":
        return FuzzyRelation(self.cols, self.rows, {(j, i): d for (i, j), d in self._entries.items()})

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    def __len__(self) -> int:
        return len(self._entries)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, FuzzyRelation)
            and self.rows == other.rows
            and self.cols == other.cols
            and self._entries == other._entries
        )

    def __hash__(self):
        return hash((self.rows, self.cols, tuple(sorted(self._entries.items()))))

    def __repr__(self) -> str:
        body = ", ".join(f"({i},{j}):{d}" for (i, j), d in self.items())
        return f"FuzzyRelation({self.rows}x{self.cols}, {{{body}}})"

    def leq(self, other: "FuzzyRelation") -> bool:
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValueError("carrier mismatch")
        return all(d <= other.value(i, j) for (i, j), d in self._entries.items())


def identity_relation(n: int) -> FuzzyRelation:
    return FuzzyRelation(n, n, {(i, i): ONE for i in range(n)})


def compose(phi: FuzzyRelation, psi: FuzzyRelation) -> FuzzyRelation:
    """Max-min composition of two fuzzy relations."""
    if phi.cols != psi.rows:
        raise ValueError(f"composition dimension mismatch: {phi.cols} vs {psi.rows}")
    best: Dict[Tuple[int, int], Degree] = {}
    for (i, k), d1 in phi._entries.items():
        for j, d2 in psi.successors(k):
            d = d1 if d1 <= d2 else d2
            key = (i, j)
            if key not in best or best[key] < d:
                best[key] = d
    return FuzzyRelation(phi.rows, psi.cols, best)


def _to_scaled_matrix(phi: FuzzyRelation) -> np.ndarray:
    m = np.zeros((phi.rows, phi.cols), dtype=np.int64)
    for (i, j), d in phi._entries.items():
        m[i, j] = d.scaled
    return m


def _from_scaled_matrix(m: np.ndarray) -> FuzzyRelation:
    entries = {}
    for i, j in zip(*np.nonzero(m)):
        entries[int(i), int(j)] = Degree.from_scaled(int(m[i, j]))
    return FuzzyRelation(m.shape[0], m.shape[1], entries)


def rst_closure(phi: FuzzyRelation) -> FuzzyRelation:
    """Reflexive-symmetric-min-transitive closure of a square fuzzy relation.

    All-pairs max-min relaxation; cubic, only used on input-construction
    relations, never inside the minimizer.
    """
    if not phi.is_square:
        raise ValueError("closure requires a square relation")
    n = phi.rows
    m = _to_scaled_matrix(phi)
    m = np.maximum(m, m.T)
    np.fill_diagonal(m, SCALE)
    for k in range(n):
        np.maximum(m, np.minimum(m[:, k][:, None], m[k, :][None, :]), out=m)
    return _from_scaled_matrix(m)


def is_fuzzy_equivalence(phi: FuzzyRelation) -> bool:
    """True iff phi is reflexive, symmetric and min-transitive."""
    if not phi.is_square:
        raise ValueError("equivalence check requires a square relation")
    for i in range(phi.rows):
        if not phi.value(i, i).is_one:
            return False
    for (i, j), d in phi._entries.items():
        if phi.value(j, i) != d:
            return False
    for (i, k), d1 in phi._entries.items():
        for j, d2 in phi.successors(k):
            through = d1 if d1 <= d2 else d2
            if phi.value(i, j) < through:
                return False
    return True
