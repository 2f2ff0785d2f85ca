"""Exact truncated power series over a finite color set.

A scalar series is stored as a sparse table mapping canonical coefficient
keys (sorted tuples of color labels) to rationals; the table holds the
symmetric-function values of the coefficients, so a key stands for every
permutation of its colors. All operations truncate silently at the series
order, which is sound because a coefficient of a given size never depends
on larger coefficients of the inputs.

Function-valued series are families with one member series per color;
measure-valued series store, per color, the coefficient table of the atom
at that color, and usually also carry the density family they were lifted
from.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, combinations_with_replacement, product
from math import comb
from typing import Iterable, Iterator, Sequence, Union

from .combinat import set_partitions_of
from .errors import (
    ColorSetMismatch,
    DuplicateKey,
    EmptyInput,
    KeyTooLarge,
    NonzeroConstantTerm,
    OrderMismatch,
    TooManyPins,
    UnknownColor,
)

Key = tuple[str, ...]
RationalLike = Union[Fraction, int, str]


def canonical_key(colors: Iterable[str]) -> Key:
    """Sorted tuple form of a color multiset; labels sort lexicographically."""
    return tuple(sorted(colors))


@dataclass(frozen=True)
class ColorSet:
    """A finite set of distinct, non-empty color labels."""

    names: tuple[str, ...]

    def __post_init__(self) -> None:
        names = tuple(self.names)
        if not names:
            raise ValueError("a color set needs at least one color")
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate color labels in {names}")
        for name in names:
            if not isinstance(name, str) or not name:
                raise ValueError(f"color labels must be non-empty strings, got {name!r}")
        object.__setattr__(self, "names", names)

    @property
    def d(self) -> int:
        return len(self.names)

    def __contains__(self, label: object) -> bool:
        return label in self.names

    def __iter__(self) -> Iterator[str]:
        return iter(self.names)

    @property
    def sorted_names(self) -> tuple[str, ...]:
        return tuple(sorted(self.names))

    def require(self, labels: Iterable[str]) -> None:
        for label in labels:
            if label not in self.names:
                raise UnknownColor(f"color {label!r} is not in {self.names}")


def all_keys(colors: ColorSet, max_size: int) -> Iterator[Key]:
    """Every canonical key of size 0..max_size, ordered by size then lexicographically."""
    for n in range(max_size + 1):
        yield from combinations_with_replacement(colors.sorted_names, n)


@dataclass(frozen=True)
class TruncatedSeries:
    """Scalar formal power series truncated at ``order``.

    ``table`` maps canonical keys of size <= order to non-zero rationals;
    absent keys mean a zero coefficient. Instances are immutable; build them
    through :func:`make_series` or the arithmetic operations.
    """

    colors: ColorSet
    order: int
    table: dict[Key, Fraction]

    def __post_init__(self) -> None:
        if self.order < 0:
            raise ValueError("order must be non-negative")
        clean: dict[Key, Fraction] = {}
        for key, value in self.table.items():
            if len(key) > self.order:
                raise ValueError(f"internal error: key {key} exceeds order {self.order}")
            value = Fraction(value)
            if value:
                clean[canonical_key(key)] = value
        object.__setattr__(self, "table", clean)

    @property
    def f0(self) -> Fraction:
        return self.table.get((), Fraction(0))

    def coefficient(self, q_tuple: Sequence[str]) -> Fraction:
        """Coefficient at a color tuple; invariant under permutations."""
        if len(q_tuple) > self.order:
            raise KeyTooLarge(
                f"tuple of size {len(q_tuple)} exceeds order {self.order}"
            )
        self.colors.require(q_tuple)
        return self.table.get(canonical_key(q_tuple), Fraction(0))

    def support_colors(self) -> tuple[str, ...]:
        return tuple(sorted({c for key in self.table for c in key}))


def make_series(
    colors: ColorSet,
    order: int,
    entries: Iterable[tuple[Sequence[str], RationalLike]] = (),
) -> TruncatedSeries:
    """Build a series from (color tuple, value) pairs given in any color order."""
    table: dict[Key, Fraction] = {}
    for raw_key, raw_value in entries:
        colors.require(raw_key)
        if len(raw_key) > order:
            raise KeyTooLarge(f"key {tuple(raw_key)} exceeds order {order}")
        key = canonical_key(raw_key)
        if key in table:
            raise DuplicateKey(f"duplicate canonical key {key}")
        table[key] = Fraction(raw_value)
    return TruncatedSeries(colors, order, table)


def zero_series(colors: ColorSet, order: int) -> TruncatedSeries:
    return TruncatedSeries(colors, order, {})


def constant_series(colors: ColorSet, order: int, value: RationalLike) -> TruncatedSeries:
    return TruncatedSeries(colors, order, {(): Fraction(value)})


def indicator_series(
    colors: ColorSet, order: int, subset: Iterable[str]
) -> TruncatedSeries:
    """The series measuring a color subset B: first-order coefficient one on B."""
    labels = tuple(dict.fromkeys(subset))
    colors.require(labels)
    if order < 1:
        return zero_series(colors, order)
    return TruncatedSeries(colors, order, {(c,): Fraction(1) for c in labels})


def _check_pair(k: TruncatedSeries, g: TruncatedSeries) -> None:
    if k.colors != g.colors:
        raise ColorSetMismatch(f"{k.colors.names} vs {g.colors.names}")
    if k.order != g.order:
        raise OrderMismatch(f"order {k.order} vs {g.order}")


def add(k: TruncatedSeries, g: TruncatedSeries) -> TruncatedSeries:
    _check_pair(k, g)
    table = dict(k.table)
    for key, value in g.table.items():
        table[key] = table.get(key, Fraction(0)) + value
    return TruncatedSeries(k.colors, k.order, table)


def scale(k: TruncatedSeries, factor: RationalLike) -> TruncatedSeries:
    factor = Fraction(factor)
    return TruncatedSeries(
        k.colors, k.order, {key: factor * value for key, value in k.table.items()}
    )


def _merge_multiplicity(key_a: Key, key_b: Key) -> int:
    # number of position subsets of the merged key realizing key_a as a multiset
    total = Counter(key_a) + Counter(key_b)
    count_a = Counter(key_a)
    mult = 1
    for color, m in count_a.items():
        mult *= comb(total[color], m)
    return mult


def multiply(k: TruncatedSeries, g: TruncatedSeries) -> TruncatedSeries:
    """Product series: each coefficient is a sum over splits of its key.

    The coefficient at a tuple is the sum, over all subsets J of the tuple's
    positions, of K at the J-part times G at the complement. Implemented by
    accumulating support pairs with the matching binomial multiplicities.
    """
    _check_pair(k, g)
    out: dict[Key, Fraction] = {}
    for key_a, va in k.table.items():
        for key_b, vb in g.table.items():
            if len(key_a) + len(key_b) > k.order:
                continue
            merged = canonical_key(key_a + key_b)
            term = va * vb * _merge_multiplicity(key_a, key_b)
            out[merged] = out.get(merged, Fraction(0)) + term
    return TruncatedSeries(k.colors, k.order, out)


def multiply_many(factors: Sequence[TruncatedSeries]) -> TruncatedSeries:
    """Product of several series, computed directly via ordered partitions.

    For every coefficient key, positions are distributed over the factors in
    all possible ways (empty shares allowed). This is deliberately a second,
    independent route to the iterated binary product and serves as its
    oracle in the test suite.
    """
    if not factors:
        raise EmptyInput("multiply_many needs at least one factor")
    first = factors[0]
    for other in factors[1:]:
        _check_pair(first, other)
    r = len(factors)
    out: dict[Key, Fraction] = {}
    for key in all_keys(first.colors, first.order):
        n = len(key)
        total = Fraction(0)
        for assignment in product(range(r), repeat=n):
            term = Fraction(1)
            for idx, factor in enumerate(factors):
                part = tuple(key[p] for p in range(n) if assignment[p] == idx)
                value = factor.table.get(part)
                if value is None:
                    term = Fraction(0)
                    break
                term *= value
            total += term
        if total:
            out[key] = total
    return TruncatedSeries(first.colors, first.order, out)


def exponential(k: TruncatedSeries) -> TruncatedSeries:
    """Exponential of a series with vanishing constant term.

    The coefficient at a tuple is the sum over set partitions of its
    positions of the product of K over the blocks; the constant term is one.
    """
    if k.f0:
        raise NonzeroConstantTerm("exponential needs a vanishing constant term")
    support = k.support_colors()
    out: dict[Key, Fraction] = {(): Fraction(1)}
    for n in range(1, k.order + 1):
        for key in combinations_with_replacement(support, n):
            total = Fraction(0)
            for partition in set_partitions_of(range(n)):
                term = Fraction(1)
                for block in partition:
                    value = k.table.get(tuple(key[p] for p in block))
                    if value is None:
                        term = Fraction(0)
                        break
                    term *= value
                total += term
            if total:
                out[key] = total
    return TruncatedSeries(k.colors, k.order, out)


def compose_univariate(
    outer: Sequence[RationalLike], k: TruncatedSeries
) -> TruncatedSeries:
    """Substitute ``k`` into a single-variable series.

    ``outer`` lists the coefficients of the outer series in the exponential
    convention (the m-th entry is m! times the monomial coefficient). The
    result's coefficient at a tuple sums, over set partitions of the tuple's
    positions, the outer coefficient at the block count times the product of
    K over the blocks. With all outer coefficients equal to one this reduces
    to :func:`exponential`.
    """
    if k.f0:
        raise NonzeroConstantTerm("composition needs a vanishing constant term")
    coeffs = [Fraction(x) for x in outer]

    def outer_at(m: int) -> Fraction:
        return coeffs[m] if m < len(coeffs) else Fraction(0)

    out: dict[Key, Fraction] = {}
    if outer_at(0):
        out[()] = outer_at(0)
    support = k.support_colors()
    for n in range(1, k.order + 1):
        for key in combinations_with_replacement(support, n):
            total = Fraction(0)
            for partition in set_partitions_of(range(n)):
                factor = outer_at(len(partition))
                if not factor:
                    continue
                term = factor
                for block in partition:
                    value = k.table.get(tuple(key[p] for p in block))
                    if value is None:
                        term = Fraction(0)
                        break
                    term *= value
                total += term
            if total:
                out[key] = total
    return TruncatedSeries(k.colors, k.order, out)


def variational_derivative(k: TruncatedSeries, pins: Sequence[str]) -> TruncatedSeries:
    """Pin colors: the result's coefficient at x is K's coefficient at pins + x.

    The result is truncated at ``order - len(pins)``; its constant term is
    K's coefficient at the pinned tuple itself.
    """
    if len(pins) > k.order:
        raise TooManyPins(f"cannot pin {len(pins)} colors at order {k.order}")
    k.colors.require(pins)
    pinned = Counter(pins)
    new_order = k.order - len(pins)
    out: dict[Key, Fraction] = {}
    for key, value in k.table.items():
        counts = Counter(key)
        if any(counts[c] < m for c, m in pinned.items()):
            continue
        remainder = counts - pinned
        rest = canonical_key(
            [c for c, m in remainder.items() for _ in range(m)]
        )
        if len(rest) <= new_order:
            out[rest] = value
    return TruncatedSeries(k.colors, new_order, out)


def coefficient_at(k: TruncatedSeries, q_tuple: Sequence[str]) -> Fraction:
    return k.coefficient(q_tuple)


def restrict(k: TruncatedSeries, subset: Iterable[str]) -> TruncatedSeries:
    """Zero out every coefficient whose key uses a color outside ``subset``."""
    labels = set(subset)
    k.colors.require(labels)
    table = {
        key: value for key, value in k.table.items() if set(key) <= labels
    }
    return TruncatedSeries(k.colors, k.order, table)


def rename_colors(k: TruncatedSeries, mapping: dict[str, str]) -> TruncatedSeries:
    """Apply a bijective relabelling of colors to a series."""
    if set(mapping) != set(k.colors.names) or len(set(mapping.values())) != len(mapping):
        raise ValueError("mapping must be a bijection defined on every color")
    new_colors = ColorSet(tuple(mapping[name] for name in k.colors.names))
    table = {
        canonical_key(mapping[c] for c in key): value
        for key, value in k.table.items()
    }
    return TruncatedSeries(new_colors, k.order, table)


# ---------------------------------------------------------------------------
# function-valued and measure-valued series


@dataclass(frozen=True)
class FamilySeries:
    """One scalar series per color: a function-valued series, finitely many colors."""

    colors: ColorSet
    order: int
    members: dict[str, TruncatedSeries]

    def __post_init__(self) -> None:
        if set(self.members) != set(self.colors.names):
            raise ValueError("family needs exactly one member per color")
        for member in self.members.values():
            if member.colors != self.colors:
                raise ColorSetMismatch("family member over a different color set")
            if member.order != self.order:
                raise OrderMismatch("family member with a different order")

    @classmethod
    def constant(
        cls, colors: ColorSet, order: int, value: RationalLike = 1
    ) -> FamilySeries:
        return cls(
            colors,
            order,
            {name: constant_series(colors, order, value) for name in colors.names},
        )

    def member(self, q: str) -> TruncatedSeries:
        self.colors.require((q,))
        return self.members[q]


@dataclass(frozen=True)
class MeasureSeries:
    """Measure-valued series over a finite color set, stored atom by atom.

    ``members[q]`` is the coefficient table of the atom at color q;
    evaluating on a subset B sums the atoms over B. When the series was
    produced as density times the base measure, ``density`` keeps that
    family (it does not take part in equality comparisons).
    """

    colors: ColorSet
    order: int
    members: dict[str, TruncatedSeries]
    density: FamilySeries | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if set(self.members) != set(self.colors.names):
            raise ValueError("measure series needs one atom table per color")
        for member in self.members.values():
            if member.colors != self.colors or member.order != self.order:
                raise ValueError("inconsistent atom table")

    def member(self, q: str) -> TruncatedSeries:
        self.colors.require((q,))
        return self.members[q]

    def evaluate(self, subset: Iterable[str] | None = None) -> TruncatedSeries:
        """Sum of the atoms over a color subset (the whole set by default)."""
        labels = tuple(self.colors.names) if subset is None else tuple(subset)
        self.colors.require(labels)
        total = zero_series(self.colors, self.order)
        for label in dict.fromkeys(labels):
            total = add(total, self.members[label])
        return total


def integrate(family: FamilySeries) -> TruncatedSeries:
    """Integrate a function-valued series against the base measure.

    The n-th coefficient sums the family member pinned at each position of
    the key over the remaining positions; the constant term is zero.
    """
    out: dict[Key, Fraction] = {}
    for q in family.colors.sorted_names:
        for key, value in family.members[q].table.items():
            if len(key) + 1 > family.order:
                continue
            merged = canonical_key(key + (q,))
            out[merged] = out.get(merged, Fraction(0)) + value * (key.count(q) + 1)
    return TruncatedSeries(family.colors, family.order, out)


def radon_lift(family: FamilySeries) -> MeasureSeries:
    """Multiply a function-valued series by the base measure.

    The atom at q collects, from each key containing q, the family member at
    q evaluated with one copy of q removed, weighted by the multiplicity of
    q in the key. Summed over all colors this reproduces :func:`integrate`.
    """
    members: dict[str, TruncatedSeries] = {}
    for q in family.colors.names:
        table: dict[Key, Fraction] = {}
        for key, value in family.members[q].table.items():
            if len(key) + 1 > family.order:
                continue
            merged = canonical_key(key + (q,))
            table[merged] = table.get(merged, Fraction(0)) + value * (key.count(q) + 1)
        members[q] = TruncatedSeries(family.colors, family.order, table)
    return MeasureSeries(family.colors, family.order, members, density=family)


def _check_family(g: TruncatedSeries, family: FamilySeries) -> None:
    if g.colors != family.colors:
        raise ColorSetMismatch("series and family over different color sets")
    if g.order != family.order:
        raise OrderMismatch("series and family with different orders")


def _compose_table(
    g: TruncatedSeries, family: FamilySeries, max_size: int
) -> dict[Key, Fraction]:
    out: dict[Key, Fraction] = {}
    if g.f0:
        out[()] = g.f0
    names = g.colors.sorted_names
    for n in range(1, max_size + 1):
        for key in combinations_with_replacement(names, n):
            positions = range(n)
            total = Fraction(0)
            for jsize in range(1, n + 1):
                for chosen in combinations(positions, jsize):
                    gv = g.table.get(tuple(key[p] for p in chosen))
                    if gv is None:
                        continue
                    rest = [p for p in positions if p not in chosen]
                    slot_tables = [family.members[key[p]].table for p in chosen]
                    for assignment in product(range(jsize), repeat=len(rest)):
                        shares: list[list[int]] = [[] for _ in range(jsize)]
                        for pos, owner in zip(rest, assignment):
                            shares[owner].append(pos)
                        term = gv
                        for slot in range(jsize):
                            fv = slot_tables[slot].get(
                                tuple(key[p] for p in shares[slot])
                            )
                            if fv is None:
                                term = Fraction(0)
                                break
                            term *= fv
                        total += term
            if total:
                out[key] = total
    return out


def compose_family(g: TruncatedSeries, family: FamilySeries) -> TruncatedSeries:
    """Substitute the measure "family times base measure" into the series g.

    A coefficient at a key is a sum over non-empty position subsets J and
    distributions of the remaining positions into shares, one share per
    element of J: g contributes its coefficient at the J-colors, and each
    J-position contributes its family member at that position's share. The
    constant term stays g's constant term.
    """
    _check_family(g, family)
    return TruncatedSeries(g.colors, g.order, _compose_table(g, family, g.order))


def compose_measure(gamma: MeasureSeries, family: FamilySeries) -> MeasureSeries:
    """Substitute the measure "family times base measure" into a measure series.

    ``gamma`` must carry its density family. With gamma = G times the base
    measure and the substituted measure K = F times the base measure, the
    result is the measure with density q -> (G_q composed with K) times F_q,
    again in radon form.
    """
    if gamma.density is None:
        raise ValueError("compose_measure needs a measure series carrying its density")
    if gamma.colors != family.colors:
        raise ColorSetMismatch("measure and family over different color sets")
    if gamma.order != family.order:
        raise OrderMismatch("measure and family with different orders")
    members = {
        q: multiply(
            compose_family(gamma.density.members[q], family), family.members[q]
        )
        for q in gamma.colors.names
    }
    return radon_lift(FamilySeries(gamma.colors, gamma.order, members))


# ---------------------------------------------------------------------------
# kernel families


@dataclass(frozen=True, eq=False)
class KernelFamily:
    """Coefficient tables of the map to invert, one table per pinned color.

    ``tables[q]`` maps canonical keys of size 1..order to the kernel value
    with first argument q. Size-zero keys are forbidden: the constant
    coefficient of every pinned series vanishes by construction.
    """

    colors: ColorSet
    order: int
    tables: dict[str, dict[Key, Fraction]]

    __hash__ = object.__hash__

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, KernelFamily):
            return NotImplemented
        return (
            self.colors == other.colors
            and self.order == other.order
            and self.tables == other.tables
        )

    def value(self, q: str, xs: Sequence[str]) -> Fraction:
        """Kernel value pinned at q, evaluated at the color multiset xs."""
        return self.tables.get(q, {}).get(canonical_key(xs), Fraction(0))

    def series_at(self, q: str) -> TruncatedSeries:
        """The scalar series pinned at q (vanishing constant term)."""
        self.colors.require((q,))
        return TruncatedSeries(self.colors, self.order, dict(self.tables.get(q, {})))


def make_kernel_family(
    colors: ColorSet,
    order: int,
    entries: Iterable[tuple[str, Sequence[str], RationalLike]] = (),
) -> KernelFamily:
    """Build a kernel family from (pinned color, key tuple, value) triples."""
    if order < 1:
        raise ValueError("a kernel family needs order >= 1")
    tables: dict[str, dict[Key, Fraction]] = {name: {} for name in colors.names}
    for q, raw_key, raw_value in entries:
        colors.require((q,))
        colors.require(raw_key)
        if len(raw_key) == 0:
            raise NonzeroConstantTerm(
                "kernel families have no constant coefficients; size-0 keys are forbidden"
            )
        if len(raw_key) > order:
            raise KeyTooLarge(f"key {tuple(raw_key)} exceeds order {order}")
        key = canonical_key(raw_key)
        if key in tables[q]:
            raise DuplicateKey(f"duplicate kernel key {key} for color {q!r}")
        value = Fraction(raw_value)
        if value:
            tables[q][key] = value
    return KernelFamily(colors, order, tables)
