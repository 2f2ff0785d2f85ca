"""Independent oracles and small builders shared by the test modules.

Everything here is deliberately written from scratch against the defining
formulas (subset sums, Bell recurrence, raw product enumeration) so the
package under test never checks itself against its own code paths.
"""

from __future__ import annotations

from collections import Counter
from fractions import Fraction
from itertools import combinations, product

from lagrange_forest import ColorSet, TruncatedSeries

POOL = (Fraction(0), Fraction(1), Fraction(-1), Fraction(1, 2), Fraction(2))


def series_from(colors: ColorSet, order: int, table: dict) -> TruncatedSeries:
    return TruncatedSeries(colors, order, {k: Fraction(v) for k, v in table.items()})


def bell_number(n: int) -> int:
    """Bell number via the Bell-triangle recurrence."""
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for value in row:
            nxt.append(nxt[-1] + value)
        row = nxt
    return row[0]


def product_oracle(k: TruncatedSeries, g: TruncatedSeries, key: tuple) -> Fraction:
    """Product coefficient by the literal subset-sum formula."""
    n = len(key)
    total = Fraction(0)
    for size in range(n + 1):
        for chosen in combinations(range(n), size):
            left = k.coefficient(tuple(key[p] for p in chosen))
            right = g.coefficient(tuple(key[p] for p in range(n) if p not in chosen))
            total += left * right
    return total


def enriched_count_oracle(n_vertices: int, sinks: tuple) -> int:
    """Independent count of enriched maps: sum over raw maps of Bell products."""
    universe = list(range(1, n_vertices + 1)) + list(sinks)
    total = 0
    for targets in product(universe, repeat=n_vertices):
        fibers = Counter(targets)
        weight = 1
        for size in fibers.values():
            weight *= bell_number(size)
        total += weight
    return total


def measure_compose_oracle(gamma, family, q: str, key: tuple) -> Fraction:
    """Atom coefficient of a measure composition, straight from the definition.

    Treats the measure's atom table at q as a scalar series and substitutes
    the measure "family times base measure" into it: sum over non-empty
    position subsets J, with the remaining positions distributed over J in
    all possible ways.
    """
    n = len(key)
    total = Fraction(0)
    positions = range(n)
    for size in range(1, n + 1):
        for chosen in combinations(positions, size):
            gv = gamma.members[q].coefficient(tuple(key[p] for p in chosen))
            if not gv:
                continue
            rest = [p for p in positions if p not in chosen]
            for assignment in product(range(size), repeat=len(rest)):
                term = gv
                for slot, j in enumerate(chosen):
                    share = tuple(
                        key[p] for p, owner in zip(rest, assignment) if owner == slot
                    )
                    term *= family.members[key[j]].coefficient(share)
                total += term
    return total
