"""Brute-force enumeration of enriched maps, trees, crowns, and forests.

Everything in this module is exhaustive enumeration with exact rational
weights. It is deliberately independent of the series algebra in
:mod:`lagrange_forest.series` so that the two sides can cross-check each
other coefficient by coefficient.

Vertex labels are integers. Enumerations are emitted in a fixed canonical
order: lexicographic on the map's target vector, then on the fiber
partitions (restricted-growth order per fiber).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, permutations, product
from typing import TYPE_CHECKING, Iterable, Mapping, Sequence
from weakref import WeakKeyDictionary

from .errors import BlockTooLarge, SizeCapExceeded

if TYPE_CHECKING:
    from .series import KernelFamily

#: Default refusal threshold for ``len(V) + len(S)``; the number of enriched
#: maps grows super-exponentially with the vertex count.
MAX_ENUMERATION = 9

Coloring = Mapping[int, str]


# ---------------------------------------------------------------------------
# set partitions


def set_partitions_of(items: Iterable) -> list[tuple[tuple, ...]]:
    """All set partitions of ``items`` into non-empty blocks.

    Partitions are emitted in restricted-growth order; within a partition,
    blocks are ordered by their first element and keep the input order of
    ``items``. The empty collection has exactly one (empty) partition.
    """
    elements = list(items)
    n = len(elements)
    if n == 0:
        return [()]
    out: list[tuple[tuple, ...]] = []
    codes = [0] * n

    def extend(i: int, top: int) -> None:
        if i == n:
            blocks: dict[int, list] = {}
            for element, code in zip(elements, codes):
                blocks.setdefault(code, []).append(element)
            out.append(tuple(tuple(blocks[c]) for c in sorted(blocks)))
            return
        for code in range(top + 2):
            codes[i] = code
            extend(i + 1, max(top, code))

    extend(0, -1)
    return out


def set_partitions(n: int) -> list[tuple[tuple[int, ...], ...]]:
    """All set partitions of ``{1, ..., n}``; the count is the Bell number."""
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    return set_partitions_of(range(1, n + 1))


# ---------------------------------------------------------------------------
# enriched maps


class StructureClass(enum.Enum):
    VERTEX_ROOTED_TREE = "vertex-rooted-tree"
    CYCLE_ROOTED_TREE = "cycle-rooted-tree"
    CROWN = "crown"
    GENERAL_MAP = "general-map"


@dataclass(frozen=True)
class EnrichedMap:
    """A partial endofunction together with a set partition of every fiber.

    ``targets[i]`` is the image of ``domain[i]``; sinks have no outgoing
    edge. ``blocks`` lists, for every vertex with a non-empty fiber, the
    partition of that fiber into non-empty blocks. All components are stored
    in canonical (sorted) form, so instances are hashable value objects.
    """

    domain: tuple[int, ...]
    sinks: tuple[int, ...]
    targets: tuple[int, ...]
    blocks: tuple[tuple[int, tuple[tuple[int, ...], ...]], ...]

    @property
    def vertices(self) -> tuple[int, ...]:
        return tuple(sorted(self.domain + self.sinks))

    @property
    def mapping(self) -> dict[int, int]:
        return dict(zip(self.domain, self.targets))

    def fiber_partition(self, v: int) -> tuple[tuple[int, ...], ...]:
        for vertex, parts in self.blocks:
            if vertex == v:
                return parts
        return ()

    def render(self) -> str:
        """Canonical single-line description, used by the CLI listings."""
        if self.domain:
            arrows = " ".join(f"{v}->{t}" for v, t in zip(self.domain, self.targets))
        else:
            arrows = "(empty)"
        parts = " ".join(
            f"P({v})={{{'|'.join(','.join(map(str, b)) for b in p)}}}"
            for v, p in self.blocks
        )
        return f"{arrows} ; {parts}" if parts else arrows


def _check_cap(size: int, size_cap: int) -> None:
    if size > size_cap:
        raise SizeCapExceeded(
            f"enumeration over {size} vertices exceeds the cap of {size_cap}"
        )


@lru_cache(maxsize=None)
def _enriched_maps(domain: tuple[int, ...], sinks: tuple[int, ...]) -> tuple[EnrichedMap, ...]:
    universe = tuple(sorted(domain + sinks))
    out = []
    for targets in product(universe, repeat=len(domain)):
        fibers: dict[int, list[int]] = {}
        for v, t in zip(domain, targets):
            fibers.setdefault(t, []).append(v)
        occupied = [v for v in universe if v in fibers]
        choices = [
            [(v, parts) for parts in set_partitions_of(fibers[v])] for v in occupied
        ]
        for combo in product(*choices):
            out.append(EnrichedMap(domain, sinks, targets, tuple(combo)))
    return tuple(out)


def enumerate_enriched_maps(
    domain: Iterable[int],
    sinks: Iterable[int] = (),
    *,
    size_cap: int = MAX_ENUMERATION,
) -> list[EnrichedMap]:
    """All enriched maps with the given domain and sink set.

    Returns the empty list for an empty domain. Raises
    :class:`SizeCapExceeded` when ``len(domain) + len(sinks)`` is above
    ``size_cap``.
    """
    dom = tuple(sorted(set(domain)))
    snk = tuple(sorted(set(sinks)))
    if set(dom) & set(snk):
        raise ValueError("domain and sinks must be disjoint")
    if not dom:
        return []
    _check_cap(len(dom) + len(snk), size_cap)
    return list(_enriched_maps(dom, snk))


# ---------------------------------------------------------------------------
# structure classification


def _cycle_vertices(m: EnrichedMap) -> set[int]:
    f = m.mapping
    on_cycle: set[int] = set()
    for start in m.domain:
        cur = start
        for _ in range(len(m.domain)):
            if cur not in f:  # reached a sink
                break
            cur = f[cur]
            if cur == start:
                on_cycle.add(start)
                break
    return on_cycle


def _cycle_count(m: EnrichedMap) -> int:
    f = m.mapping
    remaining = _cycle_vertices(m)
    count = 0
    while remaining:
        count += 1
        cur = min(remaining)
        while cur in remaining:
            remaining.discard(cur)
            cur = f[cur]
    return count


def _is_connected(m: EnrichedMap) -> bool:
    vertices = m.vertices
    if not vertices:
        return True
    neighbours: dict[int, set[int]] = {v: set() for v in vertices}
    for v, t in zip(m.domain, m.targets):
        neighbours[v].add(t)
        neighbours[t].add(v)
    seen = {vertices[0]}
    frontier = [vertices[0]]
    while frontier:
        nxt = frontier.pop()
        for w in neighbours[nxt]:
            if w not in seen:
                seen.add(w)
                frontier.append(w)
    return len(seen) == len(vertices)


def is_vertex_rooted_tree(m: EnrichedMap) -> bool:
    """Connected, acyclic, with the unique sink as root."""
    return len(m.sinks) == 1 and _is_connected(m) and not _cycle_vertices(m)


def is_cycle_rooted_tree(m: EnrichedMap) -> bool:
    """Connected with exactly one cycle; such a graph has no sinks."""
    return not m.sinks and _is_connected(m) and _cycle_count(m) == 1


def is_crown(m: EnrichedMap) -> bool:
    """Image is a single cycle and every base fiber carries one block."""
    if m.sinks or not m.domain:
        return False
    base = set(m.targets)
    f = m.mapping
    start = min(base)
    cur = start
    seen = set()
    for _ in range(len(base)):
        seen.add(cur)
        cur = f[cur]
    if cur != start or seen != base:
        return False
    return all(len(m.fiber_partition(r)) == 1 for r in base)


def classify(m: EnrichedMap) -> StructureClass:
    """Structure class of the underlying functional digraph.

    Crowns are reported as :attr:`StructureClass.CROWN` even though every
    crown is also a cycle-rooted tree.
    """
    if is_crown(m):
        return StructureClass.CROWN
    if is_cycle_rooted_tree(m):
        return StructureClass.CYCLE_ROOTED_TREE
    if is_vertex_rooted_tree(m):
        return StructureClass.VERTEX_ROOTED_TREE
    return StructureClass.GENERAL_MAP


def connected_components(m: EnrichedMap) -> list[EnrichedMap]:
    """Split an enriched map into its weakly connected components."""
    vertices = m.vertices
    neighbours: dict[int, set[int]] = {v: set() for v in vertices}
    for v, t in zip(m.domain, m.targets):
        neighbours[v].add(t)
        neighbours[t].add(v)
    unvisited = set(vertices)
    components = []
    while unvisited:
        seed = min(unvisited)
        comp = {seed}
        frontier = [seed]
        while frontier:
            for w in neighbours[frontier.pop()]:
                if w not in comp:
                    comp.add(w)
                    frontier.append(w)
        unvisited -= comp
        f = m.mapping
        dom = tuple(v for v in m.domain if v in comp)
        components.append(
            EnrichedMap(
                dom,
                tuple(s for s in m.sinks if s in comp),
                tuple(f[v] for v in dom),
                tuple((v, p) for v, p in m.blocks if v in comp),
            )
        )
    return components


# ---------------------------------------------------------------------------
# weights


def map_weight(m: EnrichedMap, coloring: Coloring, kernels: "KernelFamily") -> Fraction:
    """Product over fiber blocks of the kernel value at the block's colors.

    ``coloring`` must assign a color to every vertex, domain and sinks
    alike. An enriched map without any blocks has weight one.
    """
    for v in m.vertices:
        if v not in coloring:
            raise ValueError(f"coloring misses vertex {v}")
    weight = Fraction(1)
    for v, parts in m.blocks:
        pinned = coloring[v]
        for block in parts:
            if len(block) > kernels.order:
                raise BlockTooLarge(
                    f"fiber block of size {len(block)} exceeds order {kernels.order}"
                )
            weight *= kernels.value(pinned, tuple(coloring[w] for w in block))
            if not weight:
                return weight
    return weight


# ---------------------------------------------------------------------------
# rooted trees


@lru_cache(maxsize=None)
def _rooted_trees(domain: tuple[int, ...], sink: int) -> tuple[EnrichedMap, ...]:
    return tuple(
        m for m in _enriched_maps(domain, (sink,)) if is_vertex_rooted_tree(m)
    )


def enumerate_rooted_trees(
    domain: Iterable[int], sink: int = 0, *, size_cap: int = MAX_ENUMERATION
) -> list[EnrichedMap]:
    """All enriched maps on ``domain`` plus one sink that are vertex-rooted trees."""
    dom = tuple(sorted(set(domain)))
    if sink in dom:
        raise ValueError("sink must not belong to the domain")
    if not dom:
        return []
    _check_cap(len(dom) + 1, size_cap)
    return list(_rooted_trees(dom, sink))


_tree_memo: "WeakKeyDictionary[object, dict]" = WeakKeyDictionary()


def tree_coefficient(
    n: int,
    root_color: str,
    leaf_colors: Sequence[str],
    kernels: "KernelFamily",
    *,
    size_cap: int = MAX_ENUMERATION,
) -> Fraction:
    """Sum of weights over all enriched rooted trees on ``n`` labelled vertices.

    The root is a ghost carrying ``root_color``; vertex ``i`` carries
    ``leaf_colors[i-1]``. By convention the empty tree (``n == 0``) has
    coefficient one.
    """
    if len(leaf_colors) != n:
        raise ValueError("leaf_colors must have length n")
    if n > kernels.order:
        raise ValueError(f"n={n} exceeds the kernel family's order {kernels.order}")
    if n == 0:
        return Fraction(1)
    memo = _tree_memo.setdefault(kernels, {})
    key = (n, root_color, tuple(sorted(leaf_colors)))
    cached = memo.get(key)
    if cached is not None:
        return cached
    _check_cap(n + 1, size_cap)
    coloring = {0: root_color}
    for i, c in enumerate(leaf_colors, start=1):
        coloring[i] = c
    total = Fraction(0)
    for tree in _rooted_trees(tuple(range(1, n + 1)), 0):
        total += map_weight(tree, coloring, kernels)
    memo[key] = total
    return total


# ---------------------------------------------------------------------------
# crowns


@lru_cache(maxsize=None)
def _crowns(domain: tuple[int, ...]) -> tuple[EnrichedMap, ...]:
    out = []
    n = len(domain)
    for base_size in range(1, n + 1):
        for base in combinations(domain, base_size):
            rest = tuple(v for v in domain if v not in base)
            anchor, others = base[0], base[1:]
            for arrangement in permutations(others):
                cycle = (anchor,) + arrangement
                f = {cycle[i]: cycle[(i + 1) % base_size] for i in range(base_size)}
                for attach in product(base, repeat=len(rest)):
                    full = dict(f)
                    full.update(zip(rest, attach))
                    fibers: dict[int, list[int]] = {}
                    for v in domain:
                        fibers.setdefault(full[v], []).append(v)
                    blocks = tuple(
                        (v, (tuple(fibers[v]),)) for v in domain if v in fibers
                    )
                    out.append(
                        EnrichedMap(
                            domain, (), tuple(full[v] for v in domain), blocks
                        )
                    )
    return tuple(out)


def enumerate_crowns(
    domain: Iterable[int], *, size_cap: int = MAX_ENUMERATION
) -> list[EnrichedMap]:
    """All crowns on ``domain``: a base cycle with vertices hanging off it.

    Every vertex maps into the base, the base is a single cycle, and each
    base vertex's fiber forms one block. Distinct successor functions count
    separately, so a base of size m contributes (m-1)! cyclic arrangements.
    """
    dom = tuple(sorted(set(domain)))
    if not dom:
        raise ValueError("crowns need a non-empty vertex set")
    _check_cap(len(dom), size_cap)
    return list(_crowns(dom))


# ---------------------------------------------------------------------------
# coefficient oracles used to cross-check the series side


def exp_coefficient_via_maps(
    q_tuple: Sequence[str],
    picked: Iterable[int],
    kernels: "KernelFamily",
    *,
    size_cap: int = MAX_ENUMERATION,
) -> Fraction:
    """Coefficient of the pinned exponential, summed over enriched maps.

    ``picked`` selects positions I of ``q_tuple`` (1-based). The value is
    the sum of weights over all enriched maps with domain I and the other
    positions as sinks, colored by ``q_tuple``. For empty I the value is
    one (the exponential's constant term).
    """
    n = len(q_tuple)
    chosen = tuple(sorted(set(picked)))
    if any(i < 1 or i > n for i in chosen):
        raise ValueError("picked positions must lie in 1..n")
    if not chosen:
        return Fraction(1)
    _check_cap(n, size_cap)
    sinks = tuple(i for i in range(1, n + 1) if i not in chosen)
    coloring = {i: q_tuple[i - 1] for i in range(1, n + 1)}
    total = Fraction(0)
    for m in _enriched_maps(chosen, sinks):
        total += map_weight(m, coloring, kernels)
    return total


def det_coefficient_via_crowns(
    q_tuple: Sequence[str],
    kernels: "KernelFamily",
    *,
    size_cap: int = MAX_ENUMERATION,
) -> Fraction:
    """Determinant coefficient as a signed sum over assemblies of crowns.

    Partitions the positions 1..k into groups, places a crown on each group,
    and weights an assembly of s crowns by (-1)**s.
    """
    k = len(q_tuple)
    if k < 1:
        raise ValueError("need at least one pinned color")
    _check_cap(k, size_cap)
    coloring = {i: q_tuple[i - 1] for i in range(1, k + 1)}
    total = Fraction(0)
    for partition in set_partitions_of(range(1, k + 1)):
        term = Fraction(1)
        for group in partition:
            group_sum = Fraction(0)
            for crown in _crowns(group):
                group_sum += map_weight(crown, coloring, kernels)
            term *= group_sum
            if not term:
                break
        total += term * (-1) ** len(partition)
    return total


def forest_coefficient(
    q_tuple: Sequence[str],
    roots: Iterable[int],
    kernels: "KernelFamily",
    *,
    size_cap: int = MAX_ENUMERATION,
) -> Fraction:
    """Sum over forests of rooted trees with the given root positions.

    ``roots`` selects positions L of ``q_tuple`` (1-based). The remaining
    positions are distributed over the roots in every possible way (empty
    shares allowed) and each root contributes a tree coefficient; an empty
    share contributes the factor one.
    """
    n = len(q_tuple)
    root_positions = tuple(sorted(set(roots)))
    if any(i < 1 or i > n for i in root_positions):
        raise ValueError("root positions must lie in 1..n")
    rest = tuple(i for i in range(1, n + 1) if i not in root_positions)
    if not root_positions:
        return Fraction(1) if not rest else Fraction(0)
    total = Fraction(0)
    for assignment in product(range(len(root_positions)), repeat=len(rest)):
        shares: dict[int, list[int]] = {}
        for pos, owner in zip(rest, assignment):
            shares.setdefault(owner, []).append(pos)
        term = Fraction(1)
        for idx, root in enumerate(root_positions):
            members = shares.get(idx, [])
            term *= tree_coefficient(
                len(members),
                q_tuple[root - 1],
                tuple(q_tuple[p - 1] for p in members),
                kernels,
                size_cap=size_cap,
            )
            if not term:
                break
        total += term
    return total
