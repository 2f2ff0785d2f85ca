"""Inversion of colored power series of the form z times exp(-A).

Two independent routes to the inverse live here. The tree route solves the
fixed-point equation whose solution generates weighted rooted trees, and
lifts it to the inverse measure series. The determinant route expresses
coefficients of any composed observable through a truncated Fredholm
determinant; a finite-matrix reduction of that determinant is provided as
well. The cancellation between the two routes can be checked exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from itertools import combinations, permutations, product
from math import factorial
from typing import Iterable, Sequence

from .errors import EmptySubset, KeyTooLarge
from .reports import IdentityReport, report_fail, report_pass
from .series import (
    ColorSet,
    FamilySeries,
    KernelFamily,
    Key,
    MeasureSeries,
    TruncatedSeries,
    _compose_table,
    add,
    all_keys,
    compose_family,
    compose_measure,
    exponential,
    indicator_series,
    make_kernel_family,
    make_series,
    multiply,
    radon_lift,
    scale,
    variational_derivative,
)


@dataclass(eq=False)
class InversionProblem:
    """A kernel family bundled with per-problem caches for derived series."""

    kernels: KernelFamily
    _memo: dict = field(default_factory=dict, repr=False)

    @property
    def colors(self) -> ColorSet:
        return self.kernels.colors

    @property
    def order(self) -> int:
        return self.kernels.order


@dataclass(frozen=True)
class TreeSolution:
    """Per-color tree generating functions and the inverse measure series.

    ``tree_factors`` solves the fixed-point equation order by order; its
    coefficient at a key equals the enumeration-side tree coefficient.
    ``inverse`` is the radon lift of ``tree_factors``.
    """

    tree_factors: FamilySeries
    inverse: MeasureSeries


@dataclass(frozen=True)
class DeterminantBundle:
    """Derivative kernel, Fredholm series, and optional pinned reductions."""

    derivative_kernel: dict[tuple[str, str], TruncatedSeries]
    fredholm: TruncatedSeries
    pinned: dict[tuple[str, ...], TruncatedSeries]


def _truncate(k: TruncatedSeries, new_order: int) -> TruncatedSeries:
    if new_order >= k.order:
        return k
    table = {key: v for key, v in k.table.items() if len(key) <= new_order}
    return TruncatedSeries(k.colors, new_order, table)


def forward_measure(problem: InversionProblem) -> MeasureSeries:
    """The measure series being inverted: base measure times exp(-kernel)."""
    cached = problem._memo.get("forward")
    if cached is None:
        colors, order = problem.colors, problem.order
        members = {
            q: exponential(scale(problem.kernels.series_at(q), -1))
            for q in colors.names
        }
        cached = radon_lift(FamilySeries(colors, order, members))
        problem._memo["forward"] = cached
    return cached


def solve_tree_fixed_point(problem: InversionProblem) -> TreeSolution:
    """Solve T_q = exp(kernel at q, substituted with T times the base measure).

    Iterates from the constant-one family; after step s the members are
    exact to order s, because a coefficient of size s on the left only
    consumes coefficients of size below s on the right. The number of steps
    therefore equals the truncation order.
    """
    cached = problem._memo.get("tree_solution")
    if cached is not None:
        return cached
    colors, order = problem.colors, problem.order
    current = FamilySeries.constant(colors, order, 1)
    for step in range(1, order + 1):
        members = {}
        for q in colors.names:
            exponent = TruncatedSeries(
                colors,
                order,
                _compose_table(problem.kernels.series_at(q), current, step),
            )
            members[q] = exponential(exponent)
        current = FamilySeries(colors, order, members)
    solution = TreeSolution(tree_factors=current, inverse=radon_lift(current))
    problem._memo["tree_solution"] = solution
    return solution


def _parity(sigma: Sequence[int]) -> int:
    inversions = sum(
        1 for i in range(len(sigma)) for j in range(i + 1, len(sigma)) if sigma[i] > sigma[j]
    )
    return -1 if inversions % 2 else 1


def _det_minor(kernels: KernelFamily, pinned: Key, rest: Key) -> Fraction:
    """Determinant of the derivative-kernel matrix at pinned colors.

    Expands the r x r determinant by permutations; each factor is a
    derivative-kernel series whose coefficients are kernel values with one
    extra pinned argument, and the remaining colors are distributed over the
    factors in all possible ways.
    """
    r = len(pinned)
    total = Fraction(0)
    for sigma in permutations(range(r)):
        sign = _parity(sigma)
        for assignment in product(range(r), repeat=len(rest)):
            shares: list[list[str]] = [[] for _ in range(r)]
            for color, owner in zip(rest, assignment):
                shares[owner].append(color)
            term = Fraction(sign)
            for i in range(r):
                value = kernels.value(pinned[sigma[i]], (pinned[i], *shares[i]))
                if not value:
                    term = Fraction(0)
                    break
                term *= value
            total += term
    return total


def fredholm_determinant(problem: InversionProblem) -> TruncatedSeries:
    """Truncated Fredholm determinant of the derivative-kernel operator.

    The coefficient at a key sums, over non-empty position subsets P with
    sign (-1)**len(P), the determinant of the derivative-kernel matrix
    pinned at the P-colors and fed the remaining colors. The constant term
    is one; subsets larger than the order cannot occur.
    """
    cached = problem._memo.get("fredholm")
    if cached is not None:
        return cached
    colors, order = problem.colors, problem.order
    kernels = problem.kernels
    table: dict[Key, Fraction] = {(): Fraction(1)}
    for key in all_keys(colors, order):
        n = len(key)
        if n == 0:
            continue
        positions = range(n)
        total = Fraction(0)
        for r in range(1, n + 1):
            sign = -1 if r % 2 else 1
            for chosen in combinations(positions, r):
                pinned = tuple(key[p] for p in chosen)
                rest = tuple(key[p] for p in positions if p not in chosen)
                total += sign * _det_minor(kernels, pinned, rest)
        if total:
            table[key] = total
    series = TruncatedSeries(colors, order, table)
    problem._memo["fredholm"] = series
    return series


def _derivative_kernel_series(
    problem: InversionProblem, pin: str, q: str, order: int
) -> TruncatedSeries:
    # coefficients of the kernel at q with one argument pinned, kept at full order
    table: dict[Key, Fraction] = {}
    for key, value in problem.kernels.tables.get(q, {}).items():
        if pin in key:
            remainder = list(key)
            remainder.remove(pin)
            table[tuple(remainder)] = value
    return TruncatedSeries(problem.colors, order, table)


def finite_matrix_determinant(
    problem: InversionProblem, subset: Iterable[str]
) -> TruncatedSeries:
    """Determinant of the finite matrix indexed by a set of colors Q.

    Entry (q, q') is the Kronecker delta minus the atom series at q times
    the derivative kernel pinned at q. Coefficients at tuples whose colors
    lie inside Q agree with the Fredholm determinant, and enlarging Q leaves
    them unchanged.
    """
    labels = tuple(dict.fromkeys(subset))
    if not labels:
        raise EmptySubset("the pinned color set must be non-empty")
    problem.colors.require(labels)
    colors, order = problem.colors, problem.order
    entries: dict[tuple[str, str], TruncatedSeries] = {}
    for q in labels:
        atom = indicator_series(colors, order, (q,))
        for qp in labels:
            term = scale(multiply(atom, _derivative_kernel_series(problem, qp, q, order)), -1)
            if q == qp:
                term = add(term, TruncatedSeries(colors, order, {(): Fraction(1)}))
            entries[(q, qp)] = term
    total = TruncatedSeries(colors, order, {})
    for sigma in permutations(range(len(labels))):
        prod_series = entries[(labels[0], labels[sigma[0]])]
        for i in range(1, len(labels)):
            prod_series = multiply(prod_series, entries[(labels[i], labels[sigma[i]])])
        total = add(total, scale(prod_series, _parity(sigma)))
    return total


def determinant_bundle(
    problem: InversionProblem, subsets: Iterable[Iterable[str]] = ()
) -> DeterminantBundle:
    """Bundle the derivative kernel, the Fredholm series, and pinned reductions."""
    derivative_kernel = {
        (qp, q): variational_derivative(problem.kernels.series_at(q), (qp,))
        for qp in problem.colors.names
        for q in problem.colors.names
    }
    pinned = {
        tuple(sorted(dict.fromkeys(sub))): finite_matrix_determinant(problem, sub)
        for sub in subsets
    }
    return DeterminantBundle(derivative_kernel, fredholm_determinant(problem), pinned)


def _pinned_exponential(
    problem: InversionProblem, q_tuple: Sequence[str], order: int
) -> TruncatedSeries:
    summed = reduce(
        add, (_truncate(problem.kernels.series_at(q), order) for q in q_tuple)
    )
    return exponential(summed)


def lagrange_good_coefficient(
    problem: InversionProblem, phi: TruncatedSeries, q_tuple: Sequence[str]
) -> Fraction:
    """Coefficient of the composed observable, via the determinant formula.

    Returns the coefficient at ``q_tuple`` of phi times the exponential of
    the kernels pinned at the tuple's colors times the Fredholm determinant.
    The exponential factor depends on the tuple and is rebuilt per query.
    """
    n = len(q_tuple)
    if n < 1:
        raise ValueError("the pinned tuple must be non-empty")
    if n > problem.order:
        raise KeyTooLarge(f"tuple of size {n} exceeds order {problem.order}")
    problem.colors.require(q_tuple)
    pinned_exp = _pinned_exponential(problem, q_tuple, n)
    det = _truncate(fredholm_determinant(problem), n)
    prod_series = multiply(multiply(_truncate(phi, n), pinned_exp), det)
    return prod_series.coefficient(q_tuple)


def magic_sum(problem: InversionProblem, q_tuple: Sequence[str]) -> Fraction:
    """The cancellation sum behind the determinant formula; must be zero.

    Splits the tuple's positions into a subset fed to the pinned exponential
    and a complement fed to the Fredholm determinant, and sums the products
    of the corresponding coefficients over all subsets.
    """
    n = len(q_tuple)
    if n < 1:
        raise ValueError("the pinned tuple must be non-empty")
    problem.colors.require(q_tuple)
    pinned_exp = _pinned_exponential(problem, q_tuple, n)
    det = _truncate(fredholm_determinant(problem), n)
    positions = range(n)
    total = Fraction(0)
    for size in range(n + 1):
        for chosen in combinations(positions, size):
            left = pinned_exp.coefficient(tuple(q_tuple[p] for p in chosen))
            if not left:
                continue
            right = det.coefficient(
                tuple(q_tuple[p] for p in positions if p not in chosen)
            )
            total += left * right
    return total


def inverse_via_determinant(
    problem: InversionProblem, subset: Iterable[str], q_tuple: Sequence[str]
) -> Fraction:
    """Coefficient of the inverse measure on a color subset, determinant route."""
    phi = indicator_series(problem.colors, problem.order, subset)
    return lagrange_good_coefficient(problem, phi, q_tuple)


def identity_measure(colors: ColorSet, order: int) -> MeasureSeries:
    """The base measure itself: density one at every color."""
    return radon_lift(FamilySeries.constant(colors, order, 1))


def round_trip_check(problem: InversionProblem) -> IdentityReport:
    """Both compositions of the forward and inverse series must be the identity."""
    solution = solve_tree_fixed_point(problem)
    forward = forward_measure(problem)
    identity = identity_measure(problem.colors, problem.order)
    sides = (
        ("forward-after-inverse", compose_measure(forward, solution.tree_factors)),
        ("inverse-after-forward", compose_measure(solution.inverse, forward.density)),
    )
    for side, composed in sides:
        for q in problem.colors.sorted_names:
            got_table = composed.members[q].table
            want_table = identity.members[q].table
            for key in all_keys(problem.colors, problem.order):
                got = got_table.get(key, Fraction(0))
                want = want_table.get(key, Fraction(0))
                if got != want:
                    return report_fail(
                        "round-trip", (q, *key), want, got, side=side
                    )
    return report_pass("round-trip")


# ---------------------------------------------------------------------------
# classical single-variable inversion
#
# Plain univariate arithmetic in the monomial convention, kept separate from
# the colored machinery on purpose: the three-way check below compares the
# colored tree route against two contour-integral style formulas evaluated
# with this independent code.


def _u_mul(a: Sequence[Fraction], b: Sequence[Fraction], order: int) -> list[Fraction]:
    out = [Fraction(0)] * (order + 1)
    for i, ai in enumerate(a[: order + 1]):
        if not ai:
            continue
        for j, bj in enumerate(b[: order + 1 - i]):
            out[i + j] += ai * bj
    return out


def _u_deriv(a: Sequence[Fraction]) -> list[Fraction]:
    return [Fraction(k) * a[k] for k in range(1, len(a))] or [Fraction(0)]


def _u_exp(a: Sequence[Fraction], order: int) -> list[Fraction]:
    if a[0]:
        raise ValueError("exponential needs a vanishing constant term")
    out = [Fraction(0)] * (order + 1)
    out[0] = Fraction(1)
    for n in range(1, order + 1):
        acc = Fraction(0)
        for k in range(1, n + 1):
            ak = a[k] if k < len(a) else Fraction(0)
            acc += k * ak * out[n - k]
        out[n] = acc / n
    return out


def _u_recip(a: Sequence[Fraction], order: int) -> list[Fraction]:
    if not a[0]:
        raise ValueError("reciprocal needs a non-zero constant term")
    out = [Fraction(0)] * (order + 1)
    out[0] = 1 / a[0]
    for n in range(1, order + 1):
        acc = Fraction(0)
        for k in range(1, n + 1):
            ak = a[k] if k < len(a) else Fraction(0)
            acc += ak * out[n - k]
        out[n] = -acc / a[0]
    return out


def _u_pow(a: Sequence[Fraction], exponent: int, order: int) -> list[Fraction]:
    out = [Fraction(0)] * (order + 1)
    out[0] = Fraction(1)
    for _ in range(exponent):
        out = _u_mul(out, a, order)
    return out


UNIVARIATE_COLOR = "x"


def univariate_problem(kernel_coeffs: Sequence) -> InversionProblem:
    """Single-color problem with kernel values taken from a coefficient list.

    ``kernel_coeffs[i]`` is the size-(i+1) kernel coefficient in the
    exponential convention.
    """
    colors = ColorSet((UNIVARIATE_COLOR,))
    order = len(kernel_coeffs)
    entries = [
        (UNIVARIATE_COLOR, (UNIVARIATE_COLOR,) * (i + 1), value)
        for i, value in enumerate(kernel_coeffs)
    ]
    return InversionProblem(make_kernel_family(colors, order, entries))


def univariate_lagrange_check(
    kernel_coeffs: Sequence, outer_coeffs: Sequence, order: int
) -> IdentityReport:
    """Three-way check of classical Lagrange inversion for one variable.

    The coefficient of the composed observable in the inverse variable is
    computed (a) through the colored tree solution, (b) as the order-n
    monomial coefficient of f(z) rho'(z) / (rho(z)/z)**(n+1), and (c) as
    1/n times the order-(n-1) coefficient of f'(z) / (rho(z)/z)**n, where
    rho(z) = z exp(-A(z)). All three must agree exactly for n = 1..order.

    ``kernel_coeffs`` and ``outer_coeffs`` use the exponential convention
    (entry m is m! times the monomial coefficient); ``outer_coeffs`` starts
    at the constant term.
    """
    if order < 1:
        raise ValueError("the check order must be at least one")
    kernel_coeffs = [Fraction(v) for v in kernel_coeffs]
    outer_coeffs = [Fraction(v) for v in outer_coeffs]
    # kernel sizes above the check order cannot influence checked coefficients
    kernel_padded = (
        kernel_coeffs + [Fraction(0)] * max(0, order - len(kernel_coeffs))
    )[:order]
    problem = univariate_problem(kernel_padded)
    colors = problem.colors
    x = UNIVARIATE_COLOR

    phi = make_series(
        colors,
        order,
        [((x,) * m, outer_coeffs[m]) for m in range(min(len(outer_coeffs), order + 1))],
    )
    solution = solve_tree_fixed_point(problem)
    composed = compose_family(phi, solution.tree_factors)

    # independent monomial-side data
    a_mono = [Fraction(0)] * (order + 2)
    for m, value in enumerate(kernel_padded, start=1):
        if m <= order + 1:
            a_mono[m] = value / factorial(m)
    f_mono = [Fraction(0)] * (order + 1)
    for m, value in enumerate(outer_coeffs):
        if m <= order:
            f_mono[m] = value / factorial(m)
    base = _u_exp([-v for v in a_mono], order + 1)  # rho(z)/z
    rho = [Fraction(0)] + base[: order + 1]
    rho_prime = _u_deriv(rho)
    f_prime = _u_deriv(f_mono)

    for n in range(1, order + 1):
        via_trees = composed.coefficient((x,) * n) / factorial(n)
        with_derivative = _u_mul(
            _u_mul(f_mono, rho_prime, n), _u_recip(_u_pow(base, n + 1, n), n), n
        )[n]
        without_derivative = (
            _u_mul(f_prime, _u_recip(_u_pow(base, n, n - 1), n - 1), n - 1)[n - 1]
            / n
        )
        if not (via_trees == with_derivative == without_derivative):
            return report_fail(
                "univariate-inversion",
                (str(n),),
                via_trees,
                f"{with_derivative} / {without_derivative}",
                n=n,
            )
    return report_pass("univariate-inversion", order=order)
