"""Core series algebra: constructors, operations, and algebraic laws."""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import POOL, measure_compose_oracle, product_oracle, series_from
from lagrange_forest import (
    ColorSet,
    ColorSetMismatch,
    DuplicateKey,
    FamilySeries,
    KeyTooLarge,
    NonzeroConstantTerm,
    OrderMismatch,
    TooManyPins,
    TruncatedSeries,
    UnknownColor,
    add,
    all_keys,
    coefficient_at,
    compose_family,
    compose_measure,
    compose_univariate,
    constant_series,
    exponential,
    indicator_series,
    integrate,
    make_series,
    multiply,
    multiply_many,
    radon_lift,
    rename_colors,
    restrict,
    scale,
    variational_derivative,
    zero_series,
)

A = ColorSet(("a",))
AB = ColorSet(("a", "b"))


def truncate(k: TruncatedSeries, order: int) -> TruncatedSeries:
    return TruncatedSeries(
        k.colors, order, {key: v for key, v in k.table.items() if len(key) <= order}
    )


# ---------------------------------------------------------------------------
# color sets and constructors


def test_color_set_invariants():
    assert AB.d == 2
    assert "a" in AB and "c" not in AB
    with pytest.raises(ValueError):
        ColorSet(())
    with pytest.raises(ValueError):
        ColorSet(("a", "a"))
    with pytest.raises(ValueError):
        ColorSet(("a", ""))


def test_make_series_zero():
    k = make_series(A, 2, [])
    assert k.coefficient(()) == 0
    assert k.coefficient(("a",)) == 0
    assert k.coefficient(("a", "a")) == 0


def test_make_series_single_variable():
    k = make_series(A, 2, [(("a",), 1)])
    assert k.coefficient(("a",)) == 1
    assert k.f0 == 0


def test_make_series_canonicalizes_keys():
    k = make_series(AB, 2, [(("b", "a"), "1/2")])
    assert ("a", "b") in k.table
    assert k.coefficient(("b", "a")) == Fraction(1, 2)
    assert k.coefficient(("a", "b")) == Fraction(1, 2)


def test_make_series_errors():
    with pytest.raises(DuplicateKey):
        make_series(AB, 2, [(("a", "b"), 1), (("b", "a"), 2)])
    with pytest.raises(UnknownColor):
        make_series(AB, 2, [(("c",), 1)])
    with pytest.raises(KeyTooLarge):
        make_series(AB, 2, [(("a", "a", "a"), 1)])


def test_zero_coefficients_are_stripped():
    k = make_series(AB, 2, [(("a",), 0), (("b",), 1)])
    assert ("a",) not in k.table
    assert k.coefficient(("a",)) == 0


# ---------------------------------------------------------------------------
# linear structure


def test_add_identity_and_inverse():
    k = make_series(AB, 3, [(("a",), 2), (("a", "b"), "1/3")])
    assert add(k, zero_series(AB, 3)) == k
    assert add(k, scale(k, -1)) == zero_series(AB, 3)


def test_add_values():
    k = make_series(A, 2, [(("a",), 1)])
    g = make_series(A, 2, [(("a",), "1/2")])
    assert add(k, g).coefficient(("a",)) == Fraction(3, 2)


def test_add_mismatch_errors():
    with pytest.raises(OrderMismatch):
        add(zero_series(A, 2), zero_series(A, 3))
    with pytest.raises(ColorSetMismatch):
        add(zero_series(A, 2), zero_series(AB, 2))


# ---------------------------------------------------------------------------
# products


def test_multiply_constant_one_is_identity():
    g = make_series(AB, 3, [((), 4), (("a",), 1), (("a", "b", "b"), "-2/7")])
    assert multiply(constant_series(AB, 3, 1), g) == g


def test_multiply_first_order_formula():
    k = make_series(A, 2, [((), 2), (("a",), 3)])
    g = make_series(A, 2, [((), 5), (("a",), 7)])
    # (KG)_1(x) = K_0 G_1(x) + K_1(x) G_0
    assert multiply(k, g).coefficient(("a",)) == 2 * 7 + 3 * 5


def test_multiply_square_of_single_variable():
    z = make_series(A, 2, [(("a",), 1)])
    # subset-sum oracle: two singleton subsets of {1,2} contribute 1 each
    assert product_oracle(z, z, ("a", "a")) == 2
    assert multiply(z, z).coefficient(("a", "a")) == 2


def test_multiply_matches_subset_sum_oracle_everywhere():
    k = make_series(AB, 3, [((), 1), (("a",), 2), (("a", "b"), "1/2"), (("b", "b", "b"), -1)])
    g = make_series(AB, 3, [((), "1/3"), (("b",), 5), (("a", "a"), 3)])
    kg = multiply(k, g)
    for key in all_keys(AB, 3):
        assert kg.coefficient(key) == product_oracle(k, g, key)


def test_multiply_many_single_and_constant():
    k = make_series(AB, 2, [(("a",), 1), (("b", "b"), 2)])
    assert multiply_many([k]) == k
    one = constant_series(AB, 2, 1)
    assert multiply_many([one, one, one]) == one


def test_multiply_many_three_single_variables():
    z = make_series(A, 3, [(("a",), 1)])
    # ordered partitions of three positions into three singletons: 3! = 6
    assert multiply_many([z, z, z]).coefficient(("a", "a", "a")) == 6


def test_multiply_many_equals_folded_multiply():
    k = make_series(AB, 3, [((), 1), (("a",), -1), (("a", "b"), 2)])
    g = make_series(AB, 3, [(("b",), "1/2"), (("a", "a"), 1)])
    h = make_series(AB, 3, [((), 2), (("b", "b"), 3)])
    folded = multiply(multiply(k, g), h)
    assert multiply_many([k, g, h]) == folded


def test_multiply_many_empty_input():
    from lagrange_forest import EmptyInput

    with pytest.raises(EmptyInput):
        multiply_many([])


# ---------------------------------------------------------------------------
# exponential and univariate composition


def test_exponential_of_zero():
    assert exponential(zero_series(AB, 3)) == constant_series(AB, 3, 1)


def test_exponential_second_order_formula():
    k = make_series(AB, 2, [(("a",), 2), (("b",), 3), (("a", "b"), 5)])
    e = exponential(k)
    # the two partitions of a pair: one block, or two singletons
    assert e.coefficient(("a", "b")) == 5 + 2 * 3


def test_exponential_of_single_variable():
    z = make_series(A, 5, [(("a",), 1)])
    e = exponential(z)
    # only the all-singletons partition survives, so every coefficient is 1
    for n in range(6):
        assert e.coefficient(("a",) * n) == 1


def test_exponential_requires_zero_constant():
    with pytest.raises(NonzeroConstantTerm):
        exponential(constant_series(A, 2, 1))


def test_exponential_homomorphism_seeded():
    from lagrange_forest import SuiteConfig, random_series

    for seed in range(3):
        cfg = SuiteConfig(seed=seed, colors=2, order=4, trials=1)
        k = random_series(cfg, "homo-k")
        g = random_series(cfg, "homo-g")
        k = TruncatedSeries(k.colors, 4, {key: v for key, v in k.table.items() if key})
        g = TruncatedSeries(g.colors, 4, {key: v for key, v in g.table.items() if key})
        assert exponential(add(k, g)) == multiply(exponential(k), exponential(g))


def test_compose_univariate_identity_and_constant():
    k = make_series(AB, 3, [(("a",), 2), (("a", "b"), -1)])
    assert compose_univariate([0, 1], k) == k
    assert compose_univariate([1], k) == constant_series(AB, 3, 1)


def test_compose_univariate_exp_matches_exponential():
    from lagrange_forest import SuiteConfig, random_series

    for seed in range(4):
        cfg = SuiteConfig(seed=seed, colors=2, order=4, trials=1)
        k = random_series(cfg, "compexp")
        k = TruncatedSeries(k.colors, 4, {key: v for key, v in k.table.items() if key})
        ones = [1] * (k.order + 1)
        assert compose_univariate(ones, k) == exponential(k)


def test_compose_univariate_requires_zero_constant():
    with pytest.raises(NonzeroConstantTerm):
        compose_univariate([0, 1], constant_series(A, 2, 5))


# ---------------------------------------------------------------------------
# variational derivative and coefficient extraction


def test_derivative_of_constant_is_zero():
    assert variational_derivative(constant_series(AB, 3, 7), ("a",)) == zero_series(AB, 2)


def test_derivative_of_measure_indicator():
    z_on_b = indicator_series(AB, 2, ("a", "b"))
    d = variational_derivative(z_on_b, ("a",))
    assert d == constant_series(AB, 1, 1)


def test_derivative_order_zero_term_is_pinned_coefficient():
    k = make_series(AB, 3, [(("a", "a", "b"), "5/3")])
    assert variational_derivative(k, ("a", "b", "a")).f0 == Fraction(5, 3)


def test_derivative_leibniz_rule_seeded():
    from lagrange_forest import SuiteConfig, random_series

    for seed in range(3):
        cfg = SuiteConfig(seed=seed, colors=2, order=4, trials=1)
        k = random_series(cfg, "leib-k")
        g = random_series(cfg, "leib-g")
        for pin in ("a", "b"):
            left = variational_derivative(multiply(k, g), (pin,))
            right = add(
                multiply(variational_derivative(k, (pin,)), truncate(g, 3)),
                multiply(truncate(k, 3), variational_derivative(g, (pin,))),
            )
            assert left == right


def test_too_many_pins():
    with pytest.raises(TooManyPins):
        variational_derivative(zero_series(A, 2), ("a", "a", "a"))


def test_coefficient_at_basics():
    k = make_series(AB, 3, [((), "2/3"), (("a", "b", "b"), 4)])
    assert coefficient_at(k, ()) == Fraction(2, 3)
    assert coefficient_at(k, ("b", "a", "b")) == 4
    with pytest.raises(KeyTooLarge):
        coefficient_at(k, ("a",) * 4)


@settings(max_examples=40, deadline=None)
@given(st.permutations(["a", "b", "b", "a"]))
def test_coefficient_permutation_invariance(perm):
    k = make_series(AB, 4, [(("a", "a", "b", "b"), "7/5")])
    assert k.coefficient(tuple(perm)) == Fraction(7, 5)


# ---------------------------------------------------------------------------
# families, integration, measures


def family_from(colors, order, tables):
    return FamilySeries(
        colors, order, {q: series_from(colors, order, t) for q, t in tables.items()}
    )


def test_integrate_constant_family():
    fam = FamilySeries.constant(AB, 3, 1)
    result = integrate(fam)
    assert result.coefficient(("a",)) == 1
    assert result.coefficient(("b",)) == 1
    assert result.coefficient(("a", "b")) == 0
    assert result.f0 == 0


def test_integrate_zero_family():
    fam = FamilySeries.constant(AB, 3, 0)
    assert integrate(fam) == zero_series(AB, 3)


def test_integrate_single_variable_family():
    fam = family_from(A, 2, {"a": {("a",): 1}})
    # two choices of the integrated position
    assert integrate(fam).coefficient(("a", "a")) == 2


def test_radon_lift_of_constant_family_is_base_measure():
    lifted = radon_lift(FamilySeries.constant(AB, 2, 1))
    assert lifted.members["a"] == make_series(AB, 2, [(("a",), 1)])
    assert lifted.members["b"] == make_series(AB, 2, [(("b",), 1)])


def test_radon_lift_of_zero_family():
    lifted = radon_lift(FamilySeries.constant(AB, 2, 0))
    assert lifted.members["a"] == zero_series(AB, 2)
    assert lifted.members["b"] == zero_series(AB, 2)


def test_radon_lift_evaluation_matches_integrate():
    from lagrange_forest import SuiteConfig, random_series

    for seed in range(3):
        cfg = SuiteConfig(seed=seed, colors=2, order=4, trials=1)
        fam = FamilySeries(
            AB,
            4,
            {"a": random_series(cfg, "rad-a"), "b": random_series(cfg, "rad-b")},
        )
        assert radon_lift(fam).evaluate() == integrate(fam)


def test_measure_evaluate_on_subsets():
    lifted = radon_lift(FamilySeries.constant(AB, 2, 1))
    assert lifted.evaluate(("a",)) == lifted.members["a"]
    assert lifted.evaluate(("a", "b")) == add(lifted.members["a"], lifted.members["b"])


# ---------------------------------------------------------------------------
# compositions


def test_compose_family_with_unit_family_is_identity():
    g = make_series(AB, 3, [((), 2), (("a",), 1), (("a", "b", "b"), "-3/4")])
    assert compose_family(g, FamilySeries.constant(AB, 3, 1)) == g


def test_compose_family_with_full_indicator_is_integrate():
    from lagrange_forest import SuiteConfig, random_series

    cfg = SuiteConfig(seed=9, colors=2, order=3, trials=1)
    fam = FamilySeries(
        AB, 3, {"a": random_series(cfg, "cf-a"), "b": random_series(cfg, "cf-b")}
    )
    g = indicator_series(AB, 3, ("a", "b"))
    assert compose_family(g, fam) == integrate(fam)


def test_compose_family_pure_second_order():
    g = make_series(AB, 3, [(("a", "b"), 5)])
    composed = compose_family(g, FamilySeries.constant(AB, 3, 1))
    assert composed.coefficient(("a", "b")) == 5
    assert composed.coefficient(("a", "a")) == 0


def test_compose_measure_with_unit_density_returns_substituted_measure():
    from lagrange_forest import SuiteConfig, random_series

    cfg = SuiteConfig(seed=4, colors=2, order=3, trials=1)
    fam = FamilySeries(
        AB, 3, {"a": random_series(cfg, "cm-a"), "b": random_series(cfg, "cm-b")}
    )
    base = radon_lift(FamilySeries.constant(AB, 3, 1))
    assert compose_measure(base, fam) == radon_lift(fam)


def test_compose_measure_with_unit_argument_is_identity():
    from lagrange_forest import SuiteConfig, random_series

    cfg = SuiteConfig(seed=5, colors=2, order=3, trials=1)
    gamma = radon_lift(
        FamilySeries(
            AB, 3, {"a": random_series(cfg, "cmg-a"), "b": random_series(cfg, "cmg-b")}
        )
    )
    assert compose_measure(gamma, FamilySeries.constant(AB, 3, 1)) == gamma


def test_compose_measure_matches_definition_oracle():
    from lagrange_forest import SuiteConfig, random_series

    for seed in range(3):
        cfg = SuiteConfig(seed=seed, colors=2, order=3, trials=1)
        gamma = radon_lift(
            FamilySeries(
                AB,
                3,
                {"a": random_series(cfg, "do-ga"), "b": random_series(cfg, "do-gb")},
            )
        )
        fam = FamilySeries(
            AB, 3, {"a": random_series(cfg, "do-fa"), "b": random_series(cfg, "do-fb")}
        )
        composed = compose_measure(gamma, fam)
        for q in AB:
            for key in all_keys(AB, 3):
                assert composed.members[q].coefficient(key) == measure_compose_oracle(
                    gamma, fam, q, key
                )


def test_compose_measure_requires_density():
    from lagrange_forest import MeasureSeries

    bare = MeasureSeries(AB, 2, {"a": zero_series(AB, 2), "b": zero_series(AB, 2)})
    with pytest.raises(ValueError):
        compose_measure(bare, FamilySeries.constant(AB, 2, 1))


# ---------------------------------------------------------------------------
# restriction and relabelling


def test_restrict():
    k = make_series(AB, 2, [((), 3), (("a",), 1), (("b",), 2), (("a", "b"), 4)])
    assert restrict(k, ("a", "b")) == k
    only_f0 = restrict(k, ())
    assert only_f0 == constant_series(AB, 2, 3)
    on_a = restrict(k, ("a",))
    assert on_a.coefficient(("a",)) == 1
    assert on_a.coefficient(("b",)) == 0
    assert on_a.coefficient(("a", "b")) == 0
    with pytest.raises(UnknownColor):
        restrict(k, ("c",))


def test_relabelling_invariance():
    mapping = {"a": "x", "b": "y"}
    k = make_series(AB, 3, [(("a",), 2), (("a", "b"), "1/2"), (("b", "b", "b"), -1)])
    g = make_series(AB, 3, [((), 1), (("b",), 3)])
    assert rename_colors(multiply(k, g), mapping) == multiply(
        rename_colors(k, mapping), rename_colors(g, mapping)
    )
    assert rename_colors(exponential(k), mapping) == exponential(rename_colors(k, mapping))


def test_multiply_laws_at_full_scale():
    from lagrange_forest import SuiteConfig, random_series

    cfg = SuiteConfig(seed=77, colors=3, order=5, trials=1)
    k = random_series(cfg, "law-k")
    g = random_series(cfg, "law-g")
    h = random_series(cfg, "law-h")
    assert multiply(k, g) == multiply(g, k)
    assert multiply(multiply(k, g), h) == multiply(k, multiply(g, h))


def test_kernel_family_constructor_invariants():
    from lagrange_forest import make_kernel_family

    with pytest.raises(NonzeroConstantTerm):
        make_kernel_family(AB, 2, [("a", (), 1)])
    with pytest.raises(DuplicateKey):
        make_kernel_family(AB, 2, [("a", ("a", "b"), 1), ("a", ("b", "a"), 2)])
    with pytest.raises(UnknownColor):
        make_kernel_family(AB, 2, [("c", ("a",), 1)])
    with pytest.raises(KeyTooLarge):
        make_kernel_family(AB, 2, [("a", ("a",) * 3, 1)])
    with pytest.raises(ValueError):
        make_kernel_family(AB, 0, [])


# ---------------------------------------------------------------------------
# degenerate shapes


def test_order_zero_series_are_legal():
    k = constant_series(AB, 0, 5)
    g = constant_series(AB, 0, "1/5")
    assert multiply(k, g) == constant_series(AB, 0, 1)
    assert exponential(zero_series(AB, 0)) == constant_series(AB, 0, 1)


# ---------------------------------------------------------------------------
# hypothesis property checks

COLOR_SETS = (A, AB)


@st.composite
def series_triple(draw):
    colors = draw(st.sampled_from(COLOR_SETS))
    order = draw(st.integers(min_value=0, max_value=3))
    keys = list(all_keys(colors, order))
    out = []
    for _ in range(3):
        values = draw(
            st.lists(st.sampled_from(POOL), min_size=len(keys), max_size=len(keys))
        )
        out.append(TruncatedSeries(colors, order, dict(zip(keys, values))))
    return out


@settings(max_examples=40, deadline=None)
@given(series_triple())
def test_multiply_commutative_associative(triple):
    k, g, h = triple
    assert multiply(k, g) == multiply(g, k)
    assert multiply(multiply(k, g), h) == multiply(k, multiply(g, h))


@settings(max_examples=25, deadline=None)
@given(series_triple())
def test_multiply_many_is_fold(triple):
    k, g, h = triple
    assert multiply_many([k, g, h]) == multiply(multiply(k, g), h)


@settings(max_examples=25, deadline=None)
@given(series_triple())
def test_exponential_homomorphism(triple):
    k, g, _ = triple
    k = TruncatedSeries(k.colors, k.order, {key: v for key, v in k.table.items() if key})
    g = TruncatedSeries(g.colors, g.order, {key: v for key, v in g.table.items() if key})
    assert exponential(add(k, g)) == multiply(exponential(k), exponential(g))


@settings(max_examples=25, deadline=None)
@given(series_triple())
def test_leibniz_property(triple):
    k, g, _ = triple
    if k.order == 0:
        return
    pin = k.colors.names[0]
    left = variational_derivative(multiply(k, g), (pin,))
    right = add(
        multiply(variational_derivative(k, (pin,)), truncate(g, g.order - 1)),
        multiply(truncate(k, k.order - 1), variational_derivative(g, (pin,))),
    )
    assert left == right
