import pytest

from coinv.algebra.abelian import (
    FinAbGroup,
    GroupError,
    element_arithmetic,
    generates,
    pair_gcds,
    predicted_torsion,
    subgroup_closure,
)


def test_trivial_factors_are_dropped():
    G = FinAbGroup([2, 1, 4])
    assert G.moduli == (2, 4)
    assert G.order == 8
    assert FinAbGroup([]).is_trivial()
    assert FinAbGroup.parse("1").is_trivial()


@pytest.mark.parametrize("moduli", [[0], [-3], [2, True]])
def test_invalid_moduli(moduli):
    with pytest.raises(GroupError):
        FinAbGroup(moduli)


def test_parse_group_literal():
    G = FinAbGroup.parse("6, 4")
    assert G.moduli == (6, 4)
    assert G.literal() == "6,4"
    with pytest.raises(GroupError):
        FinAbGroup.parse("2,x")


def test_element_arithmetic(z2z4):
    x = z2z4.element([1, 0])
    y = z2z4.element([1, 1])
    assert element_arithmetic("mul", x, y) == z2z4.element([0, 1])
    assert element_arithmetic("inv", y) == z2z4.element([1, 3])
    assert element_arithmetic("pow", z2z4.generator(2), 4).is_identity()
    assert element_arithmetic("pow", y, -1) == y.inverse()


def test_element_arithmetic_errors(z2z4):
    other = FinAbGroup([3])
    with pytest.raises(GroupError):
        element_arithmetic("mul", z2z4.generator(1), other.generator(1))
    with pytest.raises(GroupError):
        element_arithmetic("div", z2z4.generator(1), z2z4.generator(2))
    with pytest.raises(GroupError):
        element_arithmetic("pow", z2z4.generator(1), z2z4.generator(2))


def test_canonical_enumeration_is_a_bijection():
    G = FinAbGroup([2, 3, 4])
    elements = G.elements()
    assert len(elements) == 24
    assert [G.index(x) for x in elements] == list(range(24))
    assert elements[0].is_identity()
    assert elements[1].exponents == (0, 0, 1)
    assert G.at(5).exponents == (0, 1, 1)


def test_element_order_and_literal(z2z4):
    x = z2z4.parse_element("(1,2)")
    assert x.order() == 2
    assert z2z4.parse_element("(0,1)").order() == 4
    assert z2z4.parse_element("e").is_identity()
    assert str(z2z4.element([1, 3])) == "p1p2^3"
    assert z2z4.element([1, 3]).literal() == "(1,3)"


def test_generates():
    G = FinAbGroup([2, 2])
    p1, p2 = G.generators()
    assert generates([p1, p2], G)
    assert not generates([p1 * p2], G)
    assert not generates([], G)
    Z6 = FinAbGroup([6])
    p = Z6.generator(1)
    assert generates([p ** 2, p ** 3], Z6)
    assert not generates([p ** 2, p ** 4], Z6)
    assert generates([], FinAbGroup([]))


def test_subgroup_closure_size():
    G = FinAbGroup([4, 6])
    assert len(subgroup_closure([G.element([2, 0]), G.element([0, 3])], G)) == 4


def test_pair_gcds():
    assert pair_gcds(FinAbGroup([6, 4, 9])) == {(1, 2): 2, (1, 3): 3, (2, 3): 1}


@pytest.mark.parametrize(
    "moduli, expected",
    [
        ([2, 2], [2]),
        ([12], []),
        ([2, 2, 2], [2, 2, 2]),
        ([2, 4], [2]),
        ([4, 6], [2]),
        ([6, 6], [6]),
        ([3, 3, 3], [3, 3, 3]),
        ([2, 3], []),
        ([5], []),
        ([6, 10, 15], [30]),
        ([2, 4, 8], [2, 2, 4]),
        ([], []),
    ],
)
def test_predicted_torsion(moduli, expected):
    assert predicted_torsion(FinAbGroup(moduli)) == expected


@pytest.mark.parametrize("moduli", [[], [12], [2, 3], [4, 6], [3, 5, 7], [2, 2, 3]])
def test_cyclic_groups_have_no_predicted_torsion(moduli):
    G = FinAbGroup(moduli)
    assert G.is_cyclic() == (predicted_torsion(G) == [])
