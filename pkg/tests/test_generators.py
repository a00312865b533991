import pytest
from pydantic import ValidationError

from coinv.algebra.abelian import FinAbGroup
from coinv.services.bv_service import DiagramError, nondegeneracy_check, validate_diagram
from coinv.services.generator_service import (
    RotationSpec,
    convergent_denominators,
    octagonal_pair,
    rotation_diagram,
    rotation_labels,
)


def long_heights(d):
    return [h["a"] for h in validate_diagram(d).heights]


def test_convergent_denominators():
    assert convergent_denominators([2, 2, 2, 2], 5) == [1, 2, 5, 12, 29]
    assert convergent_denominators([1, 3, 2], 4) == [1, 1, 4, 9]
    assert convergent_denominators([], 1) == [1]


def test_octagonal_heights_follow_convergents():
    dX, dY = octagonal_pair(5)
    assert long_heights(dX) == [1, 2, 5, 12, 29]
    assert long_heights(dY) == long_heights(dX)
    assert validate_diagram(dX).heights[4]["b"] == 12


def test_rotation_heights():
    G = FinAbGroup([2, 2])
    spec = RotationSpec(cf_digits=[1, 3, 2], levels=4)
    d = rotation_diagram(spec, rotation_labels(G)[0])
    assert long_heights(d) == [1, 1, 4, 9]
    assert d.tower(2, "a").traversal == ("b",)
    assert d.tower(4, "a").traversal == ("a", "a", "b")


def test_octagonal_is_nondegenerate():
    for d in octagonal_pair(6):
        assert nondegeneracy_check(d)[1]


@pytest.mark.parametrize("moduli", [[], [5], [2, 6], [3, 3]])
def test_rotation_labels_generate(moduli):
    G = FinAbGroup(moduli)
    spec = RotationSpec(cf_digits=[3, 1, 2], levels=4)
    for labels in rotation_labels(G):
        assert nondegeneracy_check(rotation_diagram(spec, labels))[1]


def test_rotation_labels_rank_limit():
    with pytest.raises(DiagramError):
        rotation_labels(FinAbGroup([2, 2, 2]))


def test_rotation_spec_validation():
    with pytest.raises(ValidationError):
        RotationSpec(cf_digits=[2], levels=3)
    with pytest.raises(ValidationError):
        RotationSpec(cf_digits=[0, 2], levels=3)
    assert RotationSpec().levels == 1


def test_rotation_diagram_label_errors(z2z2, z2z4):
    spec = RotationSpec(cf_digits=[2], levels=2)
    with pytest.raises(DiagramError):
        rotation_diagram(spec, [z2z2.generator(1)])
    with pytest.raises(DiagramError):
        rotation_diagram(spec, [z2z2.generator(1), z2z4.generator(1)])
