import operator
from functools import reduce

import pytest

from coinv.algebra.abelian import FinAbGroup
from coinv.algebra.group_ring import RingElt
from coinv.services.bv_service import (
    DegenerateCocycleError,
    DiagramError,
    OrderedBVDiagram,
    Tower,
    bv_service,
    cocycle_products,
    connection_coefficients,
    dump_diagram,
    flatten_tower,
    load_diagram,
    nondegeneracy_check,
    skew_connecting_matrix,
    skew_stage,
    telescope,
    torsion_stabilization,
    validate_diagram,
    zsystem_coinvariants,
)
from coinv.services.generator_service import RotationSpec, octagonal_pair, rotation_diagram, rotation_labels
from coinv.services.morphism_service import induced_torsion_iso_check
from coinv.services.presentation_service import build_presentation
from coinv.services.random_service import random_service


@pytest.fixture
def z2() -> FinAbGroup:
    return FinAbGroup([2])


@pytest.fixture
def small(z2) -> OrderedBVDiagram:
    p, e = z2.generator(1), z2.identity()
    return OrderedBVDiagram(z2, (
        (Tower(name="a", cells=(p,)), Tower(name="b", cells=(e, p))),
        (Tower(name="c", traversal=("a", "b")), Tower(name="d", traversal=("b",))),
    ))


# ==================== STRUCTURE ====================

def test_heights_and_incidence(small):
    structure = validate_diagram(small)
    assert structure.heights == [{"a": 1, "b": 2}, {"c": 3, "d": 2}]
    assert structure.incidence[0].data == [[1, 0], [1, 1]]


def test_zsystem(small):
    assert zsystem_coinvariants(small) == {"ranks": [2, 2], "connecting": [[[1, 0], [1, 1]]]}


@pytest.mark.parametrize(
    "level_two, message",
    [
        ((Tower(name="c", traversal=("a", "x")),), "unknown"),
        ((Tower(name="c", traversal=("a",)),), "not used"),
        ((Tower(name="c", traversal=()),), "empty traversal"),
        ((Tower(name="c", traversal=("a", "b")), Tower(name="c", traversal=("b",))), "repeated"),
        ((), "no towers"),
    ],
)
def test_validation_errors(z2, level_two, message):
    p = z2.generator(1)
    d = OrderedBVDiagram(z2, (
        (Tower(name="a", cells=(p,)), Tower(name="b", cells=(p,))),
        level_two,
    ))
    with pytest.raises(DiagramError, match=message):
        validate_diagram(d)


def test_level_one_errors(z2, z2z2):
    with pytest.raises(DiagramError, match="no levels"):
        validate_diagram(OrderedBVDiagram(z2, ()))
    with pytest.raises(DiagramError, match="no cells"):
        validate_diagram(OrderedBVDiagram(z2, ((Tower(name="a"),),)))
    with pytest.raises(DiagramError, match="not in"):
        validate_diagram(OrderedBVDiagram(z2, ((Tower(name="a", cells=(z2z2.generator(1),)),),)))
    with pytest.raises(DiagramError):
        small_level = OrderedBVDiagram(z2, ((Tower(name="a", cells=(z2.identity(),)),),))
        small_level.level(2)


# ==================== PRODUCTS ====================

def test_products_and_partials(small, z2):
    p, e = z2.generator(1), z2.identity()
    products = cocycle_products(small)
    assert products.totals == [{"a": p, "b": p}, {"c": e, "d": p}]
    assert products.partials[0] == {"a": {1: e}, "b": {1: e, 2: e}}
    assert products.partials[1] == {"c": {1: e, 2: p}, "d": {1: e}}


def test_nondegeneracy(small, z2):
    assert nondegeneracy_check(small) == ([True, True], True)
    e = z2.identity()
    flat = OrderedBVDiagram(z2, ((Tower(name="a", cells=(e,)),),))
    assert nondegeneracy_check(flat) == ([False], False)


def test_connection_coefficients(small, z2):
    p = z2.generator(1)
    table = connection_coefficients(small, 1)
    assert table == {
        ("a", "c"): RingElt.one(z2),
        ("b", "c"): RingElt.monomial(p),
        ("b", "d"): RingElt.one(z2),
    }
    with pytest.raises(DiagramError):
        connection_coefficients(small, 2)


def assert_connection_identity(d):
    products = cocycle_products(d)
    G = d.group
    for n in range(1, d.depth):
        table = connection_coefficients(d, n, products)
        below = products.totals[n - 1]
        for t in d.level(n + 1):
            lhs = RingElt.zero(G)
            for (v, w), s in table.items():
                if w == t.name:
                    lhs = lhs + RingElt.e_minus(below[v].inverse()) * s
            assert lhs == RingElt.e_minus(products.totals[n][t.name].inverse())
            assert sum(s.augmentation() for (v, w), s in table.items() if w == t.name) == len(t.traversal)


def test_connection_identity_on_random_diagrams(z2z4, rng):
    for _ in range(20):
        assert_connection_identity(random_service.random_diagram(z2z4, rng, levels=4))


@pytest.mark.slow
def test_connection_identity_across_groups(rng):
    groups = [FinAbGroup(m) for m in ([2, 2], [2, 4], [4, 4], [2, 8], [16], [3, 5], [2, 2, 2, 2], [2, 6])]
    for k in range(100):
        G = groups[k % len(groups)]
        assert_connection_identity(random_service.random_diagram(G, rng, levels=rng.randint(2, 4)))


# ==================== TELESCOPING ====================

def test_flatten_tower(small, z2):
    p, e = z2.generator(1), z2.identity()
    assert flatten_tower(small, 2, "c") == [p, e, p]
    assert flatten_tower(small, 1, "b") == [e, p]


def test_telescope_identity_and_skip():
    dX, _ = octagonal_pair(4)
    assert telescope(dX, [1, 2, 3, 4]) == dX
    short = telescope(dX, [1, 3])
    assert short.depth == 2
    original = cocycle_products(dX)
    shortened = cocycle_products(short)
    assert shortened.totals[1] == original.totals[2]
    for v in short.names(2):
        assert flatten_tower(short, 2, v) == flatten_tower(dX, 3, v)


@pytest.mark.parametrize("levels", [[2, 3], [1, 1], [1, 5], []])
def test_telescope_rejects_bad_levels(levels):
    dX, _ = octagonal_pair(4)
    with pytest.raises(DiagramError):
        telescope(dX, levels)


def test_random_telescope_preserves_cells(z2z2, rng):
    for _ in range(5):
        d = random_service.random_diagram(z2z2, rng, levels=4)
        short = telescope(d, [1, 2, 4])
        for v in short.names(3):
            assert flatten_tower(short, 3, v) == flatten_tower(d, 4, v)


def ordered_product(G, cells):
    return reduce(operator.mul, cells, G.identity())


@pytest.mark.parametrize("moduli", [[2, 2], [4, 4], [2, 8], [3, 5], [16]])
def test_products_agree_with_flattened_towers(moduli, rng):
    G = FinAbGroup(moduli)
    for _ in range(25):
        d = random_service.random_diagram(G, rng, levels=4)
        structure = validate_diagram(d)
        products = cocycle_products(d)
        for n in range(1, d.depth + 1):
            for t in d.level(n):
                flat = flatten_tower(d, n, t.name)
                assert len(flat) == structure.heights[n - 1][t.name]
                assert products.totals[n - 1][t.name] == ordered_product(G, flat)
                for k, partial in products.partials[n - 1][t.name].items():
                    assert partial == ordered_product(G, flat[: k - 1])
        for n in range(1, d.depth):
            below, above = structure.heights[n - 1], structure.heights[n]
            rows = structure.incidence[n - 1].data
            for j, w in enumerate(d.names(n + 1)):
                assert above[w] == sum(row[j] * below[v] for v, row in zip(d.names(n), rows))
                assert above[w] >= max(below[v] for v in d.tower(n + 1, w).traversal)


# ==================== SKEW PRODUCT ====================

def test_octagonal_first_stage():
    dX, dY = octagonal_pair(2)
    data = skew_stage(dX, dY, 1)
    G = dX.group
    p1, p2 = G.generators()
    assert data.mu_a == {"a": p1, "b": p2}
    assert data.mu_b == {"a": p2, "b": p1 * p2}
    assert list(build_presentation(data).invariants.torsion_factors) == [2]


def test_degenerate_stage(z2):
    e = z2.identity()
    flat = OrderedBVDiagram(z2, ((Tower(name="a", cells=(e,)),),))
    with pytest.raises(DegenerateCocycleError):
        skew_stage(flat, flat, 1)
    report = bv_service.skew_report(flat, flat, 1)
    assert report["verdict"] == "DEGENERATE"
    assert report["stages"] == []


def test_stage_pair_errors(z2, z2z2):
    dX, dY = octagonal_pair(2)
    with pytest.raises(DiagramError, match="not present"):
        skew_stage(dX, dY, 3)
    other = OrderedBVDiagram(z2, ((Tower(name="a", cells=(z2.generator(1),)),),))
    with pytest.raises(DiagramError, match="Group mismatch"):
        skew_stage(dX, other, 1)


def test_connecting_map_is_torsion_iso():
    dX, dY = octagonal_pair(3)
    for n in (1, 2):
        transfer = skew_connecting_matrix(dX, dY, n)
        report = induced_torsion_iso_check(transfer)
        assert report.is_iso
        assert report.source_factors == report.target_factors == [2]


def test_octagonal_stabilization():
    dX, dY = octagonal_pair(4)
    report = torsion_stabilization(dX, dY, 4)
    assert report.all_match
    assert [s.torsion for s in report.stages] == [[2]] * 4
    assert [s.iso_to_next for s in report.stages] == [True, True, True, None]


@pytest.mark.parametrize("moduli, torsion", [([3], []), ([3, 3], [3]), ([2, 4], [2])])
def test_rotation_stabilization(moduli, torsion):
    G = FinAbGroup(moduli)
    spec = RotationSpec(cf_digits=[2, 1, 3], levels=3)
    x_labels, y_labels = rotation_labels(G)
    dX, dY = rotation_diagram(spec, x_labels), rotation_diagram(spec, y_labels)
    report = torsion_stabilization(dX, dY, 3)
    assert report.all_match
    assert all(s.torsion == torsion for s in report.stages)


@pytest.mark.slow
@pytest.mark.parametrize("moduli", [[2, 2], [3, 3]])
def test_random_pair_stabilization(moduli, rng):
    G = FinAbGroup(moduli)
    for _ in range(3):
        dX, dY = random_service.random_nondegenerate_pair(G, rng, levels=4)
        report = torsion_stabilization(dX, dY, 4)
        assert report.all_match


def test_skew_report():
    dX, dY = octagonal_pair(3)
    report = bv_service.skew_report(dX, dY, 3)
    assert report["verdict"] == "MATCH"
    assert report["predicted"] == [2]
    assert report["nondegenerate"] == {"x": [True] * 3, "y": [True] * 3}
    assert [s["torsion"] for s in report["stages"]] == [[2], [2], [2]]
    assert report["assumptions"]


# ==================== FILES ====================

def test_shipped_files_match_generator(data_dir):
    dX, dY = octagonal_pair(4)
    assert load_diagram(data_dir / "octagonal_x.bv") == dX
    assert load_diagram(str(data_dir / "octagonal_y.bv")) == dY


def test_dump_and_load(small):
    assert load_diagram(dump_diagram(small)) == small


@pytest.mark.parametrize(
    "text",
    [
        '{"group": [2], "levels": []}',
        '{"group": [2], "levels": [[{"name": "a", "cells": [[5]]}]]}',
        '{"group": [2], "levels": [[{"name": "a", "cells": [[1]], "traversal": ["a"]}]]}',
        '{"group": [2], "levels": [[{"name": "a", "traversal": ["a"]}]]}',
        '{"group": [1], "levels": [[{"name": "a", "cells": [[]]}]]}',
        '{"group": [2], "levels": [[{"name": "a", "cells": [[1]]}], [{"name": "b", "traversal": ["z"]}]]}',
        "{not json",
    ],
)
def test_bad_diagram_files(text):
    with pytest.raises(DiagramError):
        load_diagram(text)


def test_missing_diagram_file(tmp_path):
    with pytest.raises(DiagramError, match="Cannot read"):
        load_diagram(tmp_path / "missing.bv")
