import random

import pytest

from coinv.algebra.abelian import FinAbGroup
from coinv.algebra.zlinalg import IntMatrix
from coinv.services.morphism_service import (
    TransferError,
    TransferMap,
    build_transfer,
    classify_general,
    compose_transfers,
    induced_torsion_iso_check,
    morphism_service,
    round_trip_fixes_torsion,
)
from coinv.services.presentation_service import (
    CocycleData,
    build_presentation,
    presentation_service,
    standard_data,
    surjectivity_witness,
)
from coinv.services.random_service import random_service
from coinv.utils import parse_fixture


@pytest.fixture
def z2z4_data(data_dir):
    return parse_fixture((data_dir / "z2z4_random.fixture").read_text())


def test_standard_to_standard_is_identity(z2z2):
    data = standard_data(z2z2)
    transfer = build_transfer(data, data)
    assert transfer.matrix == IntMatrix.identity(build_presentation(data).basis.dim)


def test_transfer_shape_and_containment(z2z4_data):
    standard = standard_data(z2z4_data.group)
    transfer = build_transfer(z2z4_data, standard)
    assert transfer.matrix.shape == (8 * 3 * 2, 8 * 2 * 2)
    transfer.check_containment()


@pytest.mark.parametrize("moduli", [[2, 2], [2, 4], [4], [3, 3]])
def test_transfers_induce_torsion_isos(moduli, rng):
    G = FinAbGroup(moduli)
    standard = standard_data(G)
    for _ in range(3):
        data = random_service.random_cocycle_data(G, rng)
        forward = build_transfer(data, standard)
        backward = build_transfer(standard, data)
        assert induced_torsion_iso_check(forward).is_iso
        assert induced_torsion_iso_check(backward).is_iso
        assert round_trip_fixes_torsion(forward, backward)


def test_standard_round_trip_report(z2z4_data):
    report = morphism_service.standard_round_trip(z2z4_data)
    assert report["forward"] == {"is_iso": True, "source_factors": [2], "target_factors": [2]}
    assert report["backward"]["is_iso"]
    assert report["round_trip"] is True


def test_zero_map_is_not_an_iso(z2z2):
    pres = build_presentation(standard_data(z2z2))
    zero = TransferMap(pres, pres, IntMatrix.zeros(pres.basis.dim, pres.basis.dim))
    zero.check_containment()
    report = induced_torsion_iso_check(zero)
    assert not report.is_iso
    assert not report.surjective


def test_classify_general_on_transferred_witness(z2z4_data):
    G = z2z4_data.group
    backward = build_transfer(standard_data(G), z2z4_data)
    image = backward.apply(surjectivity_witness(G, 1, 2))
    assert classify_general(z2z4_data, image) == {(1, 2): 1}
    assert classify_general(z2z4_data, [2 * x for x in image]) == {(1, 2): 0}


def test_classify_general_on_standard_data(z2z2):
    assert classify_general(standard_data(z2z2), surjectivity_witness(z2z2, 1, 2)) == {(1, 2): 1}


def test_compose_transfers(z2z4_data):
    standard = standard_data(z2z4_data.group)
    forward = build_transfer(z2z4_data, standard)
    backward = build_transfer(standard, z2z4_data)
    composed = compose_transfers(forward, backward)
    assert composed.matrix.shape == (48, 48)
    for gen in composed.source.quotient.torsion_generators():
        assert composed.apply(gen) == backward.apply(forward.apply(gen))
    with pytest.raises(TransferError):
        compose_transfers(forward, forward)


def test_group_mismatch(z2z2, z2z4):
    with pytest.raises(TransferError, match="Group mismatch"):
        build_transfer(standard_data(z2z2), standard_data(z2z4))


def test_escaping_relation_is_reported():
    G = FinAbGroup([2])
    p = G.generator(1)
    pres = build_presentation(CocycleData(G, ["q"], ["q"], {"q": p}, {"q": p}))
    bad = TransferMap(pres, pres, IntMatrix([[1, 0], [0, 0]], 2))
    with pytest.raises(TransferError, match="relation row 0"):
        bad.check_containment()
    with pytest.raises(TransferError):
        bad.apply([1, 0, 0])


@pytest.mark.slow
@pytest.mark.parametrize(
    "moduli",
    [[2, 2], [2, 4], [4, 6], [6, 6], [2, 2, 2], [3, 3, 3], [2, 3], [5], [12]],
)
def test_random_data_torsion_and_transfer_many_instances(moduli):
    G = FinAbGroup(moduli)
    standard = standard_data(G)
    sample = random.Random(sum(moduli) * 1000 + len(moduli))
    for _ in range(50):
        data = random_service.random_cocycle_data(G, sample)
        report = presentation_service.torsion_report(data)
        assert report["match"], report
        assert induced_torsion_iso_check(build_transfer(data, standard)).is_iso
