"""
Morphism Service

Transfer homomorphisms pi: M(A,B) -> M(C,D) between presentations over the
same group, their containment checks and the induced maps on torsion.
"""

import math
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from loguru import logger

from coinv.algebra.group_ring import RingElt, solve_coboundary
from coinv.algebra.zlinalg import IntMatrix, cokernel_invariants
from coinv.config import settings
from coinv.services.presentation_service import (
    CocycleData,
    Presentation,
    build_presentation,
    standard_data,
    torsion_class_invariant,
)


class TransferError(Exception):
    """Transfer map construction or verification error"""
    pass


@dataclass
class TransferMap:
    """
    pi: M(source) -> M(target), stored by rows: row k is the image of source basis vector k.
    """

    source: Presentation
    target: Presentation
    matrix: IntMatrix

    def apply(self, v: Sequence[int]) -> List[int]:
        """Image of an element of M(source) (row vector times matrix)"""
        if len(v) != self.matrix.nrows:
            raise TransferError(f"Vector of length {len(v)} for source of rank {self.matrix.nrows}")
        out = [0] * self.matrix.ncols
        for k, x in enumerate(v):
            if x:
                row = self.matrix.data[k]
                for j, y in enumerate(row):
                    if y:
                        out[j] += x * y
        return out

    def check_containment(self) -> None:
        """
        Every source relation row maps into the integer span of the target relations.

        Raises:
            TransferError: Naming the first relation row whose image escapes
        """
        quotient = self.target.quotient
        for k, row in enumerate(self.source.relation_rows):
            if not quotient.contains(self.apply(row)):
                side = "A" if k < self.source.group.order * len(self.source.basis.A) else "B"
                raise TransferError(f"Image of relation row {k} ({side}-side) is not in the target relations")
        logger.debug(f"Containment verified for {len(self.source.relation_rows)} relation rows")


@dataclass
class TorsionIsoReport:
    """Induced map on torsion subgroups"""

    is_iso: bool
    source_factors: List[int] = field(default_factory=list)
    target_factors: List[int] = field(default_factory=list)
    surjective: bool = True

    def as_dict(self) -> Dict[str, object]:
        return {
            "is_iso": self.is_iso,
            "source_factors": self.source_factors,
            "target_factors": self.target_factors,
        }


# ==================== CONSTRUCTION ====================

def transfer_from_coefficients(
    source: CocycleData,
    target: CocycleData,
    s: Mapping[Tuple[str, str], RingElt],
    t: Mapping[Tuple[str, str], RingElt],
    check: Optional[bool] = None,
) -> TransferMap:
    """
    pi(g (x) a (x) b) = sum_{c,d} g s(a,c) t(b,d) (x) c (x) d.

    Args:
        source: Data (A, B, mu)
        target: Data (C, D, nu) over the same group
        s: Coefficients keyed (a, c); missing keys are zero
        t: Coefficients keyed (b, d); missing keys are zero
        check: Verify the containment invariants (defaults to settings.CHECK_TRANSFER_CONTAINMENT)

    Raises:
        TransferError: On group mismatch or a failed containment
    """
    if source.group != target.group:
        raise TransferError(f"Group mismatch: {source.group} and {target.group}")
    G = source.group
    src = build_presentation(source)
    tgt = build_presentation(target)
    zero = RingElt.zero(G)

    products: Dict[Tuple[int, int], List[Tuple[int, RingElt]]] = {}
    for ai, a in enumerate(source.A):
        for bi, b in enumerate(source.B):
            terms = []
            for ci, c in enumerate(target.A):
                sa = s.get((a, c), zero)
                if sa.is_zero():
                    continue
                for di, d in enumerate(target.B):
                    tb = t.get((b, d), zero)
                    if tb.is_zero():
                        continue
                    terms.append((tgt.basis.index(0, ci, di), sa * tb))
            products[(ai, bi)] = terms

    table = G.mul_table()
    nA, nB = len(target.A), len(target.B)
    rows: List[List[int]] = []
    for pos in range(src.basis.dim):
        g, ai, bi = src.basis.triple(pos)
        row = [0] * tgt.basis.dim
        for offset, value in products[(ai, bi)]:
            for h, c in value.coeffs.items():
                row[table[g][h] * nA * nB + offset] += int(c)
        rows.append(row)
    transfer = TransferMap(src, tgt, IntMatrix(rows, tgt.basis.dim))

    if check is None:
        check = settings.CHECK_TRANSFER_CONTAINMENT
    if check:
        transfer.check_containment()
    return transfer


def build_transfer(source: CocycleData, target: CocycleData, check: Optional[bool] = None) -> TransferMap:
    """
    Transfer with s(., c) = solve_coboundary(mu(A), nu(c)) and t(., d) = solve_coboundary(mu(B), nu(d)).

    Raises:
        TransferError: On group mismatch or a failed containment
    """
    if source.group != target.group:
        raise TransferError(f"Group mismatch: {source.group} and {target.group}")
    s: Dict[Tuple[str, str], RingElt] = {}
    for c in target.A:
        solution = solve_coboundary(source.values_a(), target.mu_a[c])
        for ai, value in solution.items():
            s[(source.A[ai], c)] = value
    t: Dict[Tuple[str, str], RingElt] = {}
    for d in target.B:
        solution = solve_coboundary(source.values_b(), target.mu_b[d])
        for bi, value in solution.items():
            t[(source.B[bi], d)] = value
    logger.debug(f"Transfer {source} -> {target}")
    return transfer_from_coefficients(source, target, s, t, check)


def compose_transfers(first: TransferMap, second: TransferMap) -> TransferMap:
    """second after first (matrix product), checked for containment"""
    if first.target.source != second.source.source:
        raise TransferError("Transfers do not compose: intermediate data differ")
    composed = TransferMap(first.source, second.target, first.matrix @ second.matrix)
    composed.check_containment()
    return composed


# ==================== TORSION ====================

def induced_torsion_iso_check(transfer: TransferMap) -> TorsionIsoReport:
    """
    Decide whether pi induces an isomorphism T(N(source)) -> T(N(target)).

    Source torsion generators are mapped into the target's torsion coordinates;
    the induced map is onto iff the images together with the target's torsion
    relations span everything, and bijective iff additionally both orders agree.

    Raises:
        TransferError: If a torsion class maps to a non-torsion class
    """
    src_q = transfer.source.quotient
    tgt_q = transfer.target.quotient
    src_factors = [src_q.factors[k] for k in src_q.torsion_indices]
    tgt_factors = [tgt_q.factors[k] for k in tgt_q.torsion_indices]
    if not tgt_factors:
        return TorsionIsoReport(not src_factors, src_factors, tgt_factors, True)

    images = []
    for gen in src_q.torsion_generators():
        image = transfer.apply(gen)
        if not tgt_q.is_torsion(image):
            raise TransferError("A torsion class maps to a non-torsion class")
        images.append(tgt_q.torsion_coordinates(image))
    width = len(tgt_factors)
    relations = images + [
        [d if i == j else 0 for j in range(width)] for i, d in enumerate(tgt_factors)
    ]
    cokernel = cokernel_invariants(relations, width)
    surjective = cokernel.free_rank == 0 and cokernel.torsion_order == 1
    is_iso = surjective and math.prod(src_factors) == math.prod(tgt_factors)
    if not is_iso:
        logger.warning(f"Induced torsion map is not an isomorphism: {src_factors} -> {tgt_factors}")
    return TorsionIsoReport(is_iso, src_factors, tgt_factors, surjective)


def round_trip_fixes_torsion(forward: TransferMap, backward: TransferMap) -> bool:
    """True iff backward(forward(x)) = x in N(source) for every source torsion generator"""
    src_q = forward.source.quotient
    for gen in src_q.torsion_generators():
        back = backward.apply(forward.apply(gen))
        diff = [x - y for x, y in zip(back, gen)]
        if not src_q.contains(diff):
            return False
    return True


def classify_general(data: CocycleData, r: Sequence[int]) -> Dict[Tuple[int, int], int]:
    """
    Classifier residues of a torsion class of N(A,B) for arbitrary data.

    The class is transferred to standard data first; the residues are those of the image.

    Raises:
        PresentationError: If r is not torsion
    """
    standard = standard_data(data.group)
    if data == standard:
        return torsion_class_invariant(data.group, r)
    transfer = build_transfer(data, standard)
    return torsion_class_invariant(data.group, transfer.apply(r))


# ==================== SERVICE ====================

class MorphismService:
    """Transfers to and from standard data"""

    def standard_round_trip(self, data: CocycleData) -> Dict[str, object]:
        """
        Transfer data -> standard -> data and report the induced torsion maps.

        Returns:
            Dictionary containing:
            - forward: iso report of data -> standard
            - backward: iso report of standard -> data
            - round_trip: True if the composite fixes every torsion class
        """
        standard = standard_data(data.group)
        forward = build_transfer(data, standard)
        backward = build_transfer(standard, data)
        forward_report = induced_torsion_iso_check(forward)
        backward_report = induced_torsion_iso_check(backward)
        round_trip = round_trip_fixes_torsion(forward, backward)
        logger.debug(
            f"Round trip over {data.group}: forward iso {forward_report.is_iso}, "
            f"backward iso {backward_report.is_iso}, identity on torsion {round_trip}"
        )
        return {
            "forward": forward_report.as_dict(),
            "backward": backward_report.as_dict(),
            "round_trip": round_trip,
        }


morphism_service = MorphismService()
