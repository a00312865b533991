"""
Built-in diagram generators

Rotation diagrams are built from continued-fraction digits with two towers per
level, "a" (long) and "b" (short):
- level 1: a and b, one cell each
- level 2: a = a^(d_1 - 1) b, b = a
- level n + 1: a = a^(d_n) b, b = a
so the long tower at level n has height q_{n-1}, the convergent denominator.

The octagonal pair is two copies of the rotation by sqrt(2) (digits 2, 2, 2, ...)
with Z_2 x Z_2 labels. Any labelling whose level-1 products generate the group
stays non-degenerate at every level, since each level transforms the pair of
tower products by a unimodular matrix; the shipped labels are one such choice.
"""

from typing import List, Sequence, Tuple

from loguru import logger
from pydantic import BaseModel, Field, PositiveInt, model_validator

from coinv.algebra.abelian import FinAbGroup, GroupElt
from coinv.services.bv_service import DiagramError, OrderedBVDiagram, Tower, validate_diagram

SQRT2_DIGIT = 2


class RotationSpec(BaseModel):
    """Continued-fraction digits d_1, d_2, ... and the number of levels"""

    cf_digits: List[PositiveInt] = Field(default_factory=list)
    levels: PositiveInt = 1

    @model_validator(mode="after")
    def enough_digits(self) -> "RotationSpec":
        if len(self.cf_digits) < self.levels - 1:
            raise ValueError(f"{self.levels} levels need {self.levels - 1} digits, got {len(self.cf_digits)}")
        return self


def convergent_denominators(digits: Sequence[int], count: int) -> List[int]:
    """q_0, q_1, ... with q_0 = 1, q_1 = d_1 and q_n = d_n q_{n-1} + q_{n-2}"""
    q = [1]
    prev = 0
    for d in digits[: max(count - 1, 0)]:
        q, prev = q + [d * q[-1] + prev], q[-1]
    return q[:count]


def rotation_diagram(spec: RotationSpec, labels: Sequence[GroupElt]) -> OrderedBVDiagram:
    """
    Two-tower diagram of a rotation.

    Args:
        spec: Digits and level count
        labels: Cell labels of the level-1 towers a and b

    Raises:
        DiagramError: If labels are not two elements of one group
    """
    if len(labels) != 2:
        raise DiagramError(f"Rotation diagrams need 2 level-1 labels, got {len(labels)}")
    if not all(isinstance(g, GroupElt) for g in labels) or labels[0].group != labels[1].group:
        raise DiagramError("Level-1 labels must be elements of one group")
    G = labels[0].group
    levels = [(Tower(name="a", cells=(labels[0],)), Tower(name="b", cells=(labels[1],)))]
    for n in range(1, spec.levels):
        digit = spec.cf_digits[n - 1]
        repeat = digit - 1 if n == 1 else digit
        levels.append((
            Tower(name="a", traversal=("a",) * repeat + ("b",)),
            Tower(name="b", traversal=("a",)),
        ))
    d = OrderedBVDiagram(G, tuple(levels))
    validate_diagram(d)
    logger.debug(f"Rotation diagram with digits {spec.cf_digits[: spec.levels - 1]} over {G}")
    return d


def octagonal_pair(levels: int) -> Tuple[OrderedBVDiagram, OrderedBVDiagram]:
    """The rotation-by-sqrt(2) pair over Z_2 x Z_2 with the shipped labels"""
    spec = RotationSpec(cf_digits=[SQRT2_DIGIT] * max(levels - 1, 0), levels=levels)
    G = FinAbGroup([2, 2])
    x_labels, y_labels = rotation_labels(G)
    return rotation_diagram(spec, x_labels), rotation_diagram(spec, y_labels)


def rotation_labels(G: FinAbGroup) -> Tuple[Tuple[GroupElt, GroupElt], Tuple[GroupElt, GroupElt]]:
    """
    Generating level-1 labels (a, b) for two rotation factors over G.

    Raises:
        DiagramError: If G has more than two cyclic factors
    """
    if G.rank > 2:
        raise DiagramError(f"Two-tower diagrams cannot carry generating labels over {G}")
    if G.rank == 2:
        p1, p2 = G.generators()
        return (p1, p2), (p2, p1 * p2)
    if G.rank == 1:
        p = G.generator(1)
        return (p, G.identity()), (G.identity(), p)
    e = G.identity()
    return (e, e), (e, e)
