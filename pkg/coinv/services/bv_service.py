"""
Bratteli-Vershik Service

Ordered Bratteli-Vershik diagrams with level-1 cocycle labels:
- validation, heights and incidence matrices
- tower products, non-degeneracy and connection coefficients
- stage presentations of the skew product and their connecting transfers
- torsion stabilization across stages
- diagram files, tower flattening and telescoping
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

from loguru import logger
from pydantic import ValidationError

from coinv.algebra.abelian import FinAbGroup, GroupElt, GroupError, generates, predicted_torsion
from coinv.algebra.group_ring import RingElt
from coinv.algebra.zlinalg import IntMatrix
from coinv.config import settings
from coinv.schemas import DiagramFile, TowerSpec
from coinv.services.morphism_service import TransferMap, induced_torsion_iso_check, transfer_from_coefficients
from coinv.services.presentation_service import CocycleData, build_presentation

UNVERIFIABLE_ASSUMPTIONS = [
    "roof sets shrink to a single point",
    "the partitions generate the topology",
]


class DiagramError(Exception):
    """Malformed or inconsistent diagram"""
    pass


class DegenerateCocycleError(DiagramError):
    """Tower products fail to generate the group at some level"""
    pass


# ==================== DOMAIN TYPES ====================

@dataclass(frozen=True)
class Tower:
    """Level-1 towers carry cells; higher towers carry a traversal of lower tower names"""

    name: str
    cells: Tuple[GroupElt, ...] = ()
    traversal: Tuple[str, ...] = ()


@dataclass(frozen=True)
class OrderedBVDiagram:
    group: FinAbGroup
    levels: Tuple[Tuple[Tower, ...], ...]

    @property
    def depth(self) -> int:
        return len(self.levels)

    def level(self, n: int) -> Tuple[Tower, ...]:
        """Towers of level n (1-based)"""
        if not 1 <= n <= self.depth:
            raise DiagramError(f"Level {n} out of range 1..{self.depth}")
        return self.levels[n - 1]

    def names(self, n: int) -> List[str]:
        return [t.name for t in self.level(n)]

    def tower(self, n: int, name: str) -> Tower:
        for t in self.level(n):
            if t.name == name:
                return t
        raise DiagramError(f"No tower {name!r} at level {n}")


@dataclass
class DiagramStructure:
    """heights[n-1][v] = h(v); incidence[n-1] = A_n with rows V_n and columns V_{n+1}"""

    heights: List[Dict[str, int]]
    incidence: List[IntMatrix]


@dataclass
class CocycleProducts:
    """
    totals[n-1][v] = tower product of v.
    partials[n-1][v][k] = product over the first k-1 cells of v, keyed by entry position k:
    every cell at level 1, every segment start at higher levels.
    """

    totals: List[Dict[str, GroupElt]]
    partials: List[Dict[str, Dict[int, GroupElt]]]


@dataclass
class StageReport:
    level: int
    free_rank: int
    torsion: List[int]
    predicted: List[int]
    iso_to_next: Optional[bool] = None

    @property
    def match(self) -> bool:
        return self.torsion == self.predicted


@dataclass
class StabilizationReport:
    group: str
    stages: List[StageReport] = field(default_factory=list)

    @property
    def all_match(self) -> bool:
        return all(s.match for s in self.stages) and all(
            s.iso_to_next is not False for s in self.stages
        )


# ==================== VALIDATION AND PRODUCTS ====================

def validate_diagram(d: OrderedBVDiagram) -> DiagramStructure:
    """
    Check the structure of d and derive heights and incidence matrices.

    Raises:
        DiagramError: On an empty level, repeated names, a level-1 tower without cells,
            an empty traversal, a dangling reference or an unused tower
    """
    if not d.levels:
        raise DiagramError("Diagram has no levels")
    heights: List[Dict[str, int]] = []
    incidence: List[IntMatrix] = []
    for n, towers in enumerate(d.levels, start=1):
        if not towers:
            raise DiagramError(f"Level {n} has no towers")
        names = [t.name for t in towers]
        if len(set(names)) != len(names):
            raise DiagramError(f"Level {n} has repeated tower names")
        if n == 1:
            level_heights = {}
            for t in towers:
                if t.traversal:
                    raise DiagramError(f"Level-1 tower {t.name!r} has a traversal")
                if not t.cells:
                    raise DiagramError(f"Level-1 tower {t.name!r} has no cells")
                for g in t.cells:
                    if not isinstance(g, GroupElt) or g.group != d.group:
                        raise DiagramError(f"Cell label {g!r} of {t.name!r} is not in {d.group}")
                level_heights[t.name] = len(t.cells)
            heights.append(level_heights)
            continue

        below = heights[-1]
        position = {v: i for i, v in enumerate(below)}
        rows = [[0] * len(towers) for _ in below]
        level_heights = {}
        for j, t in enumerate(towers):
            if t.cells:
                raise DiagramError(f"Level-{n} tower {t.name!r} carries cells")
            if not t.traversal:
                raise DiagramError(f"Level-{n} tower {t.name!r} has an empty traversal")
            for v in t.traversal:
                if v not in position:
                    raise DiagramError(f"Tower {t.name!r} at level {n} references unknown {v!r}")
                rows[position[v]][j] += 1
            level_heights[t.name] = sum(below[v] for v in t.traversal)
        for v, row in zip(below, rows):
            if not any(row):
                raise DiagramError(f"Level-{n - 1} tower {v!r} is not used at level {n}")
        heights.append(level_heights)
        incidence.append(IntMatrix(rows, len(towers)))
    logger.debug(f"Validated diagram over {d.group}: heights {[list(h.values()) for h in heights]}")
    return DiagramStructure(heights, incidence)


def cocycle_products(d: OrderedBVDiagram) -> CocycleProducts:
    """Tower products and entry-position partial products at every level"""
    G = d.group
    validate_diagram(d)
    totals: List[Dict[str, GroupElt]] = []
    partials: List[Dict[str, Dict[int, GroupElt]]] = []

    level_totals, level_partials = {}, {}
    for t in d.level(1):
        c = G.identity()
        marks = {}
        for k, g in enumerate(t.cells, start=1):
            marks[k] = c
            c = c * g
        level_totals[t.name] = c
        level_partials[t.name] = marks
    totals.append(level_totals)
    partials.append(level_partials)

    heights = {t.name: len(t.cells) for t in d.level(1)}
    for n in range(2, d.depth + 1):
        below = totals[-1]
        level_totals, level_partials, level_heights = {}, {}, {}
        for t in d.level(n):
            c = G.identity()
            k = 1
            marks = {}
            for v in t.traversal:
                marks[k] = c
                c = c * below[v]
                k += heights[v]
            level_totals[t.name] = c
            level_partials[t.name] = marks
            level_heights[t.name] = k - 1
        totals.append(level_totals)
        partials.append(level_partials)
        heights = level_heights
    return CocycleProducts(totals, partials)


def nondegeneracy_check(d: OrderedBVDiagram, products: Optional[CocycleProducts] = None) -> Tuple[List[bool], bool]:
    """Per-level flags (tower products generate G) and their conjunction"""
    products = products or cocycle_products(d)
    flags = [generates(level.values(), d.group) for level in products.totals]
    return flags, all(flags)


def connection_coefficients(
    d: OrderedBVDiagram,
    n: int,
    products: Optional[CocycleProducts] = None,
) -> Dict[Tuple[str, str], RingElt]:
    """
    s(v, v') = sum of partial(v', k)^{-1} over the segments k of v' occupied by v.

    Keys (v, v') with v in V_n and v' in V_{n+1}; pairs with no segment are omitted.

    Raises:
        DiagramError: If level n + 1 does not exist or the connection identity fails
    """
    if not 1 <= n < d.depth:
        raise DiagramError(f"Connection needs levels {n} and {n + 1} of a {d.depth}-level diagram")
    G = d.group
    products = products or cocycle_products(d)
    below = products.totals[n - 1]
    coeffs: Dict[Tuple[str, str], Dict[int, int]] = {}
    for t in d.level(n + 1):
        c = G.identity()
        for v in t.traversal:
            key = (v, t.name)
            idx = c.inverse().index
            slot = coeffs.setdefault(key, {})
            slot[idx] = slot.get(idx, 0) + 1
            c = c * below[v]
    table = {key: RingElt(G, value) for key, value in coeffs.items()}

    if settings.CHECK_CONNECT_IDENTITY:
        for t in d.level(n + 1):
            lhs = RingElt.zero(G)
            for v in set(t.traversal):
                lhs = lhs + RingElt.e_minus(below[v].inverse()) * table[(v, t.name)]
            rhs = RingElt.e_minus(products.totals[n][t.name].inverse())
            if lhs != rhs:
                raise DiagramError(f"Connection identity fails for tower {t.name!r} at level {n + 1}")
    return table


# ==================== SKEW PRODUCT STAGES ====================

def _check_pair(dX: OrderedBVDiagram, dY: OrderedBVDiagram, n: int) -> None:
    if dX.group != dY.group:
        raise DiagramError(f"Group mismatch: {dX.group} and {dY.group}")
    if not 1 <= n <= min(dX.depth, dY.depth):
        raise DiagramError(f"Level {n} is not present in both diagrams")


def skew_stage(
    dX: OrderedBVDiagram,
    dY: OrderedBVDiagram,
    n: int,
    products: Optional[Tuple[CocycleProducts, CocycleProducts]] = None,
) -> CocycleData:
    """
    Stage data (V_n, W_n, mu) with mu(v) = xi(v)^{-1} and mu(w) = eta(w)^{-1}.

    Raises:
        DegenerateCocycleError: If either family of tower products fails to generate G at level n
    """
    _check_pair(dX, dY, n)
    px, py = products or (cocycle_products(dX), cocycle_products(dY))
    xi, eta = px.totals[n - 1], py.totals[n - 1]
    for label, values in (("X", xi), ("Y", eta)):
        if not generates(values.values(), dX.group):
            raise DegenerateCocycleError(f"Tower products of {label} do not generate {dX.group} at level {n}")
    return CocycleData(
        dX.group,
        dX.names(n),
        dY.names(n),
        {v: g.inverse() for v, g in xi.items()},
        {w: g.inverse() for w, g in eta.items()},
    )


def skew_connecting_matrix(
    dX: OrderedBVDiagram,
    dY: OrderedBVDiagram,
    n: int,
    products: Optional[Tuple[CocycleProducts, CocycleProducts]] = None,
) -> TransferMap:
    """Transfer from stage n to stage n + 1 built from both connection tables"""
    _check_pair(dX, dY, n + 1)
    px, py = products or (cocycle_products(dX), cocycle_products(dY))
    source = skew_stage(dX, dY, n, (px, py))
    target = skew_stage(dX, dY, n + 1, (px, py))
    s = connection_coefficients(dX, n, px)
    t = connection_coefficients(dY, n, py)
    return transfer_from_coefficients(source, target, s, t)


def zsystem_coinvariants(d: OrderedBVDiagram) -> Dict[str, object]:
    """
    Stage ranks |V_n| and the connecting maps alpha_n(v) = sum_{v'} A_n(v, v') v'.

    Returns:
        Dictionary containing:
        - ranks: [|V_1|, |V_2|, ...]
        - connecting: A_n as nested lists (row v maps to the listed combination of V_{n+1})
    """
    structure = validate_diagram(d)
    return {
        "ranks": [len(level) for level in d.levels],
        "connecting": [A.data for A in structure.incidence],
    }


def torsion_stabilization(dX: OrderedBVDiagram, dY: OrderedBVDiagram, max_level: int) -> StabilizationReport:
    """
    Torsion of N(V_n, W_n) for n = 1..max_level and whether each connecting map is a torsion isomorphism.

    Raises:
        DegenerateCocycleError: If some stage is degenerate
        DiagramError: If a level is missing
    """
    _check_pair(dX, dY, max_level)
    products = (cocycle_products(dX), cocycle_products(dY))
    predicted = predicted_torsion(dX.group)
    report = StabilizationReport(group=dX.group.literal())
    for n in range(1, max_level + 1):
        invariants = build_presentation(skew_stage(dX, dY, n, products)).invariants
        stage = StageReport(
            level=n,
            free_rank=invariants.free_rank,
            torsion=list(invariants.torsion_factors),
            predicted=predicted,
        )
        if n < max_level:
            stage.iso_to_next = induced_torsion_iso_check(skew_connecting_matrix(dX, dY, n, products)).is_iso
        logger.info(
            f"Stage {n}: free rank {stage.free_rank}, torsion {stage.torsion}, iso to next {stage.iso_to_next}"
        )
        report.stages.append(stage)
    return report


# ==================== TELESCOPING ====================

def flatten_tower(d: OrderedBVDiagram, n: int, v: str) -> List[GroupElt]:
    """Level-1 cell labels of tower v at level n, in traversal order"""
    t = d.tower(n, v)
    if n == 1:
        return list(t.cells)
    cells: List[GroupElt] = []
    for w in t.traversal:
        cells.extend(flatten_tower(d, n - 1, w))
    return cells


def _expand(d: OrderedBVDiagram, n: int, v: str, m: int) -> List[str]:
    """Names of the level-m towers traversed by tower v at level n"""
    if n == m:
        return [v]
    names: List[str] = []
    for w in d.tower(n, v).traversal:
        names.extend(_expand(d, n - 1, w, m))
    return names


def telescope(d: OrderedBVDiagram, levels: Sequence[int]) -> OrderedBVDiagram:
    """
    Keep only the listed levels, composing traversals in between.

    Raises:
        DiagramError: Unless levels starts at 1 and increases strictly within range
    """
    levels = list(levels)
    if not levels or levels[0] != 1 or any(b <= a for a, b in zip(levels, levels[1:])) or levels[-1] > d.depth:
        raise DiagramError(f"Cannot telescope to levels {levels} of a {d.depth}-level diagram")
    kept = [d.level(1)]
    for prev, n in zip(levels, levels[1:]):
        kept.append(tuple(
            Tower(name=t.name, traversal=tuple(_expand(d, n, t.name, prev)))
            for t in d.level(n)
        ))
    return OrderedBVDiagram(d.group, tuple(kept))


# ==================== FILES ====================

def diagram_from_file(spec: DiagramFile) -> OrderedBVDiagram:
    """
    Raises:
        DiagramError: On a bad modulus, an exponent vector of wrong length or out of range,
            or a tower body at the wrong level
    """
    try:
        G = FinAbGroup(spec.group)
    except GroupError as e:
        raise DiagramError(str(e))
    if len(G.moduli) != len(spec.group):
        raise DiagramError("Group moduli must all be at least 2")
    levels = []
    for n, towers in enumerate(spec.levels, start=1):
        level = []
        for t in towers:
            if n == 1:
                if t.cells is None:
                    raise DiagramError(f"Level-1 tower {t.name!r} needs 'cells'")
                cells = []
                for exps in t.cells:
                    if len(exps) != G.rank or any(not 0 <= k < m for k, m in zip(exps, G.moduli)):
                        raise DiagramError(f"Bad exponent vector {exps} in tower {t.name!r}")
                    cells.append(G.element(exps))
                level.append(Tower(name=t.name, cells=tuple(cells)))
            else:
                if t.traversal is None:
                    raise DiagramError(f"Level-{n} tower {t.name!r} needs 'traversal'")
                level.append(Tower(name=t.name, traversal=tuple(t.traversal)))
        levels.append(tuple(level))
    d = OrderedBVDiagram(G, tuple(levels))
    validate_diagram(d)
    return d


def diagram_to_file(d: OrderedBVDiagram) -> DiagramFile:
    levels = []
    for n, towers in enumerate(d.levels, start=1):
        if n == 1:
            levels.append([TowerSpec(name=t.name, cells=[list(g.exponents) for g in t.cells]) for t in towers])
        else:
            levels.append([TowerSpec(name=t.name, traversal=list(t.traversal)) for t in towers])
    return DiagramFile(group=list(d.group.moduli), levels=levels)


def load_diagram(source: Union[str, Path]) -> OrderedBVDiagram:
    """
    Read a diagram from a path or from JSON text.

    Raises:
        DiagramError: If the file does not parse or the diagram is invalid
    """
    if isinstance(source, Path) or not source.lstrip().startswith("{"):
        path = Path(source)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as e:
            raise DiagramError(f"Cannot read diagram file {path}: {e}")
    else:
        text = source
    try:
        spec = DiagramFile.model_validate_json(text)
    except ValidationError as e:
        raise DiagramError(f"Invalid diagram file: {e}")
    return diagram_from_file(spec)


def dump_diagram(d: OrderedBVDiagram) -> str:
    return diagram_to_file(d).to_json()


# ==================== SERVICE ====================

class BVService:
    """Skew-product reports over a pair of diagrams"""

    def skew_report(self, dX: OrderedBVDiagram, dY: OrderedBVDiagram, levels: int) -> Dict[str, object]:
        """
        Stage table for the skew product of dX and dY.

        Args:
            dX: First factor
            dY: Second factor
            levels: Number of stages to compute

        Returns:
            Dictionary containing:
            - group: moduli literal
            - nondegenerate: {"x": per-level flags, "y": per-level flags}
            - zsystem: {"x": ..., "y": ...} stage ranks and connecting maps
            - stages: per-stage rows (absent when some level is degenerate)
            - predicted: invariant factors of G wedge G
            - verdict: "MATCH", "MISMATCH" or "DEGENERATE"
            - assumptions: model properties that finite data cannot confirm

        Raises:
            DiagramError: On group mismatch or missing levels
        """
        _check_pair(dX, dY, levels)
        x_flags, _ = nondegeneracy_check(dX)
        y_flags, _ = nondegeneracy_check(dY)
        report: Dict[str, object] = {
            "group": dX.group.literal(),
            "nondegenerate": {"x": x_flags[:levels], "y": y_flags[:levels]},
            "zsystem": {"x": zsystem_coinvariants(dX), "y": zsystem_coinvariants(dY)},
            "predicted": predicted_torsion(dX.group),
            "assumptions": UNVERIFIABLE_ASSUMPTIONS,
        }
        if not all(x_flags[:levels]) or not all(y_flags[:levels]):
            logger.error(f"Degenerate cocycle within the first {levels} levels")
            report["stages"] = []
            report["verdict"] = "DEGENERATE"
            return report

        stabilization = torsion_stabilization(dX, dY, levels)
        report["stages"] = [
            {
                "level": s.level,
                "free_rank": s.free_rank,
                "torsion": s.torsion,
                "iso_to_next": s.iso_to_next,
            }
            for s in stabilization.stages
        ]
        report["verdict"] = "MATCH" if stabilization.all_match else "MISMATCH"
        return report


bv_service = BVService()
