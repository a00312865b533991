"""
Presentation Service

Builds the module M(A,B) = Z[G] (x) Z^A (x) Z^B, its relation subgroup
generated by the A-side and B-side coboundaries, and the quotient N(A,B):
- torsion of N(A,B) and torsion-class tests
- the residue classifier (t_ij mod d(i,j)) on standard data
- explicit surjectivity witnesses
- constructive versions of the solution / adjustment / kernel / purity lemmas
"""

import itertools
import math
import random
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

from loguru import logger

from coinv.algebra.abelian import FinAbGroup, GroupElt, generates, pair_gcds, predicted_torsion
from coinv.algebra.group_ring import (
    Q,
    RingElt,
    cofactor_sum,
    cyclic_sum,
    norm_element,
)
from coinv.algebra.zlinalg import (
    AbelianQuotient,
    CokernelInvariants,
    IntMatrix,
    LinearSystem,
    Number,
    cokernel_invariants,
)
from coinv.config import settings


class PresentationError(Exception):
    """Presentation construction or query error"""
    pass


# ==================== DOMAIN TYPES ====================

class CocycleData:
    """The data (A, B, mu) with mu(A) and mu(B) both generating G"""

    def __init__(
        self,
        group: FinAbGroup,
        A: Sequence[str],
        B: Sequence[str],
        mu_a: Mapping[str, GroupElt],
        mu_b: Mapping[str, GroupElt],
    ):
        """
        Args:
            group: The finite abelian group G
            A: Ordered A labels
            B: Ordered B labels
            mu_a: Values of mu on A
            mu_b: Values of mu on B

        Raises:
            PresentationError: If a label list is empty or repeated, a value is missing
                or foreign, or mu(A) / mu(B) does not generate G
        """
        self.group = group
        self.A: Tuple[str, ...] = tuple(A)
        self.B: Tuple[str, ...] = tuple(B)
        for side, labels, values in (("A", self.A, mu_a), ("B", self.B, mu_b)):
            if not labels:
                raise PresentationError(f"Label set {side} is empty")
            if len(set(labels)) != len(labels):
                raise PresentationError(f"Label set {side} has repeated labels")
            for label in labels:
                if label not in values:
                    raise PresentationError(f"No value of mu for {side} label {label!r}")
                if not isinstance(values[label], GroupElt) or values[label].group != group:
                    raise PresentationError(f"Value of mu at {label!r} is not an element of {group}")
        self.mu_a: Dict[str, GroupElt] = {a: mu_a[a] for a in self.A}
        self.mu_b: Dict[str, GroupElt] = {b: mu_b[b] for b in self.B}
        if not generates(self.mu_a.values(), group):
            raise PresentationError(f"mu(A) does not generate {group}")
        if not generates(self.mu_b.values(), group):
            raise PresentationError(f"mu(B) does not generate {group}")

    def values_a(self) -> List[GroupElt]:
        return [self.mu_a[a] for a in self.A]

    def values_b(self) -> List[GroupElt]:
        return [self.mu_b[b] for b in self.B]

    def key(self) -> tuple:
        return (
            self.group.moduli,
            tuple((a, self.mu_a[a].exponents) for a in self.A),
            tuple((b, self.mu_b[b].exponents) for b in self.B),
        )

    def is_standard(self) -> bool:
        return self.key() == standard_data(self.group).key()

    def __eq__(self, other: object) -> bool:
        return isinstance(other, CocycleData) and self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())

    def __repr__(self) -> str:
        return f"CocycleData({self.group}, |A|={len(self.A)}, |B|={len(self.B)})"


class ModuleBasis:
    """Index scheme (g, a, b) -> (g * |A| + a) * |B| + b"""

    def __init__(self, group: FinAbGroup, A: Sequence[str], B: Sequence[str]):
        self.group = group
        self.A = tuple(A)
        self.B = tuple(B)
        self._a_pos = {a: i for i, a in enumerate(self.A)}
        self._b_pos = {b: i for i, b in enumerate(self.B)}

    @property
    def dim(self) -> int:
        return self.group.order * len(self.A) * len(self.B)

    def index(self, g: int, a: int, b: int) -> int:
        return (g * len(self.A) + a) * len(self.B) + b

    def triple(self, pos: int) -> Tuple[int, int, int]:
        rest, b = divmod(pos, len(self.B))
        g, a = divmod(rest, len(self.A))
        return g, a, b

    def vector(self, components: Mapping[Tuple[str, str], RingElt]) -> List[Number]:
        """Element sum r(a,b) (x) a (x) b as a coordinate vector"""
        vec: List[Number] = [0] * self.dim
        for (a, b), r in components.items():
            ai, bi = self._a_pos[a], self._b_pos[b]
            for g, c in r.coeffs.items():
                vec[self.index(g, ai, bi)] += c
        return [int(x) if isinstance(x, Fraction) and x.denominator == 1 else x for x in vec]

    def components(self, vec: Sequence[Number]) -> Dict[Tuple[str, str], RingElt]:
        """Inverse of vector: (a, b) -> r(a, b)"""
        if len(vec) != self.dim:
            raise PresentationError(f"Vector of length {len(vec)} for module of rank {self.dim}")
        coeffs: Dict[Tuple[str, str], Dict[int, Number]] = {
            (a, b): {} for a in self.A for b in self.B
        }
        for pos, x in enumerate(vec):
            if x:
                g, ai, bi = self.triple(pos)
                coeffs[(self.A[ai], self.B[bi])][g] = x
        return {ab: RingElt(self.group, c) for ab, c in coeffs.items()}


class Presentation:
    """N(A,B) = M(A,B) / (A-side + B-side relations)"""

    def __init__(self, source: CocycleData, basis: ModuleBasis, relation_rows: List[List[int]]):
        self.source = source
        self.basis = basis
        self.relation_rows = relation_rows
        self._quotient: Optional[AbelianQuotient] = None

    @property
    def group(self) -> FinAbGroup:
        return self.source.group

    @property
    def quotient(self) -> AbelianQuotient:
        """SNF-backed quotient with coordinates (computed on first use)"""
        if self._quotient is None:
            self._quotient = AbelianQuotient(self.relation_rows, self.basis.dim)
        return self._quotient

    @property
    def invariants(self) -> CokernelInvariants:
        return self.quotient.invariants

    def check_vector(self, r: Sequence[int]) -> None:
        if len(r) != self.basis.dim:
            raise PresentationError(f"Vector of length {len(r)} for module of rank {self.basis.dim}")


# ==================== CONSTRUCTION ====================

def standard_data(G: FinAbGroup) -> CocycleData:
    """A = B = {p_1..p_n} with mu the inclusion; trivial G uses the single label 'e'"""
    if G.rank == 0:
        labels = ["e"]
        values = {"e": G.identity()}
    else:
        labels = [f"p{i}" for i in range(1, G.rank + 1)]
        values = {f"p{i}": G.generator(i) for i in range(1, G.rank + 1)}
    return CocycleData(G, labels, labels, values, values)


@lru_cache(maxsize=256)
def build_presentation(data: CocycleData) -> Presentation:
    """
    Relation rows spanning the A-side and B-side subgroups over Z.

    For a in A and g in G: sum_b g(e - mu(b)) (x) a (x) b; for b in B and g in G:
    sum_a g(e - mu(a)) (x) a (x) b. Row count is |G|(|A| + |B|).
    """
    G = data.group
    basis = ModuleBasis(G, data.A, data.B)
    table = G.mul_table()
    mu_a = [data.mu_a[a].index for a in data.A]
    mu_b = [data.mu_b[b].index for b in data.B]
    rows: List[List[int]] = []
    for ai in range(len(data.A)):
        for g in range(G.order):
            row = [0] * basis.dim
            for bi, h in enumerate(mu_b):
                row[basis.index(g, ai, bi)] += 1
                row[basis.index(table[g][h], ai, bi)] -= 1
            rows.append(row)
    for bi in range(len(data.B)):
        for g in range(G.order):
            row = [0] * basis.dim
            for ai, h in enumerate(mu_a):
                row[basis.index(g, ai, bi)] += 1
                row[basis.index(table[g][h], ai, bi)] -= 1
            rows.append(row)
    logger.debug(f"Presentation for {data}: {len(rows)} relations on {basis.dim} generators")
    return Presentation(data, basis, rows)


def torsion_of_N(data: CocycleData) -> CokernelInvariants:
    """Invariants of N(A,B); the torsion part is expected to be G wedge G"""
    invariants = build_presentation(data).invariants
    expected = predicted_torsion(data.group)
    if list(invariants.torsion_factors) != expected:
        logger.warning(
            f"Torsion of N(A,B) for {data} is {list(invariants.torsion_factors)}, "
            f"predicted {expected}"
        )
    return invariants


def is_torsion_class(pres: Union[Presentation, CocycleData], r: Sequence[int]) -> bool:
    """True iff r is a rational combination of relation rows"""
    if isinstance(pres, CocycleData):
        pres = build_presentation(pres)
    pres.check_vector(r)
    return pres.quotient.is_torsion(r)


def alpha_element(data: CocycleData, alpha: Mapping[str, RingElt]) -> List[Number]:
    """sum alpha(a)(e - mu(b)) (x) a (x) b"""
    basis = ModuleBasis(data.group, data.A, data.B)
    return basis.vector({
        (a, b): alpha[a] * RingElt.e_minus(data.mu_b[b])
        for a in data.A for b in data.B if a in alpha
    })


def beta_element(data: CocycleData, beta: Mapping[str, RingElt]) -> List[Number]:
    """sum beta(b)(e - mu(a)) (x) a (x) b"""
    basis = ModuleBasis(data.group, data.A, data.B)
    return basis.vector({
        (a, b): beta[b] * RingElt.e_minus(data.mu_a[a])
        for a in data.A for b in data.B if b in beta
    })


def abpure_reduce(data: CocycleData, alpha: Mapping[str, RingElt]) -> Dict[str, RingElt]:
    """
    Replace alpha(a) by alpha(a) - s_a N so that it becomes integral.

    Requires every alpha(a)(e - mu(b)) to be integral; the A-side element is unchanged.

    Raises:
        PresentationError: If some alpha(a)(e - mu(b)) is not integral
    """
    G = data.group
    N = norm_element(G)
    reduced = {}
    for a, x in alpha.items():
        for b in data.B:
            if not (x * RingElt.e_minus(data.mu_b[b])).is_integral():
                raise PresentationError(f"alpha({a})(e - mu({b})) is not integral")
        candidate = x - N.scale(x.coeff(G.identity()))
        if not candidate.is_integral():
            raise PresentationError(f"alpha({a}) is not congruent to a multiple of N")
        reduced[a] = candidate.as_integral()
    return reduced


# ==================== CLASSIFIER ON STANDARD DATA ====================

@lru_cache(maxsize=32)
def _decomposition_system(G: FinAbGroup) -> LinearSystem:
    """
    Linear system for r(p_i, p_j) = alpha_i (e - p_j) + beta_j (e - p_i).

    Unknowns: alpha_i at h -> i|G| + h, beta_j at h -> (n + j)|G| + h.
    Equations are indexed like the standard module basis.
    """
    n, order = G.rank, G.order
    table = G.mul_table()
    inv = G.inv_table()
    gens = [G.generator(i + 1).index for i in range(n)]
    basis = ModuleBasis(G, [f"p{i}" for i in range(1, n + 1)], [f"p{i}" for i in range(1, n + 1)])
    rows = [[0] * (2 * n * order) for _ in range(basis.dim)]
    for i, j in itertools.product(range(n), repeat=2):
        pj_inv, pi_inv = inv[gens[j]], inv[gens[i]]
        for h in range(order):
            row = rows[basis.index(h, i, j)]
            row[i * order + h] += 1
            row[i * order + table[h][pj_inv]] -= 1
            row[(n + j) * order + h] += 1
            row[(n + j) * order + table[h][pi_inv]] -= 1
    logger.debug(f"Decomposition system for {G}: {len(rows)} x {2 * n * order}")
    return LinearSystem(IntMatrix(rows, 2 * n * order))


def decompose(
    G: FinAbGroup, r: Sequence[Number], rng: Optional[random.Random] = None
) -> Optional[Tuple[List[RingElt], List[RingElt]]]:
    """Rational alpha, beta with r(p_i,p_j) = alpha_i(e - p_j) + beta_j(e - p_i), or None"""
    n, order = G.rank, G.order
    x = _decomposition_system(G).solve(list(r), "Q", rng)
    if x is None:
        return None
    alphas = [RingElt.from_dense(G, x[i * order:(i + 1) * order], Q) for i in range(n)]
    betas = [RingElt.from_dense(G, x[(n + i) * order:(n + i + 1) * order], Q) for i in range(n)]
    return alphas, betas


def _pairs(G: FinAbGroup, all_pairs: bool) -> Dict[Tuple[int, int], int]:
    pairs = pair_gcds(G)
    if all_pairs:
        pairs.update({(j, i): d for (i, j), d in list(pairs.items())})
    return dict(sorted(pairs.items()))


def _kappas(
    G: FinAbGroup, alphas: List[RingElt], betas: List[RingElt], pairs: Sequence[Tuple[int, int]]
) -> Dict[Tuple[int, int], RingElt]:
    """kappa_ij = (alpha_i + beta_i)(e - p_j) (1-based)"""
    return {
        (i, j): (alphas[i - 1] + betas[i - 1]) * RingElt.e_minus(G.generator(j))
        for i, j in pairs
    }


def torsion_class_invariant(
    G: FinAbGroup,
    r: Sequence[int],
    verify: Optional[bool] = None,
    rng: Optional[random.Random] = None,
    all_pairs: bool = False,
) -> Dict[Tuple[int, int], int]:
    """
    Residues (t_ij * d(i,j) mod d(i,j)) of a torsion class on standard data.

    Args:
        G: The group (standard data A = B = {p_1..p_n}, mu = inclusion)
        r: Integer vector in the standard module basis
        verify: Repeat the rational solve with random free parameters and compare
            (defaults to settings.VERIFY_INVARIANCE)
        rng: Source of randomness for the verification solve
        all_pairs: Also report (j, i) for i < j; its residue is the negative of (i, j)

    Returns:
        Mapping (i, j) -> residue in Z_{d(i,j)} for 1 <= i < j <= n (all i != j with all_pairs)

    Raises:
        PresentationError: If r is not torsion or an integrality identity fails
    """
    data = standard_data(G)
    build_presentation(data).check_vector(r)
    if verify is None:
        verify = settings.VERIFY_INVARIANCE
    if G.rank == 0:
        return {}
    solution = decompose(G, r)
    if solution is None:
        raise PresentationError("Class is not torsion")
    pairs = _pairs(G, all_pairs)
    kappas = _kappas(G, *solution, pairs)

    if verify:
        rng = rng or random.Random(settings.DEFAULT_SEED)
        again = _kappas(G, *decompose(G, r, rng), pairs)
        if again != kappas:
            raise PresentationError("kappa depends on the chosen decomposition")

    N = norm_element(G)
    residues = {}
    for (i, j), d in pairs.items():
        kappa = kappas[(i, j)]
        t = kappa.coeff(G.identity())
        if not (kappa - N.scale(t)).is_integral():
            raise PresentationError(f"kappa_{i},{j} - t N is not integral")
        td = t * d
        if td.denominator != 1:
            raise PresentationError(f"t_{i},{j} * d is not an integer")
        residues[(i, j)] = int(td) % d
    return residues


def surjectivity_witness(G: FinAbGroup, k: int, l: int) -> List[int]:
    """
    (m_k/d Q_k - m_l/d Q_l) (x) p_k (x) p_l on standard data.

    Raises:
        PresentationError: If k < l is violated or d = gcd(m_k, m_l) = 1
    """
    if not 1 <= k < l <= G.rank:
        raise PresentationError(f"Need 1 <= k < l <= {G.rank}, got ({k}, {l})")
    m_k, m_l = G.moduli[k - 1], G.moduli[l - 1]
    d = math.gcd(m_k, m_l)
    if d == 1:
        raise PresentationError(f"d({k},{l}) = 1: no torsion in this component")
    value = cofactor_sum(G, k).scale(m_k // d) - cofactor_sum(G, l).scale(m_l // d)
    data = standard_data(G)
    basis = build_presentation(data).basis
    return [int(x) for x in basis.vector({(f"p{k}", f"p{l}"): value})]


# ==================== CONSTRUCTIVE LEMMAS ====================

def _check_cross_terms(G: FinAbGroup, rs: Sequence[RingElt]) -> None:
    for i, j in itertools.combinations(range(len(rs)), 2):
        term = rs[i] * RingElt.e_minus(G.generator(j + 1)) - rs[j] * RingElt.e_minus(G.generator(i + 1))
        if not term.is_integral():
            raise PresentationError(f"r_{i + 1}(e - p_{j + 1}) - r_{j + 1}(e - p_{i + 1}) is not integral")


def _check_count(G: FinAbGroup, rs: Sequence[RingElt]) -> None:
    if len(rs) != G.rank:
        raise PresentationError(f"Expected {G.rank} elements, got {len(rs)}")
    for r in rs:
        if r.group != G:
            raise PresentationError(f"Element over {r.group}, expected {G}")


def _split_first(G: FinAbGroup, H: FinAbGroup, r: RingElt) -> List[RingElt]:
    """r = sum_k r_k p_1^k with r_k in Q[H]"""
    parts: List[Dict[int, Fraction]] = [{} for _ in range(G.moduli[0])]
    for idx, c in r.coeffs.items():
        exps = G.at(idx).exponents
        parts[exps[0]][H.element(exps[1:]).index] = c
    return [RingElt(H, p, Q) for p in parts]


def _lift(G: FinAbGroup, y: RingElt, k: int) -> RingElt:
    """Embed y in Q[H] and multiply by p_1^k"""
    coeffs = {G.element((k,) + y.group.at(idx).exponents).index: c for idx, c in y.coeffs.items()}
    return RingElt(G, coeffs, Q)


def _lift_first(G: FinAbGroup, z: RingElt) -> RingElt:
    """Embed z in Q[<p_1>]"""
    pad = (0,) * (G.rank - 1)
    coeffs = {G.element(z.group.at(idx).exponents + pad).index: c for idx, c in z.coeffs.items()}
    return RingElt(G, coeffs, Q)


def _solve_cyclic(G: FinAbGroup, r: RingElt) -> RingElt:
    """Base case on Z_m: x = fractional prefix sums of the coefficients along powers of p"""
    m = G.moduli[0]
    p = G.generator(1)
    running = Fraction(0)
    coeffs = {}
    for k in range(m):
        running += r.coeff(p ** k)
        coeffs[(p ** k).index] = running - math.floor(running)
    return RingElt(G, coeffs, Q)


def _solve_recursive(G: FinAbGroup, rs: Sequence[RingElt]) -> RingElt:
    n = G.rank
    if n == 0:
        return RingElt.zero(G, Q)
    if n == 1:
        return _solve_cyclic(G, rs[0])
    H = FinAbGroup(G.moduli[1:])
    G1 = FinAbGroup(G.moduli[:1])
    p1 = G.generator(1)
    split = [_split_first(G, H, r) for r in rs[1:]]
    y = RingElt.zero(G, Q)
    for k in range(G.moduli[0]):
        y_k = _solve_recursive(H, [parts[k] for parts in split])
        y = y + _lift(G, y_k, k)
    w = rs[0] - y * RingElt.e_minus(p1)
    s = RingElt(G1, {k: w.coeff(p1 ** k) for k in range(G.moduli[0])}, Q)
    z = _solve_cyclic(G1, s)
    return y + _lift_first(G, z) * cofactor_sum(G, 1)


def lemma_solution(G: FinAbGroup, rs: Sequence[RingElt]) -> RingElt:
    """
    x in Q[G] with r_i - x(e - p_i) integral for every i.

    Preconditions (checked exactly): r_i P_i integral and
    r_i(e - p_j) - r_j(e - p_i) integral for all i, j.

    Raises:
        PresentationError: If a precondition fails
    """
    _check_count(G, rs)
    for i, r in enumerate(rs, start=1):
        if not (r * cyclic_sum(G, i)).is_integral():
            raise PresentationError(f"r_{i} P_{i} is not integral")
    _check_cross_terms(G, rs)
    x = _solve_recursive(G, rs)
    for i, r in enumerate(rs, start=1):
        if not (r - x * RingElt.e_minus(G.generator(i))).is_integral():
            raise PresentationError(f"r_{i} - x(e - p_{i}) is not integral")
    return x


def lemma_adjust(G: FinAbGroup, rs: Sequence[RingElt]) -> List[RingElt]:
    """
    Integral u_i with (r_i - u_i)(e - p_j) = (r_j - u_j)(e - p_i) for all i, j.

    Raises:
        PresentationError: If some r_i(e - p_j) - r_j(e - p_i) is not integral
    """
    _check_count(G, rs)
    _check_cross_terms(G, rs)
    N = norm_element(G)
    shifted = []
    for i, r in enumerate(rs, start=1):
        rP = r * cyclic_sum(G, i)
        t = rP.coeff(G.identity())
        if not (rP - N.scale(t)).is_integral():
            raise PresentationError(f"r_{i} P_{i} is not congruent to a multiple of N")
        shifted.append(r - cofactor_sum(G, i).scale(t))
    x = lemma_solution(G, shifted)
    us = [
        (s - x * RingElt.e_minus(G.generator(i))).as_integral()
        for i, s in enumerate(shifted, start=1)
    ]
    for i, j in itertools.combinations(range(len(rs)), 2):
        left = (rs[i] - us[i]) * RingElt.e_minus(G.generator(j + 1))
        right = (rs[j] - us[j]) * RingElt.e_minus(G.generator(i + 1))
        if left != right:
            raise PresentationError(f"Adjusted pair ({i + 1}, {j + 1}) does not agree")
    return us


def kernel_decomposition(G: FinAbGroup, r: Sequence[int]) -> Tuple[List[RingElt], List[RingElt]]:
    """
    Integral alpha, beta with r(p_i,p_j) = alpha_i(e - p_j) + beta_j(e - p_i).

    Exists exactly when r is torsion with all classifier residues zero.

    Raises:
        PresentationError: If r is not torsion or some residue is nonzero
    """
    solution = decompose(G, r)
    if solution is None:
        raise PresentationError("Class is not torsion")
    residues = torsion_class_invariant(G, r, verify=False)
    if any(residues.values()):
        raise PresentationError(f"Class has nonzero residues {residues}")
    alphas, betas = solution
    N = norm_element(G)
    for i in range(G.rank):
        total = alphas[i] + betas[i]
        k = total.coeff(G.identity())
        if not (total - N.scale(k)).is_integral():
            raise PresentationError(f"alpha_{i + 1} + beta_{i + 1} is not congruent to a multiple of N")
        alphas[i] = alphas[i] - N.scale(k)
    us = lemma_adjust(G, alphas)
    alpha_int = us
    beta_int = [(alphas[i] + betas[i] - us[i]).as_integral() for i in range(G.rank)]

    data = standard_data(G)
    labels = data.A
    rebuilt = [
        x + y for x, y in zip(
            alpha_element(data, dict(zip(labels, alpha_int))),
            beta_element(data, dict(zip(labels, beta_int))),
        )
    ]
    if rebuilt != list(r):
        raise PresentationError("Integral decomposition does not reproduce the element")
    return alpha_int, beta_int


# ==================== SERVICE ====================

class PresentationService:
    """Torsion checks of N(A,B) against the wedge prediction"""

    def torsion_report(self, data: CocycleData) -> Dict[str, object]:
        """
        Computed vs predicted torsion for one data set.

        Returns:
            Dictionary containing:
            - group: moduli literal
            - labels: (|A|, |B|)
            - free_rank: free rank of N(A,B)
            - computed: torsion invariant factors of N(A,B)
            - predicted: invariant factors of G wedge G
            - match: True if both agree
        """
        invariants = torsion_of_N(data)
        predicted = predicted_torsion(data.group)
        computed = list(invariants.torsion_factors)
        match = computed == predicted
        if match:
            logger.info(f"Torsion of N(A,B) over {data.group}: {computed} (MATCH)")
        return {
            "group": data.group.literal(),
            "labels": [len(data.A), len(data.B)],
            "free_rank": invariants.free_rank,
            "computed": computed,
            "predicted": predicted,
            "match": match,
        }


presentation_service = PresentationService()
