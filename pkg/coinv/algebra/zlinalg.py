"""
Exact integer and rational linear algebra

Smith normal form with unimodular transforms, cokernel invariants of
Z^k / (row span), lattice membership and class orders. Relations are always
rows acting on column-indexed generators.
"""

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence, Tuple, Union

from loguru import logger


class LinAlgError(Exception):
    """Integer linear algebra error"""
    pass


Number = Union[int, Fraction]
INFINITY = math.inf


class IntMatrix:
    """Dense rectangular integer matrix"""

    def __init__(self, rows: Sequence[Sequence[int]], cols: Optional[int] = None):
        data = [list(r) for r in rows]
        if cols is None:
            cols = len(data[0]) if data else 0
        for r in data:
            if len(r) != cols:
                raise LinAlgError(f"Ragged matrix: row of length {len(r)}, expected {cols}")
            for x in r:
                if isinstance(x, bool) or not isinstance(x, int):
                    raise LinAlgError(f"Non-integer matrix entry: {x!r}")
        self.data: List[List[int]] = data
        self.nrows = len(data)
        self.ncols = cols

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls([[int(i == j) for j in range(n)] for i in range(n)], n)

    @classmethod
    def zeros(cls, m: int, n: int) -> "IntMatrix":
        return cls([[0] * n for _ in range(m)], n)

    @classmethod
    def from_text(cls, text: str) -> "IntMatrix":
        """
        Parse a line-delimited integer matrix (entries separated by whitespace or commas).

        Blank lines and lines starting with '#' are skipped.
        """
        rows = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                rows.append([int(tok) for tok in line.replace(",", " ").split()])
            except ValueError:
                raise LinAlgError(f"Line {lineno}: cannot parse integers from {line!r}")
        if rows and len({len(r) for r in rows}) != 1:
            raise LinAlgError("Matrix rows have different lengths")
        return cls(rows)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.nrows, self.ncols

    def __getitem__(self, key: Tuple[int, int]) -> int:
        i, j = key
        return self.data[i][j]

    def transpose(self) -> "IntMatrix":
        if not self.nrows:
            return IntMatrix([[] for _ in range(self.ncols)], 0)
        return IntMatrix([list(col) for col in zip(*self.data)], self.nrows)

    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        if self.ncols != other.nrows:
            raise LinAlgError(f"Shape mismatch: {self.shape} @ {other.shape}")
        cols = other.transpose().data
        return IntMatrix(
            [[sum(a * b for a, b in zip(r, c)) for c in cols] for r in self.data],
            other.ncols,
        )

    def apply(self, v: Sequence[Number]) -> List[Number]:
        """Matrix-vector product A v"""
        if len(v) != self.ncols:
            raise LinAlgError(f"Vector of length {len(v)} for matrix with {self.ncols} columns")
        return [sum(a * x for a, x in zip(r, v)) for r in self.data]

    def diagonal(self) -> List[int]:
        return [self.data[i][i] for i in range(min(self.nrows, self.ncols))]

    def is_diagonal(self) -> bool:
        return all(
            x == 0 for i, r in enumerate(self.data) for j, x in enumerate(r) if i != j
        )

    def __eq__(self, other: object) -> bool:
        return isinstance(other, IntMatrix) and self.shape == other.shape and self.data == other.data

    def __repr__(self) -> str:
        return f"IntMatrix({self.data})"

    def to_text(self) -> str:
        return "\n".join(" ".join(str(x) for x in r) for r in self.data)


@dataclass
class SNFResult:
    """S = U A V with U, V unimodular and S diagonal with a divisibility chain"""

    U: Optional[IntMatrix]
    S: IntMatrix
    V: Optional[IntMatrix]
    V_inv: Optional[IntMatrix] = None
    rank: int = 0

    @property
    def diagonal(self) -> List[int]:
        return self.S.diagonal()


@dataclass(frozen=True)
class CokernelInvariants:
    """Z^ambient / row span as Z^free_rank + sum of Z_{d}"""

    free_rank: int
    torsion_factors: Tuple[int, ...] = field(default_factory=tuple)

    @property
    def torsion_order(self) -> int:
        return math.prod(self.torsion_factors)

    def __str__(self) -> str:
        return f"free {self.free_rank}, torsion [{','.join(str(d) for d in self.torsion_factors)}]"


# ==================== SMITH NORMAL FORM ====================

class _SmithReducer:
    """In-place reduction state; transforms are tracked only when requested"""

    def __init__(self, rows: List[List[int]], ncols: int, left: bool, right: bool):
        self.A = rows
        self.m = len(rows)
        self.n = ncols
        self.U = [[int(i == j) for j in range(self.m)] for i in range(self.m)] if left else None
        # Columns of V stored as rows; V_inv stored by rows
        self.Vt = [[int(i == j) for j in range(self.n)] for i in range(self.n)] if right else None
        self.V_inv = [[int(i == j) for j in range(self.n)] for i in range(self.n)] if right else None

    def swap_rows(self, i: int, j: int) -> None:
        if i == j:
            return
        self.A[i], self.A[j] = self.A[j], self.A[i]
        if self.U is not None:
            self.U[i], self.U[j] = self.U[j], self.U[i]

    def swap_cols(self, i: int, j: int) -> None:
        if i == j:
            return
        for r in self.A:
            r[i], r[j] = r[j], r[i]
        if self.Vt is not None:
            self.Vt[i], self.Vt[j] = self.Vt[j], self.Vt[i]
            self.V_inv[i], self.V_inv[j] = self.V_inv[j], self.V_inv[i]

    def row_sub(self, i: int, t: int, q: int, support: List[int]) -> None:
        """row_i -= q * row_t, touching only the nonzero columns of row_t"""
        src, dst = self.A[t], self.A[i]
        for j in support:
            dst[j] -= q * src[j]
        if self.U is not None:
            ut, ui = self.U[t], self.U[i]
            for j in range(self.m):
                if ut[j]:
                    ui[j] -= q * ut[j]

    def col_sub(self, j: int, t: int, q: int, support: List[int]) -> None:
        """col_j -= q * col_t, touching only the nonzero rows of col_t"""
        for r in support:
            row = self.A[r]
            row[j] -= q * row[t]
        if self.Vt is not None:
            vt, vj = self.Vt[t], self.Vt[j]
            for k in range(self.n):
                if vt[k]:
                    vj[k] -= q * vt[k]
            wj, wt = self.V_inv[j], self.V_inv[t]
            for k in range(self.n):
                if wj[k]:
                    wt[k] += q * wj[k]

    def negate_row(self, i: int) -> None:
        self.A[i] = [-x for x in self.A[i]]
        if self.U is not None:
            self.U[i] = [-x for x in self.U[i]]

    def find_pivot(self, t: int) -> Optional[Tuple[int, int]]:
        """Minimal nonzero |a| in the trailing block, ties by lowest (row, col)"""
        best = None
        best_val = 0
        for i in range(t, self.m):
            row = self.A[i]
            for j in range(t, self.n):
                a = row[j]
                if a:
                    a = abs(a)
                    if best is None or a < best_val:
                        best, best_val = (i, j), a
                        if a == 1:
                            return best
        return best

    def first_non_multiple(self, t: int) -> Optional[int]:
        p = self.A[t][t]
        if abs(p) == 1:
            return None
        for i in range(t + 1, self.m):
            row = self.A[i]
            for j in range(t + 1, self.n):
                if row[j] % p:
                    return i
        return None

    def reduce(self) -> int:
        t = 0
        limit = min(self.m, self.n)
        while t < limit:
            pivot = self.find_pivot(t)
            if pivot is None:
                break
            self.swap_rows(t, pivot[0])
            self.swap_cols(t, pivot[1])
            while True:
                p = self.A[t][t]
                dirty = False
                row_support = [j for j in range(t, self.n) if self.A[t][j]]
                for i in range(t + 1, self.m):
                    a = self.A[i][t]
                    if a:
                        self.row_sub(i, t, a // p, row_support)
                        if self.A[i][t]:
                            dirty = True
                col_support = [i for i in range(t, self.m) if self.A[i][t]]
                for j in range(t + 1, self.n):
                    a = self.A[t][j]
                    if a:
                        self.col_sub(j, t, a // p, col_support)
                        if self.A[t][j]:
                            dirty = True
                if dirty:
                    pivot = self.find_pivot(t)
                    self.swap_rows(t, pivot[0])
                    self.swap_cols(t, pivot[1])
                    continue
                bad_row = self.first_non_multiple(t)
                if bad_row is None:
                    break
                # row_t += row_bad
                self.row_sub(t, bad_row, -1, [j for j in range(t, self.n) if self.A[bad_row][j]])
            if self.A[t][t] < 0:
                self.negate_row(t)
            t += 1
        return t


def smith_normal_form(
    A: Union[IntMatrix, Sequence[Sequence[int]]],
    left: bool = True,
    right: bool = True,
) -> SNFResult:
    """
    Smith normal form S = U A V.

    Args:
        A: Integer matrix
        left: Track the row transform U
        right: Track the column transform V (and its inverse)

    Returns:
        SNFResult; U / V are None when not tracked
    """
    if not isinstance(A, IntMatrix):
        A = IntMatrix(A)
    logger.debug(f"SNF of {A.nrows}x{A.ncols} matrix (left={left}, right={right})")
    reducer = _SmithReducer([list(r) for r in A.data], A.ncols, left, right)
    rank = reducer.reduce()
    S = IntMatrix(reducer.A, A.ncols)
    U = IntMatrix(reducer.U, A.nrows) if left else None
    V = V_inv = None
    if right:
        V = IntMatrix(reducer.Vt, A.ncols).transpose()
        V_inv = IntMatrix(reducer.V_inv, A.ncols)
    return SNFResult(U=U, S=S, V=V, V_inv=V_inv, rank=rank)


def invariant_factors_of_cyclic(orders: Iterable[int]) -> List[int]:
    """Canonical invariant-factor chain of a direct sum of cyclic groups Z_{o}"""
    orders = [o for o in orders if o != 1]
    if not orders:
        return []
    k = len(orders)
    diag = [[orders[i] if i == j else 0 for j in range(k)] for i in range(k)]
    result = smith_normal_form(diag, left=False, right=False)
    return [d for d in result.diagonal if d > 1]


# ==================== QUOTIENT GROUPS ====================

class AbelianQuotient:
    """
    The finitely generated abelian group Z^k / (row span of relations).

    Coordinates come from the column transform V of the relation matrix's SNF:
    v maps to w = v V, and the class of v is zero iff d_i | w_i for i < rank
    and w_i = 0 beyond the rank.
    """

    def __init__(self, relations: Sequence[Sequence[int]], ambient_rank: int):
        for r in relations:
            if len(r) != ambient_rank:
                raise LinAlgError(
                    f"Relation of length {len(r)} in ambient rank {ambient_rank}"
                )
        self.ambient_rank = ambient_rank
        self.relation_count = len(relations)
        snf = smith_normal_form(IntMatrix(relations, ambient_rank), left=False, right=True)
        self.rank = snf.rank
        self.factors: List[int] = snf.diagonal[: snf.rank]
        self._Vt = snf.V.transpose().data
        self._V_inv = snf.V_inv.data
        self.torsion_indices = [k for k, d in enumerate(self.factors) if d > 1]
        logger.debug(
            f"Quotient Z^{ambient_rank} / {len(relations)} relations: "
            f"rank {self.rank}, torsion {[self.factors[k] for k in self.torsion_indices]}"
        )

    @property
    def invariants(self) -> CokernelInvariants:
        return CokernelInvariants(
            free_rank=self.ambient_rank - self.rank,
            torsion_factors=tuple(self.factors[k] for k in self.torsion_indices),
        )

    def _check(self, v: Sequence[int]) -> None:
        if len(v) != self.ambient_rank:
            raise LinAlgError(f"Vector of length {len(v)} in ambient rank {self.ambient_rank}")

    def coordinates(self, v: Sequence[Number]) -> List[Number]:
        """w = v V"""
        self._check(v)
        nz = [(i, x) for i, x in enumerate(v) if x]
        return [sum(x * col[i] for i, x in nz) for col in self._Vt]

    def is_torsion(self, v: Sequence[Number]) -> bool:
        w = self.coordinates(v)
        return not any(w[self.rank:])

    def contains(self, v: Sequence[int]) -> bool:
        """Integer row-span membership"""
        w = self.coordinates(v)
        if any(w[self.rank:]):
            return False
        return all(x % d == 0 for x, d in zip(w, self.factors))

    def order(self, v: Sequence[int]) -> Union[int, float]:
        """Smallest n >= 1 with n v in the row span, or infinity"""
        w = self.coordinates(v)
        if any(w[self.rank:]):
            return INFINITY
        result = 1
        for x, d in zip(w, self.factors):
            result = math.lcm(result, d // math.gcd(d, x))
        return result

    def torsion_coordinates(self, v: Sequence[int]) -> List[int]:
        """Residues of the class of v in the torsion factors (v must be torsion)"""
        w = self.coordinates(v)
        if any(w[self.rank:]):
            raise LinAlgError("Class is not torsion")
        return [w[k] % self.factors[k] for k in self.torsion_indices]

    def torsion_generators(self) -> List[List[int]]:
        """Representatives whose classes generate the torsion subgroup, one per factor > 1"""
        return [list(self._V_inv[k]) for k in self.torsion_indices]


# ==================== OPERATIONS ====================

def cokernel_invariants(relations: Sequence[Sequence[int]], ambient_rank: int) -> CokernelInvariants:
    """
    Invariants of Z^ambient_rank / (row span of relations).

    Raises:
        LinAlgError: On dimension mismatch
    """
    for r in relations:
        if len(r) != ambient_rank:
            raise LinAlgError(f"Relation of length {len(r)} in ambient rank {ambient_rank}")
    snf = smith_normal_form(IntMatrix(relations, ambient_rank), left=False, right=False)
    diag = snf.diagonal[: snf.rank]
    return CokernelInvariants(
        free_rank=ambient_rank - snf.rank,
        torsion_factors=tuple(d for d in diag if d > 1),
    )


class LinearSystem:
    """
    A x = b for a fixed integer matrix A and many right-hand sides.

    The SNF of A is computed once; each solve works in SNF coordinates.
    """

    def __init__(self, A: Union[IntMatrix, Sequence[Sequence[int]]]):
        if not isinstance(A, IntMatrix):
            A = IntMatrix(A)
        self.A = A
        self._snf = smith_normal_form(A, left=True, right=True)

    @property
    def rank(self) -> int:
        return self._snf.rank

    def solve(
        self,
        b: Sequence[Number],
        domain: str = "Z",
        rng: Optional[random.Random] = None,
    ) -> Optional[List[Number]]:
        if domain not in ("Z", "Q"):
            raise LinAlgError(f"Unknown domain: {domain}")
        if len(b) != self.A.nrows:
            raise LinAlgError(f"Right-hand side of length {len(b)} for {self.A.nrows} equations")
        snf = self._snf
        c = snf.U.apply(b)
        if any(c[snf.rank:]):
            return None
        diag = snf.diagonal
        y: List[Number] = []
        for k in range(self.A.ncols):
            if k < snf.rank:
                q = Fraction(c[k]) / diag[k]
                if domain == "Z":
                    if q.denominator != 1:
                        return None
                    q = int(q)
                y.append(q)
            else:
                y.append(rng.randint(-3, 3) if rng is not None else 0)
        x = snf.V.apply(y)
        if domain == "Z":
            return [int(v) for v in x]
        return [Fraction(v) for v in x]


def solve_linear(
    A: Union[IntMatrix, Sequence[Sequence[int]]],
    b: Sequence[Number],
    domain: str = "Z",
    rng: Optional[random.Random] = None,
) -> Optional[List[Number]]:
    """
    Solve A x = b over Z or Q through SNF coordinates.

    Args:
        A: m x n integer matrix
        b: Right-hand side of length m (integers, or rationals for domain Q)
        domain: "Z" or "Q"
        rng: If given, free parameters are drawn at random instead of set to zero

    Returns:
        A solution vector, or None if none exists in the domain
    """
    return LinearSystem(A).solve(b, domain, rng)


def class_order(relations: Sequence[Sequence[int]], v: Sequence[int]) -> Union[int, float]:
    """Smallest n >= 1 with n v in the integer row span of relations (math.inf if none)"""
    return AbelianQuotient(relations, len(v)).order(v)
