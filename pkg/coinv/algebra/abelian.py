"""
Finite abelian groups in canonical product form

G = Z_{m_1} x ... x Z_{m_n} with elements written multiplicatively as
p_1^{k_1} ... p_n^{k_n} and stored as reduced exponent vectors.
"""

import itertools
import math
import re
from collections import deque
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

from loguru import logger

from coinv.algebra.zlinalg import invariant_factors_of_cyclic


class GroupError(Exception):
    """Finite abelian group error"""
    pass


class FinAbGroup:
    """Finite abelian group Z_{m_1} x ... x Z_{m_n}"""

    def __init__(self, moduli: Iterable[int]):
        """
        Args:
            moduli: Cyclic factor orders; factors of order 1 are dropped

        Raises:
            GroupError: If a modulus is not a positive integer
        """
        moduli = list(moduli)
        cleaned = []
        for m in moduli:
            if isinstance(m, bool) or not isinstance(m, int) or m < 1:
                raise GroupError(f"Invalid modulus: {m!r}")
            if m > 1:
                cleaned.append(m)
        if len(cleaned) < len(moduli):
            logger.debug(f"Dropped {len(moduli) - len(cleaned)} trivial factor(s) Z_1 from moduli {list(moduli)}")
        self._moduli: Tuple[int, ...] = tuple(cleaned)
        self._order = math.prod(self._moduli)
        strides = [1] * len(self._moduli)
        for i in range(len(self._moduli) - 2, -1, -1):
            strides[i] = strides[i + 1] * self._moduli[i + 1]
        self._strides: Tuple[int, ...] = tuple(strides)
        self._elements: Optional[Tuple["GroupElt", ...]] = None
        self._mul_table: Optional[List[List[int]]] = None
        self._inv_table: Optional[List[int]] = None

    @classmethod
    def parse(cls, text: str) -> "FinAbGroup":
        """
        Parse a comma-separated moduli literal such as "2,2" or "6,4".

        An empty string (or "1") denotes the trivial group.
        """
        text = text.strip()
        if not text:
            return cls([])
        try:
            moduli = [int(part) for part in text.split(",") if part.strip()]
        except ValueError:
            raise GroupError(f"Cannot parse group moduli: {text!r}")
        return cls(moduli)

    # ==================== STRUCTURE ====================

    @property
    def moduli(self) -> Tuple[int, ...]:
        return self._moduli

    @property
    def rank(self) -> int:
        """Number of stored cyclic factors (n)"""
        return len(self._moduli)

    @property
    def order(self) -> int:
        return self._order

    def is_trivial(self) -> bool:
        return self._order == 1

    def is_cyclic(self) -> bool:
        """True if G is cyclic (pairwise coprime factors)"""
        return all(
            math.gcd(self._moduli[i], self._moduli[j]) == 1
            for i, j in itertools.combinations(range(self.rank), 2)
        )

    def identity(self) -> "GroupElt":
        return GroupElt(self, (0,) * self.rank)

    def generator(self, i: int) -> "GroupElt":
        """Return p_i, the i-th unit exponent vector (1-based)"""
        if not 1 <= i <= self.rank:
            raise GroupError(f"Generator index {i} out of range 1..{self.rank}")
        exps = [0] * self.rank
        exps[i - 1] = 1
        return GroupElt(self, tuple(exps))

    def generators(self) -> List["GroupElt"]:
        return [self.generator(i) for i in range(1, self.rank + 1)]

    def element(self, exponents: Sequence[int]) -> "GroupElt":
        """Build an element from (unreduced) exponents"""
        if len(exponents) != self.rank:
            raise GroupError(
                f"Expected {self.rank} exponents for {self}, got {len(exponents)}"
            )
        return GroupElt(self, tuple(k % m for k, m in zip(exponents, self._moduli)))

    def parse_element(self, text: str) -> "GroupElt":
        """Parse an exponent tuple such as "(1,0)" or "e" for the identity"""
        text = text.strip()
        if text in ("e", "()"):
            return self.identity()
        match = re.fullmatch(r"\(?\s*(-?\d+(?:\s*,\s*-?\d+)*)?\s*,?\s*\)?", text)
        if not match:
            raise GroupError(f"Cannot parse group element: {text!r}")
        body = match.group(1) or ""
        exps = [int(part) for part in body.split(",") if part.strip()]
        return self.element(exps)

    # ==================== ENUMERATION ====================

    def elements(self) -> Tuple["GroupElt", ...]:
        """Canonical enumeration (lexicographic in exponents)"""
        if self._elements is None:
            self._elements = tuple(
                GroupElt(self, exps)
                for exps in itertools.product(*(range(m) for m in self._moduli))
            )
        return self._elements

    def __iter__(self) -> Iterator["GroupElt"]:
        return iter(self.elements())

    def __len__(self) -> int:
        return self._order

    def index(self, x: "GroupElt") -> int:
        """Position of x in the canonical enumeration"""
        self.check_member(x)
        return sum(k * s for k, s in zip(x.exponents, self._strides))

    def at(self, idx: int) -> "GroupElt":
        return self.elements()[idx]

    def mul_table(self) -> List[List[int]]:
        """Index-level multiplication table, built on first use"""
        if self._mul_table is None:
            logger.debug(f"Building multiplication table for {self} (order {self._order})")
            elts = self.elements()
            self._mul_table = [
                [self.index(x * y) for y in elts] for x in elts
            ]
        return self._mul_table

    def inv_table(self) -> List[int]:
        if self._inv_table is None:
            self._inv_table = [self.index(x.inverse()) for x in self.elements()]
        return self._inv_table

    def check_member(self, x: "GroupElt") -> None:
        if not isinstance(x, GroupElt) or x.group != self:
            raise GroupError(f"{x!r} is not an element of {self}")

    # ==================== COMPARISON ====================

    def __eq__(self, other: object) -> bool:
        return isinstance(other, FinAbGroup) and self._moduli == other._moduli

    def __hash__(self) -> int:
        return hash(("FinAbGroup", self._moduli))

    def __repr__(self) -> str:
        return f"FinAbGroup({list(self._moduli)})"

    def __str__(self) -> str:
        if not self._moduli:
            return "1"
        return " x ".join(f"Z_{m}" for m in self._moduli)

    def literal(self) -> str:
        """Comma-separated moduli literal (inverse of parse)"""
        return ",".join(str(m) for m in self._moduli)


class GroupElt:
    """Element of a FinAbGroup, stored as reduced exponents"""

    __slots__ = ("group", "exponents")

    def __init__(self, group: FinAbGroup, exponents: Tuple[int, ...]):
        self.group = group
        self.exponents = exponents

    def _check_same(self, other: "GroupElt") -> None:
        if not isinstance(other, GroupElt) or other.group != self.group:
            raise GroupError(f"Group mismatch: {self!r} and {other!r}")

    def __mul__(self, other: "GroupElt") -> "GroupElt":
        if not isinstance(other, GroupElt):
            return NotImplemented
        self._check_same(other)
        return GroupElt(
            self.group,
            tuple(
                (a + b) % m
                for a, b, m in zip(self.exponents, other.exponents, self.group.moduli)
            ),
        )

    def inverse(self) -> "GroupElt":
        return GroupElt(
            self.group,
            tuple((-a) % m for a, m in zip(self.exponents, self.group.moduli)),
        )

    def __pow__(self, k: int) -> "GroupElt":
        return GroupElt(
            self.group,
            tuple((a * k) % m for a, m in zip(self.exponents, self.group.moduli)),
        )

    def is_identity(self) -> bool:
        return not any(self.exponents)

    def order(self) -> int:
        """Smallest positive k with x^k = e"""
        result = 1
        for k, m in zip(self.exponents, self.group.moduli):
            result = math.lcm(result, m // math.gcd(m, k))
        return result

    @property
    def index(self) -> int:
        return self.group.index(self)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, GroupElt)
            and self.group == other.group
            and self.exponents == other.exponents
        )

    def __hash__(self) -> int:
        return hash((self.group.moduli, self.exponents))

    def __repr__(self) -> str:
        return f"GroupElt({self.literal()})"

    def literal(self) -> str:
        return "(" + ",".join(str(k) for k in self.exponents) + ")"

    def __str__(self) -> str:
        if self.is_identity():
            return "e"
        parts = []
        for i, k in enumerate(self.exponents, start=1):
            if k == 1:
                parts.append(f"p{i}")
            elif k:
                parts.append(f"p{i}^{k}")
        return "".join(parts)


# ==================== OPERATIONS ====================

def element_arithmetic(op: str, x: GroupElt, y: Union[GroupElt, int, None] = None) -> GroupElt:
    """
    Multiplicative arithmetic on group elements.

    Args:
        op: One of "mul", "inv", "pow"
        x: Left operand
        y: Second element for "mul", integer exponent for "pow", ignored for "inv"

    Returns:
        Reduced result element

    Raises:
        GroupError: On group mismatch or unknown operation
    """
    if op == "mul":
        if not isinstance(y, GroupElt):
            raise GroupError("mul needs two group elements")
        return x * y
    if op == "inv":
        return x.inverse()
    if op == "pow":
        if isinstance(y, bool) or not isinstance(y, int):
            raise GroupError("pow needs an integer exponent")
        return x ** y
    raise GroupError(f"Unknown group operation: {op}")


def subgroup_closure(S: Iterable[GroupElt], G: FinAbGroup) -> List[GroupElt]:
    """Breadth-first closure of S under multiplication (always contains e)"""
    gens = list(S)
    for s in gens:
        G.check_member(s)
    seen = {G.identity()}
    order = [G.identity()]
    queue = deque(order)
    while queue:
        x = queue.popleft()
        for s in gens:
            y = x * s
            if y not in seen:
                seen.add(y)
                order.append(y)
                queue.append(y)
    return order


def generates(S: Iterable[GroupElt], G: FinAbGroup) -> bool:
    """True iff the subgroup generated by S is all of G"""
    return len(subgroup_closure(S, G)) == G.order


def pair_gcds(G: FinAbGroup) -> Dict[Tuple[int, int], int]:
    """d(i,j) = gcd(m_i, m_j) for 1 <= i < j <= n"""
    m = G.moduli
    return {
        (i + 1, j + 1): math.gcd(m[i], m[j])
        for i, j in itertools.combinations(range(len(m)), 2)
    }


def predicted_torsion(G: FinAbGroup) -> List[int]:
    """
    Invariant factors of G wedge G, the direct sum of Z_{d(i,j)} over i < j.

    Returns:
        Divisibility-ordered invariant factors (> 1 only); empty for cyclic G
    """
    return invariant_factors_of_cyclic(pair_gcds(G).values())
