"""
Exact group rings Z[G] and Q[G] over a finite abelian group

Elements are sparse maps from canonical element indices to exact rationals.
The domain tag records whether the element is meant to live in Z[G] or Q[G].
"""

import re
from collections import deque
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from loguru import logger

from coinv.algebra.abelian import FinAbGroup, GroupElt, GroupError, generates

Scalar = Union[int, Fraction]

Z = "Z"
Q = "Q"


class RingError(Exception):
    """Group ring arithmetic error"""
    pass


def exact(value: Scalar) -> Fraction:
    """Coefficient as a Fraction; floats are rejected"""
    if not isinstance(value, (int, Fraction)):
        raise TypeError(f"Coefficients must be int or Fraction, got {type(value).__name__}")
    return Fraction(value)


class RingElt:
    """Element of Z[G] or Q[G]"""

    __slots__ = ("group", "coeffs", "domain")

    def __init__(
        self,
        group: FinAbGroup,
        coeffs: Optional[Mapping[Union[int, GroupElt], Scalar]] = None,
        domain: Optional[str] = None,
    ):
        """
        Args:
            group: Underlying finite abelian group
            coeffs: Coefficients keyed by element index or GroupElt
            domain: "Z" or "Q"; inferred from the coefficients when omitted

        Raises:
            RingError: If a Z-tagged element has a non-integral coefficient
        """
        self.group = group
        clean: Dict[int, Fraction] = {}
        for key, value in (coeffs or {}).items():
            idx = group.index(key) if isinstance(key, GroupElt) else key
            if not 0 <= idx < group.order:
                raise RingError(f"Element index {idx} out of range for {group}")
            value = exact(value)
            if value:
                total = clean.get(idx, 0) + value
                if total:
                    clean[idx] = total
                else:
                    clean.pop(idx, None)
        integral = all(c.denominator == 1 for c in clean.values())
        if domain is None:
            domain = Z if integral else Q
        elif domain not in (Z, Q):
            raise RingError(f"Unknown domain tag: {domain}")
        elif domain == Z and not integral:
            raise RingError("Non-integral coefficient in an element of Z[G]")
        self.coeffs = clean
        self.domain = domain

    # ==================== CONSTRUCTORS ====================

    @classmethod
    def zero(cls, group: FinAbGroup, domain: str = Z) -> "RingElt":
        return cls(group, {}, domain)

    @classmethod
    def one(cls, group: FinAbGroup) -> "RingElt":
        return cls(group, {0: 1}, Z)

    @classmethod
    def monomial(cls, g: GroupElt, coeff: Scalar = 1) -> "RingElt":
        return cls(g.group, {g.index: coeff})

    @classmethod
    def e_minus(cls, g: GroupElt) -> "RingElt":
        """e - g"""
        return cls(g.group, {0: 1, g.index: -1} if not g.is_identity() else {}, Z)

    @classmethod
    def from_dense(cls, group: FinAbGroup, values: Sequence[Scalar], domain: Optional[str] = None) -> "RingElt":
        if len(values) != group.order:
            raise RingError(f"Dense vector of length {len(values)} for group of order {group.order}")
        return cls(group, {i: v for i, v in enumerate(values) if v}, domain)

    @classmethod
    def parse(cls, text: str, group: FinAbGroup) -> "RingElt":
        """
        Parse "1*(0,0) - 1*(1,0) + 1/2*(1,1)"; coefficients default to 1, "e" is the identity.
        """
        body = text.strip()
        if body in ("", "0"):
            return cls.zero(group)
        term = re.compile(
            r"\s*([+-])?\s*(?:(\d+(?:/\d+)?)\s*\*\s*|(\d+(?:/\d+)?)\s*(?=\())?(\([^)]*\)|e)\s*"
        )
        pos = 0
        coeffs: Dict[int, Fraction] = {}
        first = True
        while pos < len(body):
            match = term.match(body, pos)
            if not match or match.end() == pos:
                raise RingError(f"Cannot parse ring element near {body[pos:]!r}")
            sign, c1, c2, mono = match.groups()
            if sign is None and not first:
                raise RingError(f"Missing operator before {mono!r}")
            coeff = Fraction(c1 or c2 or 1)
            if sign == "-":
                coeff = -coeff
            try:
                idx = group.parse_element(mono).index
            except GroupError as e:
                raise RingError(str(e))
            coeffs[idx] = coeffs.get(idx, 0) + coeff
            pos = match.end()
            first = False
        return cls(group, coeffs)

    # ==================== ACCESS ====================

    def coeff(self, g: Union[GroupElt, int]) -> Fraction:
        idx = g.index if isinstance(g, GroupElt) else g
        return self.coeffs.get(idx, Fraction(0))

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_integral(self) -> bool:
        return all(c.denominator == 1 for c in self.coeffs.values())

    def augmentation(self) -> Fraction:
        """Sum of coefficients"""
        return sum(self.coeffs.values(), Fraction(0))

    def as_integral(self) -> "RingElt":
        """Same element tagged Z (must be integral)"""
        if not self.is_integral():
            raise RingError("Element is not integral")
        return RingElt(self.group, self.coeffs, Z)

    # ==================== ARITHMETIC ====================

    def _check(self, other: "RingElt") -> None:
        if not isinstance(other, RingElt) or other.group != self.group:
            raise RingError(f"Group mismatch in ring arithmetic: {self.group} and {getattr(other, 'group', other)}")

    def _join(self, other: "RingElt") -> str:
        return Q if Q in (self.domain, other.domain) else Z

    def __add__(self, other: "RingElt") -> "RingElt":
        self._check(other)
        out = dict(self.coeffs)
        for i, c in other.coeffs.items():
            out[i] = out.get(i, 0) + c
        return RingElt(self.group, out, self._join(other))

    def __neg__(self) -> "RingElt":
        return RingElt(self.group, {i: -c for i, c in self.coeffs.items()}, self.domain)

    def __sub__(self, other: "RingElt") -> "RingElt":
        return self + (-other)

    def scale(self, c: Scalar) -> "RingElt":
        c = exact(c)
        domain = Q if self.domain == Q or c.denominator != 1 else Z
        return RingElt(self.group, {i: c * v for i, v in self.coeffs.items()}, domain)

    def shift(self, g: GroupElt) -> "RingElt":
        """g * self (a permutation of coefficients)"""
        table = self.group.mul_table()[g.index]
        return RingElt(self.group, {table[i]: c for i, c in self.coeffs.items()}, self.domain)

    def __mul__(self, other: Union["RingElt", Scalar]) -> "RingElt":
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return self.scale(other)
        if isinstance(other, GroupElt):
            return self.shift(other)
        self._check(other)
        table = self.group.mul_table()
        out: Dict[int, Fraction] = {}
        for i, a in self.coeffs.items():
            row = table[i]
            for j, b in other.coeffs.items():
                k = row[j]
                out[k] = out.get(k, 0) + a * b
        return RingElt(self.group, out, self._join(other))

    def __rmul__(self, other: Union[Scalar, GroupElt]) -> "RingElt":
        return self.__mul__(other)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, RingElt) and self.group == other.group and self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash((self.group, tuple(sorted(self.coeffs.items()))))

    def __repr__(self) -> str:
        return f"RingElt[{self.domain}]({self.to_text()})"

    def to_text(self) -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for i in sorted(self.coeffs):
            c = self.coeffs[i]
            sign = "-" if c < 0 else "+"
            parts.append((sign, f"{abs(c)}*{self.group.at(i).literal()}"))
        text = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for sign, term in parts[1:]:
            text += f" {sign} {term}"
        return text


# ==================== OPERATIONS ====================

def ring_arithmetic(op: str, u: RingElt, v: Union[RingElt, Scalar, None] = None) -> RingElt:
    """
    Arithmetic in Z[G] / Q[G].

    Args:
        op: One of "add", "neg", "mul", "scale"
        u: Left operand
        v: Right operand (ring element, or scalar for "scale")

    Raises:
        RingError: On group mismatch or unknown operation
    """
    if op == "add":
        return u + v
    if op == "neg":
        return -u
    if op == "mul":
        return u * v
    if op == "scale":
        if not isinstance(v, (int, Fraction)) or isinstance(v, bool):
            raise RingError("scale needs a rational scalar")
        return u.scale(v)
    raise RingError(f"Unknown ring operation: {op}")


def norm_element(G: FinAbGroup) -> RingElt:
    """N = sum of all group elements"""
    return RingElt(G, {i: 1 for i in range(G.order)}, Z)


def cyclic_sum(G: FinAbGroup, i: int) -> RingElt:
    """P_i = e + p_i + ... + p_i^{m_i - 1}"""
    p = G.generator(i)
    return RingElt(G, {(p ** k).index: 1 for k in range(G.moduli[i - 1])}, Z)


def cofactor_sum(G: FinAbGroup, i: int) -> RingElt:
    """Q_i = product of P_j over j != i"""
    if not 1 <= i <= G.rank:
        raise RingError(f"Index {i} out of range 1..{G.rank}")
    result = RingElt.one(G)
    for j in range(1, G.rank + 1):
        if j != i:
            result = result * cyclic_sum(G, j)
    return result


def special_element(G: FinAbGroup, kind: str, i: Optional[int] = None) -> RingElt:
    """
    The distinguished elements N, P_i and Q_i of Z[G].

    Args:
        G: The group
        kind: "N", "P" or "Q"
        i: 1-based factor index for P and Q

    Raises:
        RingError: On an unknown kind or an index out of range
    """
    if kind == "N":
        return norm_element(G)
    if kind not in ("P", "Q"):
        raise RingError(f"Unknown special element: {kind}")
    if i is None or not 1 <= i <= G.rank:
        raise RingError(f"Index {i} out of range 1..{G.rank} for {kind}")
    return cyclic_sum(G, i) if kind == "P" else cofactor_sum(G, i)


def shortest_word(S: Sequence[GroupElt], target: GroupElt) -> List[int]:
    """
    Shortest word in the generators S (positive letters only) evaluating to target.

    Breadth-first search from e; ties are broken by the order of S.

    Returns:
        List of indices into S
    """
    G = target.group
    parent: Dict[GroupElt, Tuple[Optional[GroupElt], int]] = {G.identity(): (None, -1)}
    queue = deque([G.identity()])
    while queue and target not in parent:
        x = queue.popleft()
        for a, s in enumerate(S):
            y = x * s
            if y not in parent:
                parent[y] = (x, a)
                queue.append(y)
    if target not in parent:
        raise RingError(f"{target} is not in the subgroup generated by the given elements")
    word = []
    node = target
    while parent[node][0] is not None:
        prev, letter = parent[node]
        word.append(letter)
        node = prev
    word.reverse()
    return word


def solve_coboundary(S: Sequence[GroupElt], target: GroupElt) -> Dict[int, RingElt]:
    """
    Integral s_a with sum_a (e - S_a) s_a = e - target.

    Uses e - g_1...g_L = sum_i g_1...g_{i-1} (e - g_i) along a shortest word.

    Raises:
        RingError: If S does not generate G
    """
    G = target.group
    if not generates(S, G):
        raise RingError("The elements do not generate the group")
    word = shortest_word(S, target)
    coeffs: Dict[int, Dict[int, int]] = {a: {} for a in range(len(S))}
    prefix = G.identity()
    for a in word:
        idx = prefix.index
        coeffs[a][idx] = coeffs[a].get(idx, 0) + 1
        prefix = prefix * S[a]
    solution = {a: RingElt(G, c, Z) for a, c in coeffs.items()}
    check = RingElt.zero(G)
    for a, s in solution.items():
        check = check + RingElt.e_minus(S[a]) * s
    if check != RingElt.e_minus(target):
        raise RingError("Coboundary identity failed")
    logger.trace(f"Coboundary for {target}: word length {len(word)}")
    return solution
