"""Parsing and formatting helpers shared by the command handlers"""
import re
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

from loguru import logger

from coinv.algebra.abelian import FinAbGroup, GroupError
from coinv.algebra.group_ring import RingElt, RingError
from coinv.algebra.zlinalg import IntMatrix, LinAlgError
from coinv.schemas import RunReport
from coinv.services.presentation_service import CocycleData, ModuleBasis


class FixtureParseError(Exception):
    """Malformed fixture, element or matrix file"""
    pass


def read_text(source: Union[str, Path]) -> str:
    """Contents of a file, or of standard input for '-'"""
    if str(source) == "-":
        return sys.stdin.read()
    try:
        return Path(source).read_text(encoding="utf-8")
    except OSError as e:
        raise FixtureParseError(f"Cannot read {source}: {e}")


def _content_lines(text: str) -> List[tuple]:
    lines = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if line:
            lines.append((lineno, line))
    return lines


def parse_group(text: str) -> FinAbGroup:
    try:
        return FinAbGroup.parse(text)
    except GroupError as e:
        raise FixtureParseError(str(e))


# ==================== COCYCLE FIXTURES ====================

_LABEL_VALUE = re.compile(r"\s*([^\s=()]+)\s*=\s*(\([^()]*\)|e)(?=\s|$)")


def _label_values(key: str, field: str) -> List[tuple]:
    """Split a fixture field into (label, literal) pairs; every token must be label=(...) or label=e"""
    pairs, pos = [], 0
    while field[pos:].strip():
        match = _LABEL_VALUE.match(field, pos)
        if match is None:
            bad = field[pos:].split()[0]
            raise FixtureParseError(f"{key}: expected label=(...) or label=e, got {bad!r}")
        pairs.append(match.groups())
        pos = match.end()
    return pairs


def parse_fixture(text: str) -> CocycleData:
    """
    Parse a cocycle fixture.

    Format (one field per line, '#' starts a comment):
        group: 2,4
        A: a1=(1,0) a2=(0,1)
        B: b1=(1,1) b2=(0,1)

    Raises:
        FixtureParseError: On a missing or repeated field, or a bad element literal
        PresentationError: If the data violates the CocycleData invariants
    """
    fields: Dict[str, str] = {}
    for lineno, line in _content_lines(text):
        key, sep, value = line.partition(":")
        key = key.strip()
        if not sep or key not in ("group", "A", "B"):
            raise FixtureParseError(f"Line {lineno}: expected 'group:', 'A:' or 'B:', got {line!r}")
        if key in fields:
            raise FixtureParseError(f"Line {lineno}: field {key!r} given twice")
        fields[key] = value.strip()
    for key in ("group", "A", "B"):
        if key not in fields:
            raise FixtureParseError(f"Fixture has no {key!r} line")

    G = parse_group(fields["group"])
    sides = {}
    for key in ("A", "B"):
        labels, values = [], {}
        for label, literal in _label_values(key, fields[key]):
            try:
                values[label] = G.parse_element(literal)
            except GroupError as e:
                raise FixtureParseError(f"{key}: {e}")
            labels.append(label)
        if not labels:
            raise FixtureParseError(f"No label=value pairs on the {key!r} line")
        sides[key] = (labels, values)
    return CocycleData(G, sides["A"][0], sides["B"][0], sides["A"][1], sides["B"][1])


def dump_fixture(data: CocycleData) -> str:
    a = " ".join(f"{label}={data.mu_a[label].literal()}" for label in data.A)
    b = " ".join(f"{label}={data.mu_b[label].literal()}" for label in data.B)
    return f"group: {data.group.literal()}\nA: {a}\nB: {b}\n"


# ==================== ELEMENT FILES ====================

def parse_element_file(text: str, data: CocycleData) -> List[int]:
    """
    Parse an element of M(A,B): one line "a b : <ring element>" per nonzero component.

    Raises:
        FixtureParseError: On unknown labels, non-integral coefficients or bad syntax
    """
    basis = ModuleBasis(data.group, data.A, data.B)
    components: Dict[tuple, RingElt] = {}
    for lineno, line in _content_lines(text):
        head, sep, body = line.partition(":")
        labels = head.split()
        if not sep or len(labels) != 2:
            raise FixtureParseError(f"Line {lineno}: expected 'a b : element', got {line!r}")
        a, b = labels
        if a not in data.A or b not in data.B:
            raise FixtureParseError(f"Line {lineno}: unknown labels ({a}, {b})")
        try:
            value = RingElt.parse(body, data.group)
        except RingError as e:
            raise FixtureParseError(f"Line {lineno}: {e}")
        if not value.is_integral():
            raise FixtureParseError(f"Line {lineno}: element of M(A,B) must be integral")
        components[(a, b)] = components[(a, b)] + value if (a, b) in components else value
    return [int(x) for x in basis.vector(components)]


def dump_element(vec: Sequence[int], data: CocycleData) -> str:
    basis = ModuleBasis(data.group, data.A, data.B)
    lines = [
        f"{a} {b} : {value.to_text()}"
        for (a, b), value in basis.components(vec).items()
        if not value.is_zero()
    ]
    return "\n".join(lines) + "\n"


def parse_matrix(text: str) -> IntMatrix:
    try:
        return IntMatrix.from_text(text)
    except LinAlgError as e:
        raise FixtureParseError(str(e))


# ==================== FORMATTING ====================

def format_factors(factors: Sequence[int]) -> str:
    return "[" + ",".join(str(d) for d in factors) + "]"


def format_verdict(match: bool) -> str:
    return "MATCH" if match else "MISMATCH"


def format_bool(value: Optional[bool]) -> str:
    if value is None:
        return "-"
    return "yes" if value else "no"


def format_table(headers: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    """Left-aligned plain-text table"""
    cells = [[str(h) for h in headers]] + [[str(c) for c in row] for row in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(headers))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in cells]
    return "\n".join(lines)


def error_report(command: str, inputs: Dict[str, Any], error: Exception) -> RunReport:
    """Failed run: the error message becomes the payload, exit status 1"""
    logger.error(f"{command} failed: {error}")
    return RunReport(
        command=command,
        inputs_digest=RunReport.digest(inputs),
        payload={"error": str(error)},
        exit_status=1,
    )
