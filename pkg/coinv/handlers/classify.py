import argparse
from typing import Any, Dict

from coinv.algebra.group_ring import RingError
from coinv.schemas import RunReport
from coinv.services.morphism_service import TransferError, classify_general
from coinv.services.presentation_service import (
    PresentationError,
    build_presentation,
    standard_data,
)
from coinv.utils import (
    FixtureParseError,
    dump_fixture,
    error_report,
    parse_element_file,
    parse_fixture,
    parse_group,
    read_text,
)

COMMAND = "classify"


def register(subparsers, parents) -> None:
    parser = subparsers.add_parser(COMMAND, parents=parents, help="Residues of a torsion class of N(A,B)")
    parser.add_argument("element", help="Element file: lines 'a b : <ring element>'")
    parser.add_argument("--group", help="Group for standard data (labels p1..pn)")
    parser.add_argument("--data", help="Cocycle fixture file for non-standard data")
    parser.set_defaults(handler=cmd_classify, render=render)


def cmd_classify(args: argparse.Namespace) -> RunReport:
    """
    Residues t_ij * d(i,j) mod d(i,j) of the class of the element, with its order in N(A,B).

    Non-standard data is transferred to standard data first.
    """
    inputs: Dict[str, Any] = {"group": args.group, "element": args.element}
    try:
        if args.data:
            data = parse_fixture(read_text(args.data))
            inputs["data"] = dump_fixture(data)
        elif args.group is not None:
            data = standard_data(parse_group(args.group))
        else:
            raise FixtureParseError("Give --group or --data")
        r = parse_element_file(read_text(args.element), data)
        inputs["element"] = r
        order = build_presentation(data).quotient.order(r)
        if order == float("inf"):
            raise PresentationError("Class is not torsion")
        residues = classify_general(data, r)
    except (FixtureParseError, RingError, PresentationError, TransferError) as e:
        return error_report(COMMAND, inputs, e)
    return RunReport(
        command=COMMAND,
        inputs_digest=RunReport.digest(inputs),
        payload={
            "group": data.group.literal(),
            "order": order,
            "residues": {f"{i},{j}": t for (i, j), t in residues.items()},
            "zero": not any(residues.values()),
        },
    )


def render(report: RunReport) -> str:
    p = report.payload
    if "error" in p:
        return f"error: {p['error']}"
    lines = [f"group: {p['group']}", f"order: {p['order']}"]
    lines += [f"residue ({pair}): {t}" for pair, t in p["residues"].items()]
    lines.append("in A + B" if p["zero"] else "not in A + B")
    return "\n".join(lines)
