import argparse

from coinv.algebra.zlinalg import cokernel_invariants, smith_normal_form
from coinv.schemas import RunReport
from coinv.utils import FixtureParseError, error_report, format_factors, parse_matrix, read_text

COMMAND = "snf"


def register(subparsers, parents) -> None:
    parser = subparsers.add_parser(COMMAND, parents=parents, help="Smith normal form of an integer matrix")
    parser.add_argument("matrix", nargs="?", default="-", help="Matrix file ('-' for standard input)")
    parser.set_defaults(handler=cmd_snf, render=render)


def cmd_snf(args: argparse.Namespace) -> RunReport:
    """Diagonal of S and the cokernel invariants of the row span"""
    try:
        text = read_text(args.matrix)
        A = parse_matrix(text)
    except FixtureParseError as e:
        return error_report(COMMAND, {"matrix": args.matrix}, e)
    inputs = {"matrix": A.data, "ncols": A.ncols}
    snf = smith_normal_form(A, left=False, right=False)
    coker = cokernel_invariants(A.data, A.ncols)
    return RunReport(
        command=COMMAND,
        inputs_digest=RunReport.digest(inputs),
        payload={
            "shape": [A.nrows, A.ncols],
            "diagonal": snf.diagonal,
            "free_rank": coker.free_rank,
            "torsion": list(coker.torsion_factors),
        },
    )


def render(report: RunReport) -> str:
    p = report.payload
    if "error" in p:
        return f"error: {p['error']}"
    diagonal = " ".join(str(d) for d in p["diagonal"])
    return f"S: {diagonal}\ncoker: free {p['free_rank']}, torsion {format_factors(p['torsion'])}"
