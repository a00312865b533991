import argparse

from loguru import logger

from coinv.algebra.abelian import predicted_torsion
from coinv.schemas import RunReport
from coinv.utils import FixtureParseError, error_report, format_factors, parse_group

COMMAND = "predict"


def register(subparsers, parents) -> None:
    parser = subparsers.add_parser(COMMAND, parents=parents, help="Predicted torsion G wedge G")
    parser.add_argument("--group", required=True, help="Cyclic factor orders, e.g. 2,4")
    parser.set_defaults(handler=cmd_predict, render=render)


def cmd_predict(args: argparse.Namespace) -> RunReport:
    """Print the invariant factors of G wedge G"""
    inputs = {"group": args.group}
    try:
        G = parse_group(args.group)
    except FixtureParseError as e:
        return error_report(COMMAND, inputs, e)
    torsion = predicted_torsion(G)
    logger.info(f"Predicted torsion for {G}: {torsion}")
    return RunReport(
        command=COMMAND,
        inputs_digest=RunReport.digest(inputs),
        payload={"group": G.literal(), "torsion": torsion},
    )


def render(report: RunReport) -> str:
    if "error" in report.payload:
        return f"error: {report.payload['error']}"
    return f"torsion: {format_factors(report.payload['torsion'])}"
