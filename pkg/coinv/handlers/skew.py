import argparse
from typing import Any, Dict

from loguru import logger

from coinv.algebra.group_ring import RingError
from coinv.schemas import RunReport
from coinv.services.bv_service import DiagramError, bv_service, dump_diagram, load_diagram
from coinv.services.morphism_service import TransferError
from coinv.services.presentation_service import PresentationError
from coinv.utils import error_report, format_bool, format_factors, format_table

COMMAND = "skew"


def register(subparsers, parents) -> None:
    parser = subparsers.add_parser(COMMAND, parents=parents, help="Stage torsion of a skew product of two diagrams")
    parser.add_argument("--x", required=True, help="Diagram file of the first factor")
    parser.add_argument("--y", required=True, help="Diagram file of the second factor")
    parser.add_argument("--levels", type=int, default=4, help="Number of stages")
    parser.set_defaults(handler=cmd_skew, render=render)


def skew_run(command: str, dX, dY, levels: int, inputs: Dict[str, Any], extra: Dict[str, Any] = None) -> RunReport:
    """Stage report for a loaded pair; exit status 0 only on MATCH"""
    try:
        payload = bv_service.skew_report(dX, dY, levels)
    except (DiagramError, PresentationError, TransferError, RingError) as e:
        return error_report(command, inputs, e)
    if extra:
        payload.update(extra)
    ok = payload["verdict"] == "MATCH"
    if ok:
        logger.success(f"Skew product over {payload['group']}: torsion {payload['predicted']} at all {levels} stages")
    return RunReport(
        command=command,
        inputs_digest=RunReport.digest(inputs),
        payload=payload,
        exit_status=0 if ok else 1,
    )


def cmd_skew(args: argparse.Namespace) -> RunReport:
    inputs: Dict[str, Any] = {"x": args.x, "y": args.y, "levels": args.levels}
    try:
        if args.levels < 1:
            raise DiagramError("--levels must be positive")
        dX = load_diagram(args.x)
        dY = load_diagram(args.y)
    except DiagramError as e:
        return error_report(COMMAND, inputs, e)
    inputs.update({"x": dump_diagram(dX), "y": dump_diagram(dY)})
    return skew_run(COMMAND, dX, dY, args.levels, inputs)


def render(report: RunReport) -> str:
    p = report.payload
    if "error" in p:
        return f"error: {p['error']}"
    lines = [f"group: {p['group']}"]
    if "files" in p:
        lines.append("files: " + " ".join(p["files"]))
    if "heights" in p:
        lines.append("long tower heights: " + " ".join(str(h) for h in p["heights"]))
    lines.append("z-system ranks: x " + " ".join(str(r) for r in p["zsystem"]["x"]["ranks"])
                 + " | y " + " ".join(str(r) for r in p["zsystem"]["y"]["ranks"]))
    lines.append("nondegenerate: x " + " ".join(format_bool(f) for f in p["nondegenerate"]["x"])
                 + " | y " + " ".join(format_bool(f) for f in p["nondegenerate"]["y"]))
    if p["stages"]:
        lines.append(format_table(
            ["stage", "free rank", "torsion", "iso to next"],
            [[s["level"], s["free_rank"], format_factors(s["torsion"]), format_bool(s["iso_to_next"])]
             for s in p["stages"]],
        ))
    lines.append(f"predicted: {format_factors(p['predicted'])}")
    lines.append("assumed, not checked: " + "; ".join(p["assumptions"]))
    lines.append(p["verdict"])
    return "\n".join(lines)
