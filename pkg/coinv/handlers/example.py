import argparse
from pathlib import Path
from typing import Any, Dict, List

from loguru import logger
from pydantic import ValidationError

from coinv.handlers.skew import render as render_skew
from coinv.handlers.skew import skew_run
from coinv.schemas import RunReport
from coinv.services.bv_service import DiagramError, dump_diagram
from coinv.services.generator_service import (
    RotationSpec,
    convergent_denominators,
    octagonal_pair,
    rotation_diagram,
    rotation_labels,
)
from coinv.utils import FixtureParseError, error_report, parse_group

COMMAND = "example"


def register(subparsers, parents) -> None:
    parser = subparsers.add_parser(COMMAND, parents=parents, help="Built-in diagram pairs and their skew report")
    parser.add_argument("kind", choices=["octagonal", "rotation"])
    parser.add_argument("--levels", type=int, default=4, help="Number of levels (and stages)")
    parser.add_argument("--digits", default="", help="Continued-fraction digits for rotation, e.g. 1,3,2")
    parser.add_argument("--group", default="2,2", help="Label group for rotation (at most two factors)")
    parser.add_argument("--out-dir", help="Write x.bv and y.bv into this directory")
    parser.set_defaults(handler=cmd_example, render=render_skew)


def _digits(text: str, needed: int) -> List[int]:
    try:
        digits = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise FixtureParseError(f"Cannot parse digits: {text!r}")
    if not digits:
        digits = [2]
    while len(digits) < needed:
        digits.append(digits[-1])
    return digits


def cmd_example(args: argparse.Namespace) -> RunReport:
    """Generate the pair, optionally write the diagram files, then run the skew report"""
    inputs: Dict[str, Any] = {"kind": args.kind, "levels": args.levels, "digits": args.digits, "group": args.group}
    try:
        if args.levels < 1:
            raise DiagramError("--levels must be positive")
        if args.kind == "octagonal":
            dX, dY = octagonal_pair(args.levels)
            digits = [2] * (args.levels - 1)
        else:
            digits = _digits(args.digits, args.levels - 1)
            spec = RotationSpec(cf_digits=digits, levels=args.levels)
            x_labels, y_labels = rotation_labels(parse_group(args.group))
            dX, dY = rotation_diagram(spec, x_labels), rotation_diagram(spec, y_labels)
        files: List[str] = []
        if args.out_dir:
            out = Path(args.out_dir)
            out.mkdir(parents=True, exist_ok=True)
            for name, d in (("x.bv", dX), ("y.bv", dY)):
                path = out / name
                path.write_text(dump_diagram(d), encoding="utf-8")
                files.append(str(path))
                logger.info(f"Wrote {path}")
    except (DiagramError, FixtureParseError, ValidationError, OSError) as e:
        return error_report(COMMAND, inputs, e)

    extra = {
        "kind": args.kind,
        "digits": digits[: args.levels - 1],
        "heights": convergent_denominators(digits, args.levels),
        "files": files,
    }
    return skew_run(COMMAND, dX, dY, args.levels, inputs, extra)
