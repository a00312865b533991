import argparse
from typing import Any, Dict, List

from loguru import logger

from coinv.algebra.abelian import GroupError
from coinv.algebra.group_ring import RingError
from coinv.config import settings
from coinv.schemas import RunReport
from coinv.services.morphism_service import TransferError, morphism_service
from coinv.services.presentation_service import PresentationError, presentation_service, standard_data
from coinv.services.random_service import RandomDataError, random_service
from coinv.utils import (
    FixtureParseError,
    dump_fixture,
    error_report,
    format_bool,
    format_factors,
    format_table,
    format_verdict,
    parse_fixture,
    parse_group,
    read_text,
)

COMMAND = "torsion"


def register(subparsers, parents) -> None:
    parser = subparsers.add_parser(COMMAND, parents=parents, help="Torsion of N(A,B): computed vs predicted")
    parser.add_argument("--group", help="Cyclic factor orders; standard data unless --data is given")
    parser.add_argument("--data", help="Cocycle fixture file with group, A and B lines")
    parser.add_argument("--random", type=int, default=0, metavar="K", help="Also check K seeded random data sets")
    parser.set_defaults(handler=cmd_torsion, render=render)


def _check(data) -> Dict[str, Any]:
    row = presentation_service.torsion_report(data)
    if not data.is_standard():
        row["iso"] = morphism_service.standard_round_trip(data)["forward"]["is_iso"]
    return row


def cmd_torsion(args: argparse.Namespace) -> RunReport:
    """
    Build N(A,B) for the given (or standard) data and compare its torsion with G wedge G.

    Exit status is nonzero on any MISMATCH, a failed isomorphism check or invalid input.
    """
    seed = settings.DEFAULT_SEED if args.seed is None else args.seed
    inputs: Dict[str, Any] = {"group": args.group, "random": args.random, "seed": seed}
    try:
        if args.data:
            data = parse_fixture(read_text(args.data))
            inputs["data"] = dump_fixture(data)
            if args.group and parse_group(args.group) != data.group:
                raise FixtureParseError(f"--group {args.group} differs from the fixture group {data.group.literal()}")
        elif args.group is not None:
            data = standard_data(parse_group(args.group))
        else:
            raise FixtureParseError("Give --group or --data")

        primary = _check(data)
        random_rows: List[Dict[str, Any]] = []
        rng = random_service.rng(seed)
        for _ in range(args.random):
            sample = random_service.random_cocycle_data(data.group, rng)
            row = _check(sample)
            row["data"] = dump_fixture(sample).strip().replace("\n", "; ")
            random_rows.append(row)
    except (FixtureParseError, GroupError, RingError, PresentationError, TransferError, RandomDataError) as e:
        return error_report(COMMAND, inputs, e)

    rows = [primary] + random_rows
    ok = all(r["match"] and r.get("iso", True) for r in rows)
    if ok:
        logger.success(f"Torsion of N(A,B) over {data.group} matches the prediction ({len(rows)} data sets)")
    return RunReport(
        command=COMMAND,
        inputs_digest=RunReport.digest(inputs),
        payload={**primary, "random": random_rows, "verdict": format_verdict(ok)},
        exit_status=0 if ok else 1,
    )


def render(report: RunReport) -> str:
    p = report.payload
    if "error" in p:
        return f"error: {p['error']}"
    lines = [
        f"group: {p['group']}",
        f"labels: |A|={p['labels'][0]} |B|={p['labels'][1]}",
        f"free rank: {p['free_rank']}",
        f"computed: {format_factors(p['computed'])}",
        f"predicted: {format_factors(p['predicted'])}",
    ]
    if "iso" in p:
        lines.append(f"torsion iso to standard: {format_bool(p['iso'])}")
    if p["random"]:
        lines.append("")
        lines.append(format_table(
            ["#", "|A|", "|B|", "free", "computed", "iso", "verdict"],
            [
                [i, r["labels"][0], r["labels"][1], r["free_rank"], format_factors(r["computed"]),
                 format_bool(r.get("iso")), format_verdict(r["match"])]
                for i, r in enumerate(p["random"], start=1)
            ],
        ))
    lines.append(p["verdict"])
    return "\n".join(lines)
