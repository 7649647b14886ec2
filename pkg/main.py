"""Command-line front end of the CB-cPIR laboratory."""

import argparse
import logging
import math
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np
from pydantic import ValidationError

from config.presets import load_preset
from config.settings import settings
from models.errors import CBPIRError, CodecError, EXIT_CODES
from models.schemas import (
    AttackConfig,
    AttackStatus,
    BatchOrder,
    ErrorCategory,
    RateConfig,
    SchemeKind,
    SchemeParams,
)
from services.cryptanalysis import (
    attack_cost,
    check_attack_feasible,
    prop2_bound,
    recover_index,
    subquery_attack,
)
from services.diagnostics import run_selftest
from services.pir_scheme import (
    PIRSession,
    extract_original,
    fields_for,
    query_cbcpir,
    query_original,
    random_database,
    server_answer,
    traffic_accounting,
)
from services.rate_analysis import AMORTIZATIONS, CURVE_HEADER, TableEmitter, file_size_grid
from utils.file_utils import FrameKind, FileUtils

logger = logging.getLogger(__name__)

REPORT_EXCLUDE = ("wall_time_s",)


def configure_logging() -> None:
    logging.basicConfig(
        level=getattr(logging, settings.log_level.upper()),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        stream=sys.stderr,
    )


def _amortization(value: str) -> float:
    if value == "inf":
        return math.inf
    if value in ("1", "100"):
        return float(value)
    raise argparse.ArgumentTypeError("t must be 1, 100 or inf")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cbpir", description="Code-based PIR schemes, their rates and attacks")
    sub = parser.add_subparsers(dest="command", required=True)

    def scheme_options(cmd: argparse.ArgumentParser, preset: str) -> None:
        cmd.add_argument("--preset", default=preset, help="built-in preset name or key=value preset file")
        cmd.add_argument("--seed", type=int, default=settings.default_seed, help="RNG seed (u64)")
        cmd.add_argument("--m", type=int, help="override the number of files")
        cmd.add_argument("--L", type=int, help="override the rows per file")
        cmd.add_argument("--f", type=int, help="override the files per beta session")
        cmd.add_argument("--out", type=Path, help="directory for artifacts")

    demo = sub.add_parser("demo", help="database, query, answer and extraction round trip")
    scheme_options(demo, "toy16")
    demo.add_argument("--scheme", choices=[kind.value for kind in SchemeKind], default=SchemeKind.CBCPIR.value)
    demo.add_argument("--index", type=int, help="file to retrieve (default: drawn from the seed)")

    attack = sub.add_parser("attack", help="plant an index in a CB-cPIR query and recover it")
    scheme_options(attack, "toy16")
    attack.add_argument("--workers", type=int, default=settings.workers)
    attack.add_argument("--rows-per-block", type=int, help="rows p taken from each block (default: auto)")
    attack.add_argument("--batch-order", choices=[order.value for order in BatchOrder], default="natural")
    attack.add_argument("--index", type=int, help="planted index (default: drawn from the seed)")
    attack.add_argument("--query-frames", type=Path, help="attack the QUERY and QUERY_BETA frames of this file")

    subquery = sub.add_parser("subquery", help="subquery attack on the original scheme")
    scheme_options(subquery, "toy16")
    subquery.add_argument("--index", type=int, help="planted index (default: drawn from the seed)")

    rates = sub.add_parser("rates", help="rate table (1) or security/attack-cost table (2)")
    rates.add_argument("--table", type=int, choices=(1, 2), default=1)
    rates.add_argument("--format", choices=("csv",), default="csv")
    rates.add_argument("--out", type=Path)

    cost = sub.add_parser("cost", help="attack cost model and subquery failure bound")
    scheme_options(cost, "table1-row1")

    curves = sub.add_parser("curves", help="rate curves against XPIR (figure 4) or SimplePIR (figure 5)")
    curves.add_argument("--figure", type=int, choices=(4, 5), default=4)
    curves.add_argument("--preset", help="CB-cPIR parameters (default: the figure's own preset)")
    curves.add_argument("--t", type=_amortization, action="append", help="SimplePIR hint amortization")
    curves.add_argument("--file-size", type=float, help="evaluate every scheme at this one file size in bits")
    curves.add_argument("--format", choices=("csv",), default="csv")
    curves.add_argument("--out", type=Path)

    selftest = sub.add_parser("selftest", help="run the invariant suite")
    selftest.add_argument("--seed", type=int, default=settings.default_seed)
    return parser


def _params(args: argparse.Namespace) -> SchemeParams:
    params = load_preset(args.preset).params
    overrides = {key: getattr(args, key) for key in ("m", "L", "f") if getattr(args, key, None) is not None}
    return params.with_updates(**overrides) if overrides else params


def _pick_index(args: argparse.Namespace, params: SchemeParams, rng: np.random.Generator) -> int:
    return int(rng.integers(params.m)) if args.index is None else args.index


def _emit(lines: str, out: Optional[Path], name: str) -> None:
    sys.stdout.write(lines)
    if out is not None:
        FileUtils.write_text(FileUtils.ensure_output_dir(out) / name, lines)


def cmd_demo(args: argparse.Namespace) -> int:
    params = _params(args)
    rng = np.random.default_rng(args.seed)
    db = random_database(params, rng)
    i0 = _pick_index(args, params, rng)
    frames = [FileUtils.encode_frame(FrameKind.DATABASE, db.X, params.q_base, params.q_exp)]

    if args.scheme == SchemeKind.ORIGINAL.value:
        bundle, secret = query_original(params, i0, rng)
        response = server_answer(db, bundle)
        files = {i0: extract_original(response, secret, params)}
        bundles, responses = [bundle], [response]
    else:
        session = PIRSession(params, rng)
        targets = [i0] + [int(t) for t in rng.integers(params.m, size=params.f - 1)]
        files, bundles, responses = {}, [], []
        for target in targets:
            bundle, secret = session.query(target)
            response = server_answer(db, bundle)
            files[target] = session.extract(response, secret)
            bundles.append(bundle)
            responses.append(response)

    for bundle, response in zip(bundles, responses):
        frames.append(FileUtils.encode_frame(FrameKind.QUERY, bundle.Q, params.q_base, params.q_exp, params.s))
        if bundle.Q_beta is not None:
            frames.append(FileUtils.encode_frame(FrameKind.QUERY_BETA, bundle.Q_beta,
                                                 params.q_base, params.q_exp, params.s))
        frames.append(FileUtils.encode_frame(FrameKind.RESPONSE, response.R, params.q_base, params.q_exp, params.s))
        if response.R_beta is not None:
            frames.append(FileUtils.encode_frame(FrameKind.RESPONSE_BETA, response.R_beta,
                                                 params.q_base, params.q_exp, params.s))

    matches = all(np.array_equal(block, db.file(t)) for t, block in files.items())
    lines = [f"scheme={args.scheme}", f"requested={','.join(str(t) for t in files)}",
             f"match={str(matches).lower()}"]
    if args.scheme == SchemeKind.CBCPIR.value:
        traffic = traffic_accounting(params, session)
        lines += [f"upload_symbols={traffic.upload_symbols}", f"download_symbols={traffic.download_symbols}",
                  f"rate={traffic.rate}"]
    _emit("\n".join(lines) + "\n", args.out, "demo_report.txt")
    if args.out is not None:
        FileUtils.write_frames(FileUtils.ensure_output_dir(args.out) / "demo_frames.bin", frames)
    return 0 if matches else EXIT_CODES[ErrorCategory.SYSTEM_ERROR]


def _load_query_pair(path: Path, params: SchemeParams):
    """First QUERY and QUERY_BETA frames of a frame file, as F_{q^s} arrays."""
    found = {}
    for header, symbols in FileUtils.read_frames(path):
        if header["kind"] in (FrameKind.QUERY, FrameKind.QUERY_BETA) and header["kind"] not in found:
            if (header["p"], header["e"], header["s"]) != (params.q_base, params.q_exp, params.s):
                raise CodecError(f"{header['kind'].name} frame is over GF({header['p']}^{header['e']})^"
                                 f"{header['s']}, the preset needs GF({params.q_base}^{params.q_exp})^{params.s}")
            found[header["kind"]] = symbols
    missing = [kind.name for kind in (FrameKind.QUERY, FrameKind.QUERY_BETA) if kind not in found]
    if missing:
        raise CodecError(f"{path} has no {' or '.join(missing)} frame")
    base, _ = fields_for(params)
    return base.GF(found[FrameKind.QUERY]), base.GF(found[FrameKind.QUERY_BETA])


def cmd_attack(args: argparse.Namespace) -> int:
    params = _params(args)
    rng = np.random.default_rng(args.seed)
    check_attack_feasible(params)
    if args.query_frames is not None:
        i0 = args.index
        Q, Q_beta = _load_query_pair(args.query_frames, params)
    else:
        i0 = _pick_index(args, params, rng)
        bundle, _ = query_cbcpir(params, i0, rng)
        Q, Q_beta = bundle.Q, bundle.Q_beta
    config = AttackConfig(rows_per_block=args.rows_per_block, workers=args.workers,
                          batch_order=BatchOrder(args.batch_order), seed=args.seed)
    report = recover_index(Q, Q_beta, params, config, planted_index=i0)
    sys.stdout.write(report.to_key_value())
    if args.out is not None:
        out = FileUtils.ensure_output_dir(args.out)
        FileUtils.write_text(out / "attack_report.txt", report.to_key_value(exclude=REPORT_EXCLUDE))
        FileUtils.write_frames(out / "attack_frames.bin", [
            FileUtils.encode_frame(FrameKind.QUERY, Q, params.q_base, params.q_exp, params.s),
            FileUtils.encode_frame(FrameKind.QUERY_BETA, Q_beta, params.q_base, params.q_exp, params.s),
        ])
    if report.status == AttackStatus.UNDECIDED:
        return EXIT_CODES[ErrorCategory.ATTACK_UNDECIDED]
    return 0


def cmd_subquery(args: argparse.Namespace) -> int:
    params = _params(args)
    rng = np.random.default_rng(args.seed)
    i0 = _pick_index(args, params, rng)
    bundle, _ = query_original(params, i0, rng)
    outcome = subquery_attack(bundle.Q, params)
    recovered = "" if outcome.recovered_index is None else outcome.recovered_index
    lines = [f"planted_index={i0}", f"recovered_index={recovered}", f"threshold={outcome.threshold}",
             f"candidates={','.join(str(j) for j in outcome.candidates)}",
             f"ranks={','.join(str(rank) for rank in outcome.ranks)}"]
    _emit("\n".join(lines) + "\n", args.out, "subquery_report.txt")
    return 0 if outcome.recovered_index is not None else EXIT_CODES[ErrorCategory.ATTACK_UNDECIDED]


def _csv_text(header, rows) -> str:
    return "".join(",".join(str(cell) for cell in row) + "\n" for row in [header, *rows])


def cmd_rates(args: argparse.Namespace) -> int:
    emitter = TableEmitter()
    if args.table == 1:
        sys.stdout.write(_csv_text(emitter.TABLE1_HEADER, emitter.table1_rows()))
    else:
        sys.stdout.write(_csv_text(emitter.TABLE2_HEADER, emitter.table2_rows()))
    if args.out is not None:
        emitter.write_table(args.table, args.out)
    return 0


def cmd_cost(args: argparse.Namespace) -> int:
    params = _params(args)
    cost = attack_cost(params)
    lines = [f"{key}={value}" for key, value in cost.model_dump().items()]
    if params.fq_width >= 2 * params.delta:
        bound = prop2_bound(params)
        lines += [f"subquery_failure_log2={bound.log2_probability:.6f}",
                  f"subquery_bound_vacuous={str(bound.vacuous).lower()}"]
    _emit("\n".join(lines) + "\n", args.out, "cost_report.txt")
    return 0


def cmd_curves(args: argparse.Namespace) -> int:
    preset_name = args.preset or ("fig4-xpir" if args.figure == 4 else "fig5-simplepir")
    config = RateConfig(params=load_preset(preset_name).params)
    amortizations = tuple(args.t) if args.t else AMORTIZATIONS
    emitter = TableEmitter()
    if args.file_size is not None:
        rows = []
        for t in amortizations:
            point = RateConfig(params=config.params, file_size_bits=args.file_size, amortization=t)
            # the CB-cPIR and XPIR rows do not depend on t
            evaluated = emitter.point_rows(args.figure, point)
            rows += evaluated if t == amortizations[0] else [row for row in evaluated if row[1] == "simplepir"]
        rows = emitter.format_curve_rows(rows)
        sys.stdout.write(_csv_text(CURVE_HEADER, rows))
        if args.out is not None:
            FileUtils.write_csv(FileUtils.ensure_output_dir(args.out) / f"figure{args.figure}_point.csv",
                                CURVE_HEADER, rows)
        return 0
    rows = emitter.format_curve_rows(emitter.curve_rows(args.figure, config, file_size_grid(), amortizations))
    sys.stdout.write(_csv_text(CURVE_HEADER, rows))
    if args.out is not None:
        emitter.write_curves(args.figure, config, args.out, preset_name=preset_name, amortizations=amortizations)
    return 0


def cmd_selftest(args: argparse.Namespace) -> int:
    results = run_selftest(args.seed)
    for result in results:
        sys.stdout.write(f"{result.name}={'pass' if result.passed else 'fail'} detail=\"{result.detail}\"\n")
    return 0 if all(result.passed for result in results) else EXIT_CODES[ErrorCategory.SYSTEM_ERROR]


COMMANDS = {
    "demo": cmd_demo,
    "attack": cmd_attack,
    "subquery": cmd_subquery,
    "rates": cmd_rates,
    "cost": cmd_cost,
    "curves": cmd_curves,
    "selftest": cmd_selftest,
}


def _fail(category: ErrorCategory, reason: str) -> int:
    reason = reason.replace('"', "'").replace("\n", " ")
    sys.stderr.write(f'error={category.value} reason="{reason}"\n')
    return EXIT_CODES[category]


def run(argv: Optional[List[str]] = None) -> int:
    """Parse ``argv`` and run one subcommand; returns the exit status."""
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except CBPIRError as e:
        logger.error(f"{args.command} failed: {e}")
        return _fail(e.category, str(e))
    except ValidationError as e:
        return _fail(ErrorCategory.INVALID_PARAMETERS, str(e))
    except Exception as e:
        logger.exception(f"Unexpected failure in {args.command}")
        return _fail(ErrorCategory.SYSTEM_ERROR, str(e))


if __name__ == "__main__":
    configure_logging()
    sys.exit(run())
