# =====================================================
# XRAYBELL - X-RAY BELL-STATE SOURCE DESIGNER
# =====================================================

import argparse
import csv
import json
import logging
import os
import sys
from io import StringIO
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from pydantic import ValidationError

from bellfinder import bell_table, entanglement_profile, scan
from config import LOG_LEVELS, RunConfig, Settings, build_run_config
from crystal import kinematics, make_reflection, split
from errors import ConfigError, FeasibilityError, NoSolutionError, XrayBellError
from models import BeamKinematics, Branch, OutputFormat
from phasematch import momentum_transfer, solve_signal_idler

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NO_SOLUTION = 2
EXIT_IO = 3

PM_COLUMNS = ["theta_p", "branch", "theta_s", "theta_i", "residual"]
SCAN_COLUMNS = ["theta_p", "branch", "feasible", "a2", "b2", "c2", "d2"]
BELL_COLUMNS = ["state", "theta_p", "theta_s", "theta_i", "branch", "amplitude"]
ENT_COLUMNS = ["theta_p", "branch", "feasible", "concurrence_h", "concurrence_v"]

BRANCH_ORDER = (Branch.PLUS, Branch.MINUS)

Row = Dict[str, Any]

# =====================================================
# LOGGING CONFIGURATION
# =====================================================

class CustomFormatter(logging.Formatter):
    """Custom formatter with colors for different log levels"""
    grey = "\x1b[38;20m"
    blue = "\x1b[34;20m"
    yellow = "\x1b[33;20m"
    red = "\x1b[31;20m"
    bold_red = "\x1b[31;1m"
    reset = "\x1b[0m"

    FORMATS = {
        logging.DEBUG: grey,
        logging.INFO: blue,
        logging.WARNING: yellow,
        logging.ERROR: red,
        logging.CRITICAL: bold_red
    }

    def format(self, record):
        log_fmt = f"{self.FORMATS.get(record.levelno)}%(asctime)s - %(name)s - %(levelname)s - %(message)s{self.reset}"
        formatter = logging.Formatter(log_fmt, datefmt="%Y-%m-%d %H:%M:%S")
        return formatter.format(record)


logger = logging.getLogger("xraybell")


def setup_logging(level: Optional[str] = None, log_file: Optional[str] = None) -> logging.Logger:
    """Keep exactly one console handler on the current stderr, plus an optional file handler"""
    level_name = (level or Settings.LOG_LEVEL).upper()
    logger.setLevel(level_name)

    # stderr may have been swapped (and the old one closed) since the last call
    for handler in list(logger.handlers):
        if isinstance(handler, logging.StreamHandler) and not isinstance(handler, logging.FileHandler):
            logger.removeHandler(handler)
            handler.close()

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(level_name)
    console_handler.setFormatter(CustomFormatter())
    logger.addHandler(console_handler)

    if log_file:
        known = {getattr(h, "baseFilename", None) for h in logger.handlers}
        if os.path.abspath(log_file) not in known:
            file_handler = logging.FileHandler(log_file)
            file_handler.setLevel(logging.DEBUG)
            file_handler.setFormatter(logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s'))
            logger.addHandler(file_handler)

    return logger

# =====================================================
# ARGUMENT PARSING
# =====================================================

class CliParser(argparse.ArgumentParser):
    """argparse that reports usage errors as exceptions instead of exiting with 2"""

    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


def build_parser() -> CliParser:
    common = CliParser(add_help=False)
    common.add_argument("--pump-kev", type=float, help="pump photon energy in keV (default 25)")
    common.add_argument("--fraction", type=float, help="signal energy fraction ω_s/ω_p in (0, 1)")
    common.add_argument("--lattice-a", type=float, help="cubic lattice constant in Å")
    common.add_argument("--miller", help="reflection as h,k,l (default 1,1,1)")
    common.add_argument("--theta-min", type=float, help="scan start, radians")
    common.add_argument("--theta-max", type=float, help="scan end, radians")
    common.add_argument("--samples", type=int, help="scan grid size")
    common.add_argument("--format", choices=[f.value for f in OutputFormat])
    common.add_argument("--out", help="output file (default: standard output)")
    common.add_argument("--config", help="key=value config file")
    common.add_argument("--log-level", choices=LOG_LEVELS, type=str.upper)

    parser = CliParser(prog="xraybell", description="Design x-ray Bell-state sources in diamond")
    commands = parser.add_subparsers(dest="command", metavar="COMMAND")
    commands.required = True

    pm = commands.add_parser("pm", parents=[common], help="phase-matched signal/idler angles at one pump angle")
    pm.add_argument("--theta-p", type=float, required=True, help="pump angle, radians")

    commands.add_parser("scan", parents=[common], help="squared channel amplitudes over the pump angle")

    bell = commands.add_parser("bell", parents=[common], help="maximally entangled operating points")
    bell.add_argument("--branches", choices=["minus", "plus", "both"])

    commands.add_parser("ent", parents=[common], help="concurrence of the pair state over the pump angle")

    return parser


def flags_from_args(args: argparse.Namespace) -> Dict[str, Any]:
    return {
        "pump_kev": args.pump_kev,
        "fraction": args.fraction,
        "lattice_a": args.lattice_a,
        "miller": args.miller,
        "theta_min": args.theta_min,
        "theta_max": args.theta_max,
        "samples": args.samples,
        "format": args.format,
        "out": args.out,
        "branches": getattr(args, "branches", None),
    }

# =====================================================
# COMMANDS
# =====================================================

def _kinematics(config: RunConfig) -> BeamKinematics:
    reflection = make_reflection(config.lattice_constant_angstrom, config.miller)
    return kinematics(reflection, split(config.pump_energy_kev, config.signal_fraction))


def cmd_pm(config: RunConfig, theta_p: float) -> List[Row]:
    kin = _kinematics(config)
    q = momentum_transfer(theta_p, kin.k_pump, kin.g)
    solutions = solve_signal_idler(q, kin.k_signal, kin.k_idler, theta_p=theta_p)
    if not solutions:
        raise NoSolutionError(
            f"No phase-matched signal/idler pair at θp={theta_p} rad "
            f"({config.pump_energy_kev} keV, fraction {config.signal_fraction})"
        )

    return [
        {
            "theta_p": theta_p,
            "branch": s.branch.value,
            "theta_s": s.theta_s,
            "theta_i": s.theta_i,
            "residual": s.residual,
        }
        for s in solutions
    ]


def cmd_scan(config: RunConfig) -> List[Row]:
    curves = scan(
        config.pump_energy_kev,
        config.signal_fraction,
        theta_range=config.theta_range,
        n_samples=config.samples,
        reflection=make_reflection(config.lattice_constant_angstrom, config.miller)
    )

    rows = []
    for branch in BRANCH_ORDER:
        for sample in curves[branch].samples:
            rows.append({
                "theta_p": sample.theta_p,
                "branch": branch.value,
                "feasible": sample.feasible,
                "a2": sample.a2,
                "b2": sample.b2,
                "c2": sample.c2,
                "d2": sample.d2,
            })
    return rows


def cmd_bell(config: RunConfig) -> List[Row]:
    points = bell_table(
        config.pump_energy_kev,
        config.signal_fraction,
        theta_range=config.theta_range,
        n_samples=config.samples,
        reflection=make_reflection(config.lattice_constant_angstrom, config.miller),
        branches=config.branches
    )

    return [
        {
            "state": p.state.value,
            "theta_p": p.theta_p,
            "theta_s": p.theta_s,
            "theta_i": p.theta_i,
            "branch": p.branch.value,
            "amplitude": p.amplitude,
        }
        for p in points
    ]


def cmd_ent(config: RunConfig) -> List[Row]:
    curves = scan(
        config.pump_energy_kev,
        config.signal_fraction,
        theta_range=config.theta_range,
        n_samples=config.samples,
        reflection=make_reflection(config.lattice_constant_angstrom, config.miller)
    )

    rows = []
    for branch in BRANCH_ORDER:
        for sample in entanglement_profile(curves[branch]):
            rows.append({
                "theta_p": sample.theta_p,
                "branch": branch.value,
                "feasible": sample.feasible,
                "concurrence_h": sample.concurrence_h,
                "concurrence_v": sample.concurrence_v,
            })
    return rows

# =====================================================
# SERIALIZATION
# =====================================================

def format_value(value: Any) -> str:
    """CSV cell text: 9 significant digits, empty for missing values"""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".9g")
    return str(value)


def _json_value(value: Any) -> Any:
    if isinstance(value, float):
        return float(format(value, ".9g"))
    return value


def render_csv(columns: Sequence[str], rows: Sequence[Row]) -> str:
    output = StringIO()
    writer = csv.writer(output, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_value(row[c]) for c in columns])
    return output.getvalue()


def render_json(columns: Sequence[str], rows: Sequence[Row], config: RunConfig) -> str:
    payload = {
        "config": json.loads(config.json()),
        "rows": [{c: _json_value(row[c]) for c in columns} for row in rows],
    }
    return json.dumps(payload, indent=2, ensure_ascii=False) + "\n"


def render(columns: Sequence[str], rows: Sequence[Row], config: RunConfig) -> str:
    if config.output_format is OutputFormat.JSON:
        return render_json(columns, rows, config)
    return render_csv(columns, rows)


def emit(text: str, output_path: Optional[str]) -> None:
    if output_path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(output_path, "w", encoding="utf-8", newline="") as f:
        f.write(text)
    logger.info(f"✅ Wrote {output_path}")

# =====================================================
# ENTRY POINT
# =====================================================

COMMANDS: Dict[str, Tuple[List[str], Callable[..., List[Row]]]] = {
    "pm": (PM_COLUMNS, cmd_pm),
    "scan": (SCAN_COLUMNS, cmd_scan),
    "bell": (BELL_COLUMNS, cmd_bell),
    "ent": (ENT_COLUMNS, cmd_ent),
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        Settings.validate()
        args = parser.parse_args(argv)
    except (ConfigError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE

    setup_logging(args.log_level, Settings.LOG_FILE)
    columns, command = COMMANDS[args.command]

    try:
        config = build_run_config(flags_from_args(args), args.config)
        logger.info(
            f"🚀 {args.command}: {config.pump_energy_kev} keV, fraction {config.signal_fraction}, "
            f"reflection {config.miller}"
        )
        if args.command == "pm":
            rows = command(config, args.theta_p)
        else:
            rows = command(config)
        emit(render(columns, rows, config), config.output_path)
    except (NoSolutionError, FeasibilityError) as e:
        logger.error(f"❌ {e}")
        return EXIT_NO_SOLUTION
    except OSError as e:
        logger.error(f"❌ Cannot write output: {e}")
        return EXIT_IO
    except (XrayBellError, ValidationError) as e:
        logger.error(f"❌ {e}")
        return EXIT_USAGE

    logger.info(f"✅ {args.command}: {len(rows)} rows")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
