import argparse
import csv
import io
import json
import logging
import os
import sys
import tempfile
from typing import Any, List, Optional

import numpy as np
from pydantic import BaseModel, ValidationError

from app import commands  # noqa: F401  registers the lab tools
from app.commands import CommandError
from app.config import LOG_LEVEL
from models.errors import LabError
from registry.cli_integration import register_lab_commands
from registry.client import lab_instance as lab

# Set up logging
logging.basicConfig(
    level=LOG_LEVEL,
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    stream=sys.stderr,
)
logger = logging.getLogger("app")

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INVALID = 2


# ---------------------------
# Output formatting
# ---------------------------
def to_plain(value: Any) -> Any:
    """JSON-ready copy: floats to 15 significant digits, complex as {re, im}."""
    if isinstance(value, BaseModel):
        return to_plain(value.model_dump())
    if isinstance(value, dict):
        return {str(k): to_plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_plain(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (complex, np.complexfloating)):
        return {"re": to_plain(float(value.real)), "im": to_plain(float(value.imag))}
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if not np.isfinite(value) else float(format(value, ".15g"))
    return value


def render_json(result: Any) -> str:
    return json.dumps(to_plain(result), indent=2, sort_keys=True) + "\n"


def render_csv(result: Any) -> str:
    if not isinstance(result, dict) or "columns" not in result or "rows" not in result:
        raise CommandError(EXIT_INVALID, "This command has no tabular output; use --format json")
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(result["columns"])
    for row in result["rows"]:
        writer.writerow([format(float(v), ".15g") for v in row])
    return buffer.getvalue()


def write_output(text: str, path: Optional[str]):
    """Write to stdout, or atomically replace the file at path."""
    if not path:
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".bo-lab-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except Exception:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise
    logger.info(f"Wrote {path}")


def exit_status(result: Any) -> int:
    if isinstance(result, dict) and result.get("passed") is False:
        return EXIT_FAILED
    return EXIT_OK


# ---------------------------
# Entry point
# ---------------------------
def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bo-lab",
        description="Numerical checks of the Benjamin-Ono semiclassical spectrum",
    )
    register_lab_commands(parser, lab)
    return parser


def run(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_INVALID

    fmt = args.format or "json"
    if args.json and fmt != "json":
        logger.error("--json conflicts with --format csv")
        return EXIT_INVALID

    logger.debug(f"Running {args.tool}")
    try:
        result = args.handler(args)
        text = render_csv(result) if fmt == "csv" else render_json(result)
        write_output(text, args.output)
    except CommandError as e:
        logger.error(e.detail)
        return e.status_code
    except (LabError, ValidationError, ValueError) as e:
        logger.error(f"{type(e).__name__}: {str(e)}")
        return EXIT_INVALID
    except OSError as e:
        logger.error(f"Could not write output: {str(e)}")
        return EXIT_INVALID

    status = exit_status(result)
    if status == EXIT_FAILED:
        logger.warning(f"{args.tool}: verification failed")
    return status


if __name__ == "__main__":
    sys.exit(run())
