"""
Ramiforge - Command-Line Application
Entry point: logging setup, subcommand wiring and report output.
"""

from typing import List, Optional, TextIO
import argparse
import logging
import sys

from pydantic import ValidationError

from ramiforge import __version__
from ramiforge.commands import parametricity, prescribe, primes
from ramiforge.commands.common import validation_detail, write_report
from ramiforge.config import settings
from ramiforge.errors import RamiforgeError
from ramiforge.models import Diagnostic

logger = logging.getLogger(__name__)


def build_arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ramiforge",
        description=(
            "Construct specialization points of Galois covers of P¹ over Q with prescribed "
            "inertia, verify them with p-adic oracles, and test non-parametricity criteria."
        ),
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--format", choices=["json", "tsv"], default="json", help="Report format (default json).")
    parser.add_argument("--seed", type=int, default=None, help="Seed for randomized splitting (default RAMIFORGE_SEED or 0).")
    parser.add_argument("--log-level", default=None, help="Logging level on stderr (default from settings).")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify-primes", help="Good/Bad table of primes.")
    p.add_argument("cover")
    p.add_argument("--up-to", type=int, default=100)
    p.set_defaults(handler=primes.classify_primes)

    p = sub.add_parser("divisors", help="Prime divisors of the branch locus.")
    p.add_argument("cover")
    p.add_argument("--up-to", type=int, default=100)
    p.set_defaults(handler=primes.divisors)

    p = sub.add_parser("witness", help="A point ramified at p, or NeverRamifies.")
    p.add_argument("cover")
    p.add_argument("--prime", type=int, required=True)
    p.set_defaults(handler=primes.witness)

    p = sub.add_parser("prescribe", help="Recipe realizing prescribed inertia.")
    p.add_argument("cover")
    p.add_argument("--ramified", action="append", default=[], metavar="p:i:a",
                   help="Intersection multiplicity a with orbit i (0-based) at p.")
    p.add_argument("--frobenius", action="append", default=[], metavar="p:class",
                   help="Unramified at p with Frobenius in the given class.")
    p.add_argument("--points", type=int, default=5, help="Sample points listed in the table.")
    p.set_defaults(handler=prescribe.prescribe)

    p = sub.add_parser("predict", help="Predicted inertia at one prime.")
    p.add_argument("cover")
    p.add_argument("--prime", type=int, required=True)
    p.add_argument("--point", required=True, help="t0 as n/d or inf.")
    p.set_defaults(handler=prescribe.predict)

    p = sub.add_parser("verify", help="Oracle verification of a recipe.")
    p.add_argument("cover")
    p.add_argument("--recipe", required=True, help="Recipe JSON or a prescribe report.")
    p.add_argument("--samples", type=int, default=settings.recipe_samples)
    p.set_defaults(handler=prescribe.verify)

    p = sub.add_parser("group-certify", help="Certify the Galois group of a specialization.")
    p.add_argument("cover")
    p.add_argument("--point", required=True)
    p.add_argument("--budget", type=int, default=settings.prime_budget)
    p.set_defaults(handler=prescribe.group_certify)

    p = sub.add_parser("parametricity", help="Branch Point and Inertia Hypothesis verdicts.")
    p.add_argument("cover1")
    p.add_argument("cover2")
    p.add_argument("--window", type=int, default=settings.prime_window)
    p.set_defaults(handler=parametricity.parametricity)

    p = sub.add_parser("corollaries", help="Four-branch and H2 tests for one cover.")
    p.add_argument("cover")
    p.set_defaults(handler=parametricity.corollaries)

    return parser


def configure_logging(level: Optional[str]) -> None:
    logging.basicConfig(
        level=(level or settings.log_level).upper(),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        stream=sys.stderr,
        force=True,
    )


def _emit_diagnostic(error: Diagnostic, fmt: str, stream: TextIO) -> None:
    if fmt == "json":
        stream.write(error.model_dump_json(indent=2))
        stream.write("\n")
    else:
        stream.write(f"# error: {error.error}\n")
        if error.detail:
            stream.write(f"# detail: {error.detail}\n")


def main(argv: Optional[List[str]] = None, stdout: Optional[TextIO] = None) -> int:
    """
    Run one subcommand.

    Returns:
        0 on success, 2 for input and precondition errors, 3 when a
        verification table has a mismatch, 1 for internal inconsistencies
    """
    argv = list(sys.argv[1:] if argv is None else argv)
    stdout = stdout or sys.stdout
    args = build_arg_parser().parse_args(argv)
    configure_logging(args.log_level)
    args.seed = settings.effective_seed(args.seed)
    logger.info(f"ramiforge {__version__}: {args.command} (seed {args.seed})")

    try:
        report, code = args.handler(args, argv)
    except RamiforgeError as e:
        logger.error(f"{args.command} failed: {str(e)}")
        _emit_diagnostic(Diagnostic(error=str(e), detail=e.detail, exit_code=e.exit_code), args.format, stdout)
        return e.exit_code
    except ValidationError as e:
        logger.error(f"{args.command} failed: {str(e)}")
        _emit_diagnostic(Diagnostic(error="invalid input", detail=validation_detail(e)), args.format, stdout)
        return 2

    write_report(report, args.format, stdout)
    return code


if __name__ == "__main__":
    sys.exit(main())
