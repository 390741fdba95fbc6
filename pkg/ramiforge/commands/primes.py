"""
Ramiforge - Prime Commands
classify-primes, divisors and witness.
"""

from argparse import Namespace
from typing import List, Tuple
import logging

from sympy import primerange

from ramiforge.commands.common import build_report, dump, open_cover
from ramiforge.models import Report
from ramiforge.services.cover import classify_prime
from ramiforge.services.parametricity import divisor_table
from ramiforge.services.prescriber import ramification_witness

logger = logging.getLogger(__name__)


def classify_primes(args: Namespace, argv: List[str]) -> Tuple[Report, int]:
    """Good/Bad table for every prime up to the bound."""
    cover, digest = open_cover(args.cover)
    rows = [classify_prime(cover, int(p)) for p in primerange(2, args.up_to + 1)]
    bad = [row.p for row in rows if not row.good]
    logger.info(f"{cover.name}: {len(bad)} bad primes ≤ {args.up_to}")
    report = build_report(
        argv,
        {args.cover: digest},
        result={"cover": cover.name, "up_to": args.up_to, "bad": bad},
        table=[{"p": row.p, "verdict": row.verdict, "reasons": "; ".join(row.reasons)} for row in rows],
        caveats=cover.caveats(),
    )
    return report, 0


def divisors(args: Namespace, argv: List[str]) -> Tuple[Report, int]:
    """Prime divisors of the branch-locus polynomials in both charts."""
    cover, digest = open_cover(args.cover)
    rows = divisor_table(cover, args.up_to)
    report = build_report(
        argv,
        {args.cover: digest},
        result={
            "cover": cover.name,
            "up_to": args.up_to,
            "divisors": [row.p for row in rows if row.status == "divisor"],
            "undetermined": [row.p for row in rows if row.status == "undetermined"],
        },
        table=[dump(row) for row in rows],
        caveats=cover.caveats(),
    )
    return report, 0


def witness(args: Namespace, argv: List[str]) -> Tuple[Report, int]:
    """A specialization point ramified at p, or why none exists."""
    cover, digest = open_cover(args.cover)
    result = ramification_witness(cover, args.prime)
    return build_report(argv, {args.cover: digest}, result=dump(result), caveats=cover.caveats()), 0
