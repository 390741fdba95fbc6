"""
Ramiforge - Prescription Commands
prescribe, predict, verify and group-certify.
"""

from argparse import Namespace
from pathlib import Path
from typing import List, Tuple
import json
import logging

from pydantic import ValidationError

from ramiforge.commands.common import build_report, dump, open_cover, validation_detail
from ramiforge.errors import InputError
from ramiforge.models import PrescriptionRequest, Recipe, Report
from ramiforge.services.cover_file import file_digest
from ramiforge.services.exact_arith import INFINITY, parse_point
from ramiforge.services.oracle import verify_recipe
from ramiforge.services.prescriber import (
    build_recipe,
    certify_group,
    parse_frobenius,
    parse_ramified,
    predict_inertia,
    recipe_points,
)

logger = logging.getLogger(__name__)

MISMATCH_EXIT = 3


def prescribe(args: Namespace, argv: List[str]) -> Tuple[Report, int]:
    """Assemble a recipe from --ramified p:i:a and --frobenius p:class entries."""
    cover, digest = open_cover(args.cover)
    ramified = [parse_ramified(text) for text in args.ramified]
    frobenius = [parse_frobenius(text) for text in args.frobenius]
    try:
        request = PrescriptionRequest(ramified=ramified, unramified_frobenius=frobenius)
    except ValidationError as e:
        raise InputError("Inconsistent prescription request", validation_detail(e))

    recipe = build_recipe(cover, request, seed=args.seed)
    points = recipe_points(cover, recipe, args.points)
    report = build_report(
        argv,
        {args.cover: digest},
        result=dump(recipe),
        table=[{"u": u, "t0": str(t0)} for u, t0 in points],
        caveats=recipe.caveats,
    )
    return report, 0


def predict(args: Namespace, argv: List[str]) -> Tuple[Report, int]:
    """Predicted inertia at one prime for one specialization point."""
    cover, digest = open_cover(args.cover)
    result = predict_inertia(cover, args.prime, parse_point(args.point))
    return build_report(argv, {args.cover: digest}, result=dump(result), caveats=cover.caveats()), 0


def _load_recipe(path: Path) -> Recipe:
    """
    Read a recipe, either bare or wrapped in a prescribe report.

    Raises:
        InputError: unreadable file or invalid recipe
    """
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise InputError(f"Cannot read recipe file {path}", str(e))
    if isinstance(data, dict) and isinstance(data.get("result"), dict):
        data = data["result"]
    try:
        return Recipe.model_validate(data)
    except ValidationError as e:
        raise InputError(f"Invalid recipe in {path}", validation_detail(e))


def verify(args: Namespace, argv: List[str]) -> Tuple[Report, int]:
    """Oracle table for a recipe; exit 3 on any mismatching row."""
    cover, digest = open_cover(args.cover)
    recipe = _load_recipe(args.recipe)
    if recipe.cover != cover.name:
        logger.warning(f"Recipe was built for {recipe.cover}, verifying against {cover.name}")
    table = verify_recipe(cover, recipe, args.samples)
    summary = {
        "cover": cover.name,
        "matched": table.matched,
        "mismatched": table.mismatched,
        "inconclusive": table.inconclusive,
        "all_match": table.all_match,
    }
    report = build_report(
        argv,
        {args.cover: digest, args.recipe: file_digest(args.recipe)},
        result=summary,
        table=[dump(row) for row in table.rows],
        caveats=recipe.caveats,
    )
    if not table.all_match:
        logger.error(f"Verification of {cover.name} found {table.mismatched} mismatching rows")
        return report, MISMATCH_EXIT
    return report, 0


def group_certify(args: Namespace, argv: List[str]) -> Tuple[Report, int]:
    """Frobenius-sampling certificate for the Galois group of one specialization."""
    cover, digest = open_cover(args.cover)
    t0 = parse_point(args.point)
    if t0 is INFINITY:
        raise InputError("group-certify needs a finite point")
    certificate = certify_group(cover, t0, args.budget, args.seed)
    return build_report(argv, {args.cover: digest}, result=dump(certificate), caveats=cover.caveats()), 0
