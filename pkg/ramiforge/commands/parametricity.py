"""
Ramiforge - Parametricity Commands
parametricity (pair of covers) and corollaries (single cover).
"""

from argparse import Namespace
from typing import Any, Dict, List, Tuple
import logging

from ramiforge.commands.common import build_report, dump, open_cover
from ramiforge.errors import PreconditionError
from ramiforge.models import ParametricityVerdict, Report
from ramiforge.services.groups import same_group
from ramiforge.services.parametricity import (
    check_branch_point_hypothesis,
    check_inertia_hypothesis,
    corollaries as cover_corollaries,
    realize_inertia_witness,
)

logger = logging.getLogger(__name__)


def _row(verdict: ParametricityVerdict) -> Dict[str, Any]:
    return {
        "hypothesis": verdict.hypothesis,
        "holds": verdict.holds,
        "exact": verdict.exact,
        "witnesses": " ".join(verdict.witnesses),
        "consequence": verdict.consequence,
    }


def parametricity(args: Namespace, argv: List[str]) -> Tuple[Report, int]:
    """BPH and, for covers with the same group, IH verdicts."""
    c1, d1 = open_cover(args.cover1)
    c2, d2 = open_cover(args.cover2)
    caveats = c1.caveats() + c2.caveats()

    verdicts = [check_branch_point_hypothesis(c1, c2, args.window)]
    if same_group(c1.group, c2.group):
        ih = check_inertia_hypothesis(c1, c2)
        if ih.holds and c1.defining_poly is not None:
            try:
                ih.evidence["realization"] = realize_inertia_witness(c1, c2, ih.witnesses[0], args.window)
            except PreconditionError as e:
                ih.caveats.append(f"IH witness not realized: {e}")
        verdicts.append(ih)
    else:
        caveats.append(f"IH not applicable: groups {c1.group.name} and {c2.group.name} differ")

    for verdict in verdicts:
        caveats.extend(verdict.caveats)
    report = build_report(
        argv,
        {args.cover1: d1, args.cover2: d2},
        result={v.hypothesis: dump(v) for v in verdicts},
        table=[_row(v) for v in verdicts],
        caveats=caveats,
    )
    return report, 0


def corollaries(args: Namespace, argv: List[str]) -> Tuple[Report, int]:
    """Four-branch-point test, and the H2 test when the group is symmetric."""
    cover, digest = open_cover(args.cover)
    verdicts = [dump(v) for v in cover_corollaries(cover)]
    return build_report(argv, {args.cover: digest}, result=verdicts, table=verdicts, caveats=cover.caveats()), 0
