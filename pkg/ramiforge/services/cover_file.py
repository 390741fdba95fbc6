"""
Ramiforge - Cover File Service
Reads JSON cover descriptions into CoverData.
"""

from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Tuple, Type, TypeVar, Union
import hashlib
import json
import logging

from pydantic import BaseModel, ValidationError
from sympy import Poly, Symbol
from sympy.parsing.sympy_parser import (
    convert_xor,
    implicit_multiplication_application,
    parse_expr,
    standard_transformations,
)
from sympy.polys.domains import QQ
from sympy.polys.polyerrors import PolynomialError

from ramiforge.errors import InputError, RamiforgeError
from ramiforge.models import CoverFile, GroupSpec, OrbitSpec, TermsSpec
from ramiforge.services.cover import BivariatePoly, BranchOrbit, CoverData
from ramiforge.services.exact_arith import PolyQ
from ramiforge.services.groups import AbstractGroup, FiniteGroup, PermGroup, from_cycles
from ramiforge.services.places import AlgPoint

logger = logging.getLogger(__name__)

M = TypeVar("M", bound=BaseModel)

T = Symbol("T")
X = Symbol("X")

_TRANSFORMATIONS = standard_transformations + (convert_xor, implicit_multiplication_application)


def _parse_expression(text: str, symbols: Dict[str, Symbol]):
    try:
        return parse_expr(str(text), local_dict=symbols, transformations=_TRANSFORMATIONS)
    except Exception as e:
        raise InputError(f"Cannot parse polynomial '{text}'", str(e))


def parse_univariate(source: Any) -> PolyQ:
    """
    A polynomial in T given as a string or as coefficients, leading term first.

    Raises:
        InputError: unparseable text or non-rational coefficients
    """
    if isinstance(source, list):
        try:
            return PolyQ.from_desc(Fraction(str(c)) for c in source)
        except (ValueError, ZeroDivisionError) as e:
            raise InputError(f"Bad coefficient list {source}", str(e))
    expr = _parse_expression(source, {"T": T})
    try:
        return PolyQ.from_sympy(Poly(expr, T, domain=QQ))
    except (PolynomialError, ValueError) as e:
        raise InputError(f"'{source}' is not a polynomial in T over Q", str(e))


def _validate(model: Type[M], source: Any, what: str) -> M:
    if isinstance(source, model):
        return source
    try:
        return model.model_validate(source)
    except ValidationError as e:
        raise InputError(f"Malformed {what}", str(e))


def parse_bivariate(source: Union[str, TermsSpec, Dict[str, Any]]) -> BivariatePoly:
    """
    P(T, X) given as a string, or as {"terms": [[x_exp, t_exp, coeff], ...]}.

    Raises:
        InputError: unparseable text or non-rational coefficients
    """
    table: Dict[int, Dict[int, Fraction]] = {}
    if isinstance(source, str):
        expr = _parse_expression(source, {"T": T, "X": X})
        try:
            poly = Poly(expr, X, T, domain=QQ)
        except (PolynomialError, ValueError) as e:
            raise InputError(f"'{source}' is not a polynomial in T and X over Q", str(e))
        for (i, j), c in poly.terms():
            table.setdefault(i, {})[j] = Fraction(int(c.p), int(c.q))
    else:
        for i, j, c in _validate(TermsSpec, source, "defining polynomial").terms:
            if i < 0 or j < 0:
                raise InputError(f"Negative exponent in term {[i, j, str(c)]}")
            table.setdefault(i, {})[j] = table.get(i, {}).get(j, Fraction(0)) + c
    if not table:
        raise InputError("Empty defining polynomial")
    x_degree = max(table)
    coeffs = []
    for i in range(x_degree + 1):
        row = table.get(i, {})
        t_degree = max(row) if row else -1
        coeffs.append(PolyQ(tuple(row.get(j, Fraction(0)) for j in range(t_degree + 1))))
    return BivariatePoly(tuple(coeffs))


def parse_group(source: Union[GroupSpec, Dict[str, Any]]) -> FiniteGroup:
    """
    Raises:
        InputError: missing fields or invalid generators
    """
    spec = _validate(GroupSpec, source, "group description")
    if spec.generators is not None:
        generators = [from_cycles(cycles, spec.degree) for cycles in spec.generators]
        return PermGroup(spec.degree, generators, name=spec.name)
    classes = [(c.label, c.order) for c in spec.classes]
    return AbstractGroup(spec.name or "G", spec.group_order, classes, complete=spec.classes_complete)


def parse_orbit(source: Union[OrbitSpec, Dict[str, Any]], group: FiniteGroup) -> BranchOrbit:
    spec = _validate(OrbitSpec, source, "orbit entry")
    raw = spec.minpoly
    if isinstance(raw, str) and raw.strip().lower() in {"inf", "oo", "∞"}:
        point = AlgPoint.infinity()
    elif isinstance(raw, str) and raw.strip() == "0":
        point = AlgPoint.zero()
    else:
        point = AlgPoint.from_minpoly(parse_univariate(raw), verify=spec.irreducible == "verify")
    return BranchOrbit(point, group.class_by_label(spec.class_label))


def cover_from_dict(data: Union[CoverFile, Dict[str, Any]], default_name: str = "cover") -> CoverData:
    """
    Build CoverData from a parsed cover description.

    Raises:
        InputError: any structural problem
    """
    source = _validate(CoverFile, data, "cover description")
    group = parse_group(source.group)
    orbits = tuple(parse_orbit(o, group) for o in source.orbits)
    return CoverData(
        name=source.name or default_name,
        group=group,
        orbits=orbits,
        defining_poly=parse_bivariate(source.defining_poly) if source.defining_poly else None,
        vertical_ram_primes=frozenset(source.vertical_ram_primes),
        centerless=source.centerless,
        notes=tuple(source.notes),
    )


def file_digest(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def load_cover(path: Path) -> Tuple[CoverData, str]:
    """
    Load a cover file.

    Args:
        path: JSON cover description

    Returns:
        (cover, sha256 hex digest of the file)

    Raises:
        InputError: unreadable or malformed file
    """
    path = Path(path)
    if not path.exists():
        raise InputError(f"Cover file not found: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise InputError(f"Malformed cover file {path}", str(e))
    try:
        cover = cover_from_dict(data, default_name=path.stem)
    except RamiforgeError:
        raise
    except (TypeError, ValueError, AttributeError) as e:
        raise InputError(f"Malformed cover file {path}", str(e))
    logger.info(f"Loaded cover {cover.name}: group {cover.group.name}, {len(cover.orbits)} orbits")
    return cover, file_digest(path)