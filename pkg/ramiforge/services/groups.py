"""
Ramiforge - Group Service
Permutation groups, conjugacy classes, class powers and g-completeness.
"""

from dataclasses import dataclass, field
from math import factorial, gcd
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple
import logging
import re

from sympy.combinatorics import Permutation, PermutationGroup

from ramiforge.config import settings
from ramiforge.errors import GroupTooLargeError, InputError, PreconditionError

logger = logging.getLogger(__name__)

# Array form: i ↦ g[i], 0-based
Perm = Tuple[int, ...]


# ============================================
# Permutations
# ============================================

def to_sympy(g: Perm) -> Permutation:
    return Permutation(list(g))


def array_form(g: Permutation, degree: int) -> Perm:
    form = list(g.array_form)
    return tuple(form + list(range(len(form), degree)))


def cycle_type(g: Perm) -> Tuple[int, ...]:
    """Sorted cycle lengths, fixed points included."""
    structure = to_sympy(g).cycle_structure
    return tuple(sorted(k for k, count in structure.items() for _ in range(count)))


def from_cycles(cycle_list: Sequence[Sequence[int]], degree: int) -> Perm:
    """
    Build a permutation from 1-based cycles.

    Raises:
        InputError: points out of range or repeated
    """
    used = set()
    zero_based = []
    for cycle in cycle_list:
        points = [int(x) - 1 for x in cycle]
        if any(x < 0 or x >= degree for x in points) or used & set(points) or len(set(points)) != len(points):
            raise InputError(f"Invalid cycle {list(cycle)} for degree {degree}")
        used |= set(points)
        zero_based.append(points)
    if not zero_based:
        return tuple(range(degree))
    return array_form(Permutation(zero_based, size=degree), degree)


def format_cycle_type(parts: Iterable[int]) -> str:
    """Partition label in exponent notation, e.g. (1, 2) → "[1^1 2^1]"."""
    counts: Dict[int, int] = {}
    for k in parts:
        counts[k] = counts.get(k, 0) + 1
    return "[" + " ".join(f"{k}^{counts[k]}" for k in sorted(counts)) + "]"


_CYCLE_TOKEN = re.compile(r"^(\d+)(?:\^(\d+))?$")


def parse_cycle_type(label: str) -> Optional[Tuple[int, ...]]:
    """Inverse of format_cycle_type; None when the label is not a partition label."""
    body = label.strip()
    if not (body.startswith("[") and body.endswith("]")):
        return None
    parts: List[int] = []
    for token in re.split(r"[\s,]+", body[1:-1].strip()):
        if not token:
            continue
        match = _CYCLE_TOKEN.match(token)
        if not match:
            return None
        k, m = int(match.group(1)), int(match.group(2) or 1)
        parts.extend([k] * m)
    return tuple(sorted(parts))


# ============================================
# Classes and groups
# ============================================

@dataclass(frozen=True)
class ConjClass:
    """A conjugacy class, identified by its label inside its group."""

    label: str
    element_order: int
    size: int
    representative: Optional[Perm] = None
    cycle_type: Optional[Tuple[int, ...]] = None
    members: FrozenSet[Perm] = field(default=frozenset(), compare=False, repr=False)

    @property
    def is_identity(self) -> bool:
        return self.element_order == 1


class FiniteGroup:
    """Interface shared by permutation groups and groups given by class data only."""

    name: str
    order: int
    classes: List[ConjClass]
    classes_complete: bool = True

    @property
    def identity_class(self) -> ConjClass:
        return next(c for c in self.classes if c.is_identity)

    def class_by_label(self, label: str) -> ConjClass:
        """
        Look a class up by label; partition labels are matched order-insensitively.

        Raises:
            InputError: unknown or ambiguous label
        """
        for c in self.classes:
            if c.label == label:
                return c
        parts = parse_cycle_type(label)
        if parts is not None:
            matches = [c for c in self.classes if c.cycle_type == parts]
            if len(matches) == 1:
                return matches[0]
            if len(matches) > 1:
                raise InputError(
                    f"Label {label} is ambiguous in {self.name}: {[c.label for c in matches]}"
                )
        raise InputError(f"No class labelled {label} in {self.name}")

    def class_power(self, cls: ConjClass, a: int) -> ConjClass:
        raise NotImplementedError

    @property
    def is_permutation_group(self) -> bool:
        return False


class PermGroup(FiniteGroup):
    """
    A permutation group given by generators, backed by a sympy PermutationGroup.

    Elements and conjugacy classes are enumerated at construction.

    Raises:
        GroupTooLargeError: more than ``order_limit`` elements
    """

    def __init__(
        self,
        degree: int,
        generators: Sequence[Perm],
        name: Optional[str] = None,
        order_limit: Optional[int] = None,
    ):
        self.degree = degree
        self.generators = tuple(tuple(int(x) for x in g) for g in generators)
        for g in self.generators:
            if sorted(g) != list(range(degree)):
                raise InputError(f"{g} is not a permutation of {degree} points")
        self.order_limit = order_limit or settings.group_order_limit
        self.sympy_group = PermutationGroup([to_sympy(g) for g in self.generators])
        self.order = int(self.sympy_group.order())
        if self.order > self.order_limit:
            raise GroupTooLargeError(
                "conjugacy_classes", f"group of order {self.order} exceeds {self.order_limit} elements"
            )
        self.elements = self._members(self.sympy_group.generate())
        self.classes = self._conjugacy_classes()
        self._class_of = {g: c for c in self.classes for g in c.members}
        self.name = name or self._default_name()
        logger.debug(f"Group {self.name}: order {self.order}, {len(self.classes)} classes")

    @property
    def is_permutation_group(self) -> bool:
        return True

    @property
    def identity(self) -> Perm:
        return tuple(range(self.degree))

    def _members(self, perms: Iterable[Permutation]) -> FrozenSet[Perm]:
        return frozenset(array_form(g, self.degree) for g in perms)

    def _conjugacy_classes(self) -> List[ConjClass]:
        raw = [self._members(cls) for cls in self.sympy_group.conjugacy_classes()]
        raw.sort(key=lambda members: (to_sympy(min(members)).order(), cycle_type(min(members)), min(members)))
        by_type: Dict[Tuple[int, ...], int] = {}
        for members in raw:
            ct = cycle_type(min(members))
            by_type[ct] = by_type.get(ct, 0) + 1

        classes = []
        seen_type: Dict[Tuple[int, ...], int] = {}
        for members in raw:
            rep = min(members)
            ct = cycle_type(rep)
            label = format_cycle_type(ct)
            if by_type[ct] > 1:
                index = seen_type.get(ct, 0)
                seen_type[ct] = index + 1
                label += chr(ord("a") + index)
            classes.append(ConjClass(label, int(to_sympy(rep).order()), len(members), rep, ct, members))
        return classes

    def _default_name(self) -> str:
        n = self.degree
        if self.order == factorial(n):
            return f"S{n}"
        if n >= 3 and self.order == factorial(n) // 2 and all(to_sympy(g).is_even for g in self.generators):
            return f"A{n}"
        return f"G{self.order}d{n}"

    @property
    def is_symmetric(self) -> bool:
        return self.order == factorial(self.degree)

    @property
    def is_centerless(self) -> bool:
        return self.sympy_group.center().order() == 1

    def class_of(self, g: Perm) -> ConjClass:
        return self._class_of[tuple(g)]

    def classes_with_cycle_type(self, parts: Tuple[int, ...]) -> List[ConjClass]:
        return [c for c in self.classes if c.cycle_type == tuple(sorted(parts))]

    def class_power(self, cls: ConjClass, a: int) -> ConjClass:
        """
        Class of g^a for g in cls.

        Raises:
            PreconditionError: a < 1
        """
        if a < 1:
            raise PreconditionError("class_power", f"exponent must be positive, got {a}")
        return self.class_of(array_form(to_sympy(cls.representative) ** a, self.degree))

    def closure(self, gens: Sequence[Perm]) -> FrozenSet[Perm]:
        """Elements of the subgroup generated by gens."""
        return self._members(PermutationGroup([to_sympy(g) for g in gens]).generate())


class AbstractGroup(FiniteGroup):
    """
    A group known only through its order and labelled classes with element orders.

    Class powers are available for exponents ≡ 0 or 1 modulo the element order.
    The class list counts as complete only when ``complete`` is set.
    """

    def __init__(self, name: str, order: int, classes: Sequence[Tuple[str, int]], complete: bool = False):
        self.name = name
        self.order = int(order)
        self.classes_complete = complete
        labelled = [ConjClass(label, int(k), 0) for label, k in classes]
        if not any(c.is_identity for c in labelled):
            labelled.insert(0, ConjClass("1A", 1, 1))
        for c in labelled:
            if self.order % c.element_order:
                raise InputError(f"Element order {c.element_order} of {c.label} does not divide |{name}|")
        self.classes = labelled

    @property
    def is_centerless(self) -> Optional[bool]:
        return None

    def class_power(self, cls: ConjClass, a: int) -> ConjClass:
        if a < 1:
            raise PreconditionError("class_power", f"exponent must be positive, got {a}")
        if a % cls.element_order == 0:
            return self.identity_class
        if a % cls.element_order == 1:
            return cls
        raise PreconditionError(
            "class_power", f"power maps of {self.name} are not available ({cls.label}^{a})"
        )


# ============================================
# Module-level operations
# ============================================

def conjugacy_classes(group: FiniteGroup) -> List[ConjClass]:
    return list(group.classes)


def class_power(group: FiniteGroup, cls: ConjClass, a: int) -> ConjClass:
    return group.class_power(cls, a)


def ramification_index(cls: ConjClass, a: int) -> int:
    """order(C)/gcd(order(C), a): the order of the class of g^a."""
    return cls.element_order // gcd(cls.element_order, a)


def power_closure(group: FiniteGroup, classes: Iterable[ConjClass]) -> List[ConjClass]:
    """All classes C^a for C in classes and 1 ≤ a ≤ order(C)."""
    found: Dict[str, ConjClass] = {}
    for cls in classes:
        for a in range(1, cls.element_order + 1):
            image = group.class_power(cls, a)
            found[image.label] = image
    return sorted(found.values(), key=lambda c: (c.element_order, c.label))


def is_g_complete(group: FiniteGroup, classes: Iterable[ConjClass]) -> Optional[bool]:
    """
    Whether no proper subgroup meets every class in ``classes``.

    Exact when the group has at most ``g_complete_order_limit`` elements: a
    proper subgroup meeting every class exists iff some choice of one element
    per class generates a proper subgroup; choices are explored by cyclic
    extension, memoised on the subgroup reached so far. The first class is
    pinned to its representative since the question is conjugation invariant.

    A group whose class list is not known to be complete is never decided.

    Returns:
        True, False, or None when undecided
    """
    chosen = {c.label: c for c in classes}
    if group.classes_complete and set(chosen) >= {c.label for c in group.classes}:
        return True
    if not group.is_permutation_group or group.order > settings.g_complete_order_limit:
        return None

    nontrivial = sorted((c for c in chosen.values() if not c.is_identity), key=lambda c: c.size)
    if not nontrivial:
        return group.order == 1

    full = group.order
    memo: Dict[Tuple[int, FrozenSet[Perm]], bool] = {}

    def proper_completion(i: int, subgroup: FrozenSet[Perm], gens: Tuple[Perm, ...]) -> bool:
        if len(subgroup) == full:
            return False
        if i == len(nontrivial):
            return True
        key = (i, subgroup)
        if key in memo:
            return memo[key]
        cls = nontrivial[i]
        if subgroup & cls.members:
            result = proper_completion(i + 1, subgroup, gens)
        else:
            result = False
            for x in sorted(cls.members):
                extended = group.closure(gens + (x,))
                if len(extended) < full and proper_completion(i + 1, extended, gens + (x,)):
                    result = True
                    break
        memo[key] = result
        return result

    first = nontrivial[0].representative
    start = group.closure((first,))
    return not proper_completion(1, start, (first,))


def symmetric_group(n: int) -> PermGroup:
    if n == 1:
        return PermGroup(1, [(0,)], name="S1")
    if n == 2:
        return PermGroup(2, [(1, 0)], name="S2")
    cycle = tuple(list(range(1, n)) + [0])
    transposition = tuple([1, 0] + list(range(2, n)))
    return PermGroup(n, [cycle, transposition], name=f"S{n}")


def alternating_group(n: int) -> PermGroup:
    gens = [from_cycles([(1, 2, k)], n) for k in range(3, n + 1)]
    return PermGroup(n, gens, name=f"A{n}")


def cyclic_group(n: int) -> PermGroup:
    return PermGroup(n, [tuple(list(range(1, n)) + [0])], name=f"C{n}")


def same_group(g1: FiniteGroup, g2: FiniteGroup) -> bool:
    if g1.name != g2.name or g1.order != g2.order:
        return False
    if g1.is_permutation_group and g2.is_permutation_group:
        return g1.degree == g2.degree and g1.elements == g2.elements
    return True
