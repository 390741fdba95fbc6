import pytest

from ramiforge.errors import GroupTooLargeError, InputError, PreconditionError
from ramiforge.services.groups import (
    AbstractGroup,
    PermGroup,
    alternating_group,
    class_power,
    conjugacy_classes,
    cycle_type,
    cyclic_group,
    format_cycle_type,
    from_cycles,
    is_g_complete,
    parse_cycle_type,
    power_closure,
    ramification_index,
    same_group,
    symmetric_group,
)


def labels(classes):
    return {c.label for c in classes}


def test_cycle_type_labels():
    assert format_cycle_type((2, 1)) == "[1^1 2^1]"
    assert format_cycle_type((1, 1, 1, 2)) == "[1^3 2^1]"
    assert parse_cycle_type("[2^1 3^1]") == (2, 3)
    assert parse_cycle_type("[3 2]") == (2, 3)
    assert parse_cycle_type("2A") is None


def test_from_cycles_is_one_based():
    g = from_cycles([(1, 2, 3)], 4)
    assert g == (1, 2, 0, 3)
    assert cycle_type(g) == (1, 3)


def test_symmetric_group_classes():
    s3 = symmetric_group(3)
    assert s3.order == 6
    assert labels(s3.classes) == {"[1^3]", "[1^1 2^1]", "[3^1]"}
    s5 = symmetric_group(5)
    assert s5.order == 120 and len(s5.classes) == 7
    assert s5.is_symmetric and s5.is_centerless


def test_alternating_group_splits_five_cycles():
    a5 = alternating_group(5)
    assert a5.order == 60 and a5.name == "A5"
    assert len(a5.classes) == 5
    assert len(a5.classes_with_cycle_type((5,))) == 2
    with pytest.raises(InputError):
        a5.class_by_label("[5^1]")


def test_cyclic_group_has_center():
    c2 = cyclic_group(2)
    assert c2.name == "C2"
    assert not c2.is_centerless


def test_class_powers_and_ramification_index():
    s3 = symmetric_group(3)
    three = s3.class_by_label("[3^1]")
    assert s3.class_power(three, 2).label == "[3^1]"
    assert s3.class_power(three, 3).label == "[1^3]"
    assert ramification_index(three, 1) == 3
    assert ramification_index(three, 3) == 1
    with pytest.raises(PreconditionError):
        s3.class_power(three, 0)


def test_power_closure_of_three_s5_classes():
    s5 = symmetric_group(5)
    classes = [s5.class_by_label(x) for x in ("[5^1]", "[1^1 4^1]", "[1^3 2^1]")]
    closure = labels(power_closure(s5, classes))
    assert closure == {"[5^1]", "[1^5]", "[1^1 4^1]", "[1^1 2^2]", "[1^3 2^1]"}
    assert "[2^1 3^1]" not in closure


def test_g_completeness():
    s3 = symmetric_group(3)
    assert is_g_complete(s3, [s3.class_by_label("[3^1]"), s3.class_by_label("[1^1 2^1]")])
    assert not is_g_complete(s3, [s3.class_by_label("[3^1]")])
    assert is_g_complete(s3, s3.classes)
    s4 = symmetric_group(4)
    # a 4-cycle and a 3-cycle generate S4; a 4-cycle and a double transposition stay in D4
    assert is_g_complete(s4, [s4.class_by_label("[4^1]"), s4.class_by_label("[1^1 3^1]")])
    assert not is_g_complete(s4, [s4.class_by_label("[4^1]"), s4.class_by_label("[2^2]")])


def test_abstract_group_class_powers():
    group = AbstractGroup("M", 2 ** 46 * 29, [("2A", 2), ("29A", 29)])
    c29 = group.class_by_label("29A")
    assert group.identity_class.label == "1A"
    assert group.class_power(c29, 29).label == "1A"
    assert group.class_power(c29, 30).label == "29A"
    with pytest.raises(PreconditionError):
        group.class_power(c29, 2)
    assert is_g_complete(group, [c29]) is None


def test_partial_class_list_never_decides_g_completeness():
    # only four of the Monster's classes are listed
    group = AbstractGroup("M", 2 ** 46 * 29, [("1A", 1), ("2A", 2), ("29A", 29)])
    assert is_g_complete(group, group.classes) is None
    listed = AbstractGroup("C2", 2, [("2A", 2)], complete=True)
    assert is_g_complete(listed, listed.classes) is True


def test_abstract_group_rejects_impossible_orders():
    with pytest.raises(InputError):
        AbstractGroup("G", 10, [("3A", 3)])


def test_same_group():
    assert same_group(symmetric_group(5), PermGroup(5, [from_cycles([(1, 2, 3, 4, 5)], 5), from_cycles([(1, 2)], 5)]))
    assert not same_group(symmetric_group(5), alternating_group(5))


def test_conjugacy_classes_partition_the_group():
    s4 = symmetric_group(4)
    classes = conjugacy_classes(s4)
    assert len(classes) == 5
    assert sum(c.size for c in classes) == 24
    four_cycle = s4.class_by_label("[4^1]")
    assert class_power(s4, four_cycle, 2).label == "[2^2]"


@pytest.mark.parametrize("n", [3, 4, 5])
def test_class_power_composition(n):
    group = symmetric_group(n)
    for cls in group.classes:
        for a in range(1, 13):
            for b in range(1, 13):
                assert group.class_power(group.class_power(cls, a), b) == group.class_power(cls, a * b)


def test_class_orders_and_sizes_agree_with_members():
    a5 = alternating_group(5)
    assert sorted(c.size for c in a5.classes) == [1, 12, 12, 15, 20]
    for cls in a5.classes:
        assert len(cls.members) == cls.size
        assert a5.class_of(cls.representative) == cls
        assert ramification_index(cls, 1) == cls.element_order


def test_order_limit_is_enforced():
    with pytest.raises(GroupTooLargeError):
        PermGroup(6, symmetric_group(6).generators, order_limit=100)
