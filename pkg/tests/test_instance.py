import itertools

import numpy as np
import pytest

from cbctt.errors import CttFormatError, DegenerateInstanceError
from cbctt.instance import (Course, Curriculum, Instance, Room, Screening, Unavailability,
                            conflict_pairs, extract_features, format_ctt,
                            generate_toy_instance, is_provably_infeasible, parse_ctt,
                            validate_instance)

MINIMAL = """\
Name: mini
Courses: 1
Rooms: 1
Days: 1
Periods_per_day: 2
Curricula: 1
Constraints: 0

COURSES:
c1 t1 1 1 10

ROOMS:
r1 20

CURRICULA:
q1 1 c1

UNAVAILABILITY_CONSTRAINTS:

END.
"""


def make(courses, rooms, curricula=(), unav=(), days=1, ppd=4, name="x"):
    return Instance(name, days, ppd, tuple(courses), tuple(rooms), tuple(curricula), tuple(unav))


def test_minimal_document_counts():
    inst = parse_ctt(MINIMAL)
    assert (inst.n_courses, inst.n_rooms, inst.n_curricula) == (1, 1, 1)
    assert inst.unavailabilities == ()
    assert inst.n_periods == 2
    assert inst.n_lectures == 1


def test_round_trip_generated():
    for seed in range(20):
        inst = generate_toy_instance(3, 4, 3, 6, 3, seed=seed)
        assert parse_ctt(format_ctt(inst)) == inst


def test_fewer_course_rows_than_header():
    bad = MINIMAL.replace("Courses: 1", "Courses: 2")
    with pytest.raises(CttFormatError, match="fewer rows"):
        parse_ctt(bad)


@pytest.mark.parametrize("old,new,msg", [
    ("Rooms: 1", "Rooms: x", "integer"),
    ("q1 1 c1", "q1 1 c9", "undeclared course"),
    ("q1 1 c1", "q1 2 c1", "declares 2"),
    ("Constraints: 0", "Constraints: 1", "fewer rows"),
    ("END.", "", "unexpected end"),
])
def test_format_errors(old, new, msg):
    with pytest.raises(CttFormatError, match=msg):
        parse_ctt(MINIMAL.replace(old, new))


def test_error_names_line():
    with pytest.raises(CttFormatError) as e:
        parse_ctt(MINIMAL.replace("r1 20", "r1 twenty"))
    assert e.value.line == 13
    assert "line 13" in str(e.value)


def test_out_of_range_unavailability():
    text = MINIMAL.replace("Constraints: 0", "Constraints: 1").replace(
        "UNAVAILABILITY_CONSTRAINTS:\n", "UNAVAILABILITY_CONSTRAINTS:\nc1 0 5\n")
    with pytest.raises(CttFormatError, match="out of range"):
        parse_ctt(text)


def test_duplicate_ids_rejected():
    text = MINIMAL.replace("Courses: 1", "Courses: 2").replace("c1 t1 1 1 10", "c1 t1 1 1 10\nc1 t2 1 1 5")
    with pytest.raises(CttFormatError, match="duplicate course"):
        parse_ctt(text)


def test_duplicate_unavailability_dropped(caplog):
    text = MINIMAL.replace("Constraints: 0", "Constraints: 2").replace(
        "UNAVAILABILITY_CONSTRAINTS:\n", "UNAVAILABILITY_CONSTRAINTS:\nc1 0 1\nc1 0 1\n")
    inst = parse_ctt(text)
    assert inst.unavailabilities == (Unavailability(0, 0, 1),)
    assert "duplicate unavailability" in caplog.text


def test_provably_infeasible_pigeonhole():
    inst = make([Course("a", "t", 3, 1, 1)], [Room("r", 5)], days=1, ppd=4,
                unav=[Unavailability(0, 0, 0), Unavailability(0, 0, 1)])
    kinds = [f.kind for f in validate_instance(inst)]
    assert kinds == [Screening.PROVABLY_INFEASIBLE]
    assert is_provably_infeasible(inst)


def test_unrealistic_room_endowment():
    inst = make([Course("a", "t", 1, 1, 10)], [Room("r", 5)])
    assert [f.kind for f in validate_instance(inst)] == [Screening.UNREALISTIC_ROOM_ENDOWMENT]


@pytest.mark.parametrize("teachers,curricula,expected", [
    (("t", "t"), (), {(0, 1)}),
    (("t", "u"), (Curriculum("q", (0, 1)),), {(0, 1)}),
    (("t", "u"), (Curriculum("q", (0,)), Curriculum("p", (1,))), set()),
])
def test_conflict_pairs(teachers, curricula, expected):
    inst = make([Course("a", teachers[0], 1, 1, 1), Course("b", teachers[1], 1, 1, 1)],
                [Room("r", 5)], curricula)
    assert conflict_pairs(inst) == expected


def test_conflict_pairs_symmetric_irreflexive_monotone():
    for seed in range(10):
        inst = generate_toy_instance(2, 3, 2, 8, 3, seed=seed)
        pairs = conflict_pairs(inst)
        assert all(a < b for a, b in pairs)
        more = Instance(inst.name, inst.n_days, inst.periods_per_day, inst.courses, inst.rooms,
                        inst.curricula + (Curriculum("extra", (0, 5, 7)),), inst.unavailabilities)
        assert pairs <= conflict_pairs(more)


def test_features_full_occupancy_and_no_conflicts():
    inst = make([Course(f"c{i}", f"t{i}", 1, 1, 1) for i in range(4)], [Room("r", 5)], ppd=4)
    f = extract_features(inst)
    assert f.RO == 100.0
    assert f.Co == 0.0
    assert f.Le == 4 and f.Cu == 0 and f.DL == 0.0


def test_features_hand_computed():
    # 2 days x 2 slots, rooms of 10 and 30 seats
    courses = [Course("a", "t1", 2, 1, 20), Course("b", "t2", 1, 1, 5), Course("c", "t1", 1, 1, 40)]
    inst = make(courses, [Room("r1", 10), Room("r2", 30)],
                [Curriculum("q", (0, 1))], [Unavailability(0, 0, 0)], days=2, ppd=2)
    f = extract_features(inst)
    assert f.Le == 4
    assert f.RO == pytest.approx(100 * 4 / 8)
    assert f.Co == pytest.approx(100 * 2 / 3)  # (a,b) curriculum, (a,c) teacher
    assert f.Av == pytest.approx(100 * (1 - 1 / 12))
    assert f.RS == pytest.approx((50 + 100 + 0) / 3)
    assert f.DL == pytest.approx(3 / 2)
    assert list(f.to_dict()) == ["Le", "Cu", "RO", "Co", "Av", "RS", "DL"]


def test_features_degenerate():
    inst = make([Course("a", "t", 1, 1, 1)], [])
    with pytest.raises(DegenerateInstanceError):
        extract_features(inst)


def test_features_bounded():
    for seed in range(30):
        f = extract_features(generate_toy_instance(3, 3, 2, 7, 3, seed=seed))
        for k in ("RO", "Co", "Av", "RS"):
            assert 0 <= getattr(f, k) <= 100
        assert f.DL >= 0


def test_toy_generator_contract():
    inst = generate_toy_instance(2, 2, 1, 1, 1, seed=1, n_lectures=1)
    assert inst.n_periods == 4 and inst.n_lectures == 1
    a = format_ctt(generate_toy_instance(3, 3, 2, 5, 2, seed=9))
    b = format_ctt(generate_toy_instance(3, 3, 2, 5, 2, seed=9))
    assert a == b
    for seed in range(1, 51):
        small = generate_toy_instance(2, 2, 2, 3, 2, seed=seed, n_lectures=6)
        assert not is_provably_infeasible(small)
    with pytest.raises(ValueError):
        generate_toy_instance(1, 2, 1, 1, 1, seed=0, n_lectures=5)


def test_instance_tables():
    inst = generate_toy_instance(2, 3, 2, 4, 2, seed=4)
    lc = inst.lecture_course
    assert len(lc) == inst.n_lectures
    assert np.all(np.diff(lc) >= 0)
    blocked = {(u.course_index, inst.period(u.day, u.timeslot)) for u in inst.unavailabilities}
    for c, p in itertools.product(range(inst.n_courses), range(inst.n_periods)):
        assert inst.available[c, p] == ((c, p) not in blocked)
    assert inst.day_timeslot(inst.period(1, 2)) == (1, 2)
