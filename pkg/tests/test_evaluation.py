import itertools

import numpy as np
import pytest

from cbctt.errors import (CttFormatError, InapplicableMoveError, InfeasibleInstanceError,
                          SearchSpaceTooLargeError)
from cbctt.evaluation import (CostBreakdown, Move, Timetable, apply_move, brute_force_optimum,
                              delta_cost, fast_cost, format_solution, full_cost,
                              parse_solution, random_assignment)
from cbctt.instance import (Course, Curriculum, Instance, Room, Unavailability,
                            generate_toy_instance)
from cbctt.neighborhood import sample_move

W = 100


def make(courses, rooms, curricula=(), unav=(), days=1, ppd=4):
    return Instance("t", days, ppd, tuple(courses), tuple(rooms), tuple(curricula), tuple(unav))


def test_total_identity_and_linearity():
    c = CostBreakdown(2, 1, 3, 4, 5, 6, w_hard=100)
    assert c.total == 100 * 3 + 5 * 4 + 2 * 5 + 3 + 6
    assert c.with_w_hard(10).total - c.total == (10 - 100) * 3
    assert not c.feasible
    assert CostBreakdown(0, 0, 3, 0, 0, 0, 7).feasible


def test_random_assignment_single_and_forced():
    inst = make([Course("a", "t", 1, 1, 1)], [Room("r", 5)])
    tt = random_assignment(inst, 0)
    assert tt.periods.shape == (1,)
    forced = make([Course("a", "t", 2, 1, 1)], [Room("r", 5)],
                  unav=[Unavailability(0, 0, 0), Unavailability(0, 0, 3)])
    assert sorted(random_assignment(forced, 3).periods.tolist()) == [1, 2]


def test_random_assignment_invariants_and_determinism():
    inst = generate_toy_instance(3, 4, 2, 8, 3, seed=5)
    for seed in range(100):
        tt = random_assignment(inst, seed)
        lc = inst.lecture_course
        assert inst.available[lc, tt.periods].all()
        assert len(set(zip(lc.tolist(), tt.periods.tolist()))) == inst.n_lectures
    assert random_assignment(inst, 4) == random_assignment(inst, 4)


def test_random_assignment_infeasible():
    inst = make([Course("a", "t", 3, 1, 1)], [Room("r", 5)], ppd=2)
    with pytest.raises(InfeasibleInstanceError):
        random_assignment(inst, 0)


def test_timetable_rejects_invariant_violations():
    inst = make([Course("a", "t", 2, 1, 1)], [Room("r", 5)], unav=[Unavailability(0, 0, 3)])
    with pytest.raises(ValueError, match="share a period"):
        Timetable(inst, [1, 1], [0, 0])
    with pytest.raises(ValueError, match="unavailable"):
        Timetable(inst, [1, 3], [0, 0])


def test_zero_cost_case():
    # two conflict-free courses, one curriculum each, lectures adjacent, roomy rooms
    courses = [Course("a", "t1", 2, 1, 5), Course("b", "t2", 2, 1, 5)]
    inst = make(courses, [Room("r1", 10), Room("r2", 10)],
                [Curriculum("qa", (0,)), Curriculum("qb", (1,))])
    tt = Timetable(inst, [0, 1, 0, 1], [0, 0, 1, 1])
    c = full_cost(inst, tt, W)
    assert c.total == 0
    assert c == fast_cost(inst, tt, W)


def test_mwd_and_capacity_hand_case():
    inst = make([Course("a", "t", 2, 2, 3)], [Room("r", 2)], days=2, ppd=2)
    tt = Timetable(inst, [0, 1], [0, 0])
    c = full_cost(inst, tt, W)
    assert (c.min_working_days, c.room_capacity) == (1, 2)
    assert c.total == 5 * 1 + 1 * 2


def test_each_component_counted():
    courses = [Course("a", "t", 1, 1, 10), Course("b", "t", 1, 1, 10), Course("c", "u", 2, 1, 1)]
    inst = make(courses, [Room("r1", 10), Room("r2", 10)], [Curriculum("q", (0, 2))], days=1, ppd=4)
    # a, b share teacher and period and room; c spread over two rooms, not adjacent to a
    tt = Timetable(inst, [0, 0, 2, 3], [0, 0, 0, 1])
    c = full_cost(inst, tt, W)
    assert c.conflicts == 1
    assert c.room_occupancy == 1
    assert c.room_stability == 1
    assert c.isolated_lectures == 1  # a at slot 0 alone; c's two lectures are adjacent
    assert c == fast_cost(inst, tt, W)


def test_co_period_curriculum_lectures_count_as_adjacent():
    courses = [Course("a", "t1", 1, 1, 1), Course("b", "t2", 1, 1, 1)]
    inst = make(courses, [Room("r1", 5), Room("r2", 5)], [Curriculum("q", (0, 1))])
    c = full_cost(inst, Timetable(inst, [2, 2], [0, 1]), W)
    assert c.isolated_lectures == 0
    assert c.conflicts == 1


def test_identical_ml_inapplicable():
    inst = generate_toy_instance(2, 2, 2, 3, 1, seed=1)
    tt = random_assignment(inst, 0)
    mv = Move.ml(0, tt.periods[0], tt.rooms[0])
    with pytest.raises(InapplicableMoveError):
        delta_cost(inst, tt, mv, W)
    with pytest.raises(InapplicableMoveError):
        apply_move(tt, mv)


def test_same_course_sl_and_taken_period_inapplicable():
    inst = make([Course("a", "t", 2, 1, 1)], [Room("r", 5)])
    tt = Timetable(inst, [0, 1], [0, 0])
    with pytest.raises(InapplicableMoveError):
        delta_cost(inst, tt, Move.sl(0, 1), W)
    with pytest.raises(InapplicableMoveError):
        delta_cost(inst, tt, Move.ml(0, 1, 0), W)


def test_no_effect_swap_is_zero():
    courses = [Course("a", "t1", 1, 1, 5), Course("b", "t2", 1, 1, 5)]
    inst = make(courses, [Room("r1", 10), Room("r2", 10)])
    tt = Timetable(inst, [0, 2], [0, 1])
    assert delta_cost(inst, tt, Move.sl(0, 1), W) == 0


def test_new_conflict_costs_w_hard():
    courses = [Course("a", "t1", 1, 1, 1), Course("b", "t2", 1, 1, 1)]
    inst = make(courses, [Room("r1", 5), Room("r2", 5)],
                [Curriculum("q", (0, 1)), Curriculum("qa", (0,)), Curriculum("qb", (1,))])
    tt = Timetable(inst, [0, 1], [0, 1])
    # moving b onto a's period keeps rooms and isolation unchanged: only the clash appears
    before = full_cost(inst, tt, W)
    d = delta_cost(inst, tt, Move.ml(1, 0, 1), W)
    apply_move(tt, Move.ml(1, 0, 1))
    after = full_cost(inst, tt, W)
    assert after.conflicts - before.conflicts == 1
    assert d == after.total - before.total


def test_delta_exact_against_oracle():
    rng = np.random.default_rng(11)
    for seed in range(6):
        inst = generate_toy_instance(3, 4, 3, 9, 4, seed=seed)
        tt = random_assignment(inst, seed)
        cost = full_cost(inst, tt, W).total
        for _ in range(300):
            mv = sample_move(inst, tt, 0.5, rng)
            d = delta_cost(inst, tt, mv, W)
            snapshot = (tt.periods.copy(), tt.rooms.copy())
            assert full_cost(inst, tt, W).total == cost  # evaluation leaves tt untouched
            assert np.array_equal(tt.periods, snapshot[0])
            apply_move(tt, mv)
            new = full_cost(inst, tt, W).total
            assert new - cost == d
            cost = new
        assert tt.tables_consistent()


def test_ml_inverse_and_sl_twice_restore():
    inst = generate_toy_instance(3, 3, 2, 6, 2, seed=2)
    rng = np.random.default_rng(0)
    tt = random_assignment(inst, 1)
    orig = tt.copy()
    for _ in range(50):
        mv = sample_move(inst, tt, 0.0, rng)
        back = Move.ml(mv.lecture, tt.periods[mv.lecture], tt.rooms[mv.lecture])
        apply_move(tt, mv)
        apply_move(tt, back)
        assert tt == orig
        mv = sample_move(inst, tt, 1.0, rng)
        apply_move(tt, mv)
        apply_move(tt, mv)
        assert tt == orig
    assert tt.tables_consistent()


def test_tables_consistent_after_many_applies(comp_scale):
    rng = np.random.default_rng(3)
    tt = random_assignment(comp_scale, 3)
    for i in range(10_000):
        apply_move(tt, sample_move(comp_scale, tt, 0.43, rng))
        if i % 2_000 == 0:
            assert tt.tables_consistent()
    assert tt.tables_consistent()


def _enumerate_optimum(inst, w_hard):
    # independent of the compiled search: every per-lecture (period, room) combination
    slots = list(itertools.product(range(inst.n_periods), range(inst.n_rooms)))
    best = None
    for combo in itertools.product(slots, repeat=inst.n_lectures):
        periods = [p for p, _ in combo]
        rooms = [r for _, r in combo]
        lc = inst.lecture_course
        if not inst.available[lc, periods].all():
            continue
        if len(set(zip(lc.tolist(), periods))) != inst.n_lectures:
            continue
        total = full_cost(inst, Timetable(inst, periods, rooms), w_hard).total
        best = total if best is None else min(best, total)
    return best


def test_brute_force_toy1(toy1):
    _, c = brute_force_optimum(toy1, W)
    assert c.total == _enumerate_optimum(toy1, W)
    assert c.total == 126  # frozen from the enumeration above


def test_brute_force_matches_enumeration():
    for seed in range(8):
        inst = generate_toy_instance(2, 2, 1, 2, 1, seed=seed, n_lectures=3)
        _, c = brute_force_optimum(inst, W)
        assert c.total == _enumerate_optimum(inst, W)


def test_brute_force_trivial_and_capacity_floor():
    one = make([Course("a", "t", 1, 1, 3)], [Room("r", 5)])
    assert brute_force_optimum(one, W)[1].total == 0
    # every room one seat short for every course; no curricula, distinct teachers
    short = make([Course("a", "t1", 2, 1, 6), Course("b", "t2", 1, 1, 6)],
                 [Room("r1", 5), Room("r2", 5)], days=2, ppd=2)
    assert brute_force_optimum(short, W)[1].total == 3


def test_brute_force_guards():
    big = generate_toy_instance(5, 6, 6, 30, 14, seed=3, n_lectures=160)
    with pytest.raises(SearchSpaceTooLargeError):
        brute_force_optimum(big, W)
    bad = make([Course("a", "t", 3, 1, 1)], [Room("r", 5)], ppd=2)
    with pytest.raises(InfeasibleInstanceError):
        brute_force_optimum(bad, W)


def test_solution_round_trip():
    for seed in range(50):
        inst = generate_toy_instance(3, 3, 2, 5, 2, seed=seed)
        tt = random_assignment(inst, seed)
        text = format_solution(inst, tt)
        assert len(text.splitlines()) == inst.n_lectures
        back = parse_solution(inst, text)
        assert full_cost(inst, back, W) == full_cost(inst, tt, W)


def test_solution_lines_in_period_order():
    inst = make([Course("a", "t", 3, 1, 1)], [Room("r", 5)], days=2, ppd=2)
    tt = Timetable(inst, [3, 0, 2], [0, 0, 0])
    assert format_solution(inst, tt) == "a r 0 0\na r 1 0\na r 1 1\n"


def test_solution_errors():
    inst = make([Course("a", "t", 2, 1, 1)], [Room("r", 5)])
    with pytest.raises(CttFormatError) as e:
        parse_solution(inst, "a r 0 0\na zz 0 1\n")
    assert e.value.line == 2
    with pytest.raises(CttFormatError, match="1 lectures"):
        parse_solution(inst, "a r 0 0\n")
