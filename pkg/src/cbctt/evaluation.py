"""Timetables, the weighted cost function, incremental move evaluation, solution files."""

from __future__ import annotations

import enum
from dataclasses import asdict, dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from . import _kernels as K
from .errors import (
    CttFormatError,
    InapplicableMoveError,
    InfeasibleInstanceError,
    SearchSpaceTooLargeError,
)
from .instance import Instance, conflict_pairs

W_MIN_WORKING_DAYS = K.W_MWD
W_ISOLATED = K.W_ISO
W_ROOM_CAPACITY = K.W_CAP
W_ROOM_STABILITY = K.W_STAB
BRUTE_FORCE_LIMIT = 10**7


@lru_cache(maxsize=64)
def _static(inst: Instance) -> K.Static:
    return K.build_static(inst, conflict_pairs(inst))


@dataclass(frozen=True)
class CostBreakdown:
    conflicts: int
    room_occupancy: int
    room_capacity: int
    min_working_days: int
    isolated_lectures: int
    room_stability: int
    w_hard: int

    @property
    def hard(self) -> int:
        return self.conflicts + self.room_occupancy

    @property
    def soft(self) -> int:
        return (W_MIN_WORKING_DAYS * self.min_working_days + W_ISOLATED * self.isolated_lectures
                + W_ROOM_CAPACITY * self.room_capacity + W_ROOM_STABILITY * self.room_stability)

    @property
    def total(self) -> int:
        return self.w_hard * self.hard + self.soft

    @property
    def feasible(self) -> bool:
        return self.hard == 0

    def with_w_hard(self, w_hard: int) -> CostBreakdown:
        d = asdict(self)
        d["w_hard"] = w_hard
        return CostBreakdown(**d)

    def to_dict(self) -> dict[str, int]:
        d = asdict(self)
        d["total"] = self.total
        d["feasible"] = self.feasible
        return d


class MoveKind(str, enum.Enum):
    ML = "ML"
    SL = "SL"


@dataclass(frozen=True)
class Move:
    """``ML``: move ``lecture`` to (``period``, ``room``). ``SL``: swap ``lecture`` and ``other``."""

    kind: MoveKind
    lecture: int
    period: int = -1
    room: int = -1
    other: int = -1

    @classmethod
    def ml(cls, lecture: int, period: int, room: int) -> Move:
        return cls(MoveKind.ML, int(lecture), period=int(period), room=int(room))

    @classmethod
    def sl(cls, a: int, b: int) -> Move:
        return cls(MoveKind.SL, int(a), other=int(b))


class Timetable:
    """Assignment of every lecture to a (period, room) pair plus eagerly maintained tables.

    The search space excludes unavailable periods and same-course lectures sharing
    a period; both are enforced on construction and by every move.
    """

    def __init__(self, inst: Instance, periods, rooms):
        periods = np.asarray(periods, dtype=np.int64)
        rooms = np.asarray(rooms, dtype=np.int64)
        if periods.shape != (inst.n_lectures,) or rooms.shape != (inst.n_lectures,):
            raise ValueError(f"expected {inst.n_lectures} lecture assignments")
        if inst.n_lectures and (periods.min() < 0 or periods.max() >= inst.n_periods
                                or rooms.min() < 0 or rooms.max() >= inst.n_rooms):
            raise ValueError("period or room index out of range")
        courses = inst.lecture_course
        if not inst.available[courses, periods].all():
            bad = int(np.flatnonzero(~inst.available[courses, periods])[0])
            raise ValueError(f"lecture {bad} placed in an unavailable period")
        if len(set(zip(courses.tolist(), periods.tolist()))) != inst.n_lectures:
            raise ValueError("two lectures of one course share a period")
        self.instance = inst
        self._S = _static(inst)
        self._X = K.empty_state(self._S, periods, rooms)

    @property
    def periods(self) -> np.ndarray:
        v = self._X.lec_period.view()
        v.flags.writeable = False
        return v

    @property
    def rooms(self) -> np.ndarray:
        v = self._X.lec_room.view()
        v.flags.writeable = False
        return v

    @property
    def assignment(self) -> list[tuple[int, int]]:
        return list(zip(self._X.lec_period.tolist(), self._X.lec_room.tolist()))

    def copy(self) -> Timetable:
        return Timetable(self.instance, self._X.lec_period, self._X.lec_room)

    def tables(self) -> dict[str, np.ndarray]:
        return {k: v.copy() for k, v in self._X._asdict().items()
                if k not in ("lec_period", "lec_room", "empty_slot", "empty_pos", "n_empty")}

    def tables_consistent(self) -> bool:
        """True when the incremental tables equal a from-scratch rebuild."""
        X = self._X
        fresh = K.empty_state(self._S, X.lec_period, X.lec_room)
        unordered = ("empty_slot", "empty_pos")
        if not all(np.array_equal(getattr(fresh, k), getattr(X, k))
                   for k in K.State._fields if k not in unordered):
            return False
        n = int(X.n_empty[0])
        slots = X.empty_slot[:n]
        return (set(slots.tolist()) == set(fresh.empty_slot[:n].tolist())
                and np.array_equal(X.empty_pos[slots], np.arange(n)))

    def __eq__(self, other):
        if not isinstance(other, Timetable):
            return NotImplemented
        return (self.instance == other.instance
                and np.array_equal(self._X.lec_period, other._X.lec_period)
                and np.array_equal(self._X.lec_room, other._X.lec_room))

    __hash__ = None

    def __repr__(self):
        return f"Timetable({self.instance.name!r}, lectures={self.instance.n_lectures})"


def random_assignment(inst: Instance, seed: int | np.random.Generator) -> Timetable:
    """Distinct available periods per course, uniform rooms."""
    rng = np.random.default_rng(seed)
    periods = np.empty(inst.n_lectures, dtype=np.int64)
    first = inst.course_first_lecture
    for ci, c in enumerate(inst.courses):
        avail = np.flatnonzero(inst.available[ci])
        if avail.size < c.n_lectures:
            raise InfeasibleInstanceError(
                f"course {c.id} needs {c.n_lectures} distinct periods, {avail.size} available")
        periods[first[ci]:first[ci] + c.n_lectures] = rng.choice(avail, c.n_lectures, replace=False)
    rooms = rng.integers(0, inst.n_rooms, size=inst.n_lectures)
    return Timetable(inst, periods, rooms)


def full_cost(inst: Instance, tt: Timetable, w_hard: int) -> CostBreakdown:
    """Recompute every component from the raw assignment, by definition.

    This path shares no code with the incremental tables and serves as their oracle.
    """
    periods = tt.periods.tolist()
    rooms = tt.rooms.tolist()
    lc = inst.lecture_course.tolist()
    ppd = inst.periods_per_day
    pairs = conflict_pairs(inst)

    by_period: dict[int, list[int]] = {}
    for lec, p in enumerate(periods):
        by_period.setdefault(p, []).append(lc[lec])
    conflicts = 0
    for cs in by_period.values():
        for i in range(len(cs)):
            for j in range(i + 1, len(cs)):
                if (min(cs[i], cs[j]), max(cs[i], cs[j])) in pairs:
                    conflicts += 1

    slot_count: dict[tuple[int, int], int] = {}
    for p, r in zip(periods, rooms):
        slot_count[p, r] = slot_count.get((p, r), 0) + 1
    room_occupancy = sum(k - 1 for k in slot_count.values() if k > 1)

    room_capacity = sum(max(0, inst.courses[lc[lec]].n_students - inst.rooms[r].capacity)
                        for lec, r in enumerate(rooms))

    min_working_days = 0
    room_stability = 0
    for ci, c in enumerate(inst.courses):
        mine = [lec for lec in range(len(lc)) if lc[lec] == ci]
        days = {periods[lec] // ppd for lec in mine}
        min_working_days += max(0, c.min_working_days - len(days))
        room_stability += len({rooms[lec] for lec in mine}) - 1

    isolated = 0
    for q in inst.curricula:
        members = set(q.course_indices)
        per_day: dict[int, list[int]] = {}
        for lec, p in enumerate(periods):
            if lc[lec] in members:
                per_day.setdefault(p // ppd, []).append(p % ppd)
        for slots in per_day.values():
            for i, t in enumerate(slots):
                # another lecture in the same or a neighbouring timeslot makes it non-isolated
                if not any(abs(t - u) <= 1 for j, u in enumerate(slots) if j != i):
                    isolated += 1

    return CostBreakdown(conflicts, room_occupancy, room_capacity, min_working_days, isolated,
                         room_stability, w_hard)


def _check(inst: Instance, tt: Timetable, mv: Move) -> None:
    if tt.instance is not inst and tt.instance != inst:
        raise ValueError("timetable belongs to a different instance")
    S, X = tt._S, tt._X
    if mv.kind is MoveKind.ML:
        ok = K.ml_applicable(S, X, mv.lecture, mv.period, mv.room)
    elif mv.kind is MoveKind.SL:
        ok = mv.lecture != mv.other and K.sl_applicable(S, X, mv.lecture, mv.other)
    else:
        ok = False
    if not ok:
        raise InapplicableMoveError(f"{mv} is not applicable")


def delta_cost(inst: Instance, tt: Timetable, mv: Move, w_hard: int) -> int:
    """Weighted cost change of ``mv``; ``tt`` is left unchanged."""
    _check(inst, tt, mv)
    if mv.kind is MoveKind.ML:
        return int(K.ml_delta(tt._S, tt._X, mv.lecture, mv.period, mv.room, w_hard))
    return int(K.sl_delta(tt._S, tt._X, mv.lecture, mv.other, w_hard))


def apply_move(tt: Timetable, mv: Move) -> None:
    _check(tt.instance, tt, mv)
    if mv.kind is MoveKind.ML:
        K.apply_ml(tt._S, tt._X, mv.lecture, mv.period, mv.room)
    else:
        K.apply_sl(tt._S, tt._X, mv.lecture, mv.other)


def fast_cost(inst: Instance, tt: Timetable, w_hard: int) -> CostBreakdown:
    """Compiled from-scratch evaluation; same contract as :func:`full_cost`."""
    parts = K.cost_components(_static(inst), tt._X.lec_period, tt._X.lec_room)
    return CostBreakdown(*(int(x) for x in parts), w_hard=w_hard)


def search_space_size(inst: Instance) -> int:
    n_avail = inst.available.sum(axis=1)
    size = 1
    for ci, c in enumerate(inst.courses):
        size *= int(n_avail[ci] * inst.n_rooms) ** c.n_lectures
    return size


def brute_force_optimum(inst: Instance, w_hard: int,
                        limit: int = BRUTE_FORCE_LIMIT) -> tuple[Timetable, CostBreakdown]:
    size = search_space_size(inst)
    if size > limit:
        raise SearchSpaceTooLargeError(f"{size} assignments exceed the guard of {limit}")
    for ci, c in enumerate(inst.courses):
        if inst.available[ci].sum() < c.n_lectures:
            raise InfeasibleInstanceError(f"course {c.id} cannot receive distinct available periods")
    if inst.n_lectures == 0:
        tt = Timetable(inst, [], [])
        return tt, full_cost(inst, tt, w_hard)
    found, _, periods, rooms = K.brute_force(_static(inst), w_hard)
    if not found:
        raise InfeasibleInstanceError("no invariant-satisfying timetable exists")
    tt = Timetable(inst, periods, rooms)
    return tt, full_cost(inst, tt, w_hard)


# -- solution files ----------------------------------------------------------------


def format_solution(inst: Instance, tt: Timetable) -> str:
    lines = []
    first = inst.course_first_lecture
    for ci, c in enumerate(inst.courses):
        lecs = range(first[ci], first[ci] + c.n_lectures)
        for lec in sorted(lecs, key=lambda l: tt.periods[l]):
            d, t = inst.day_timeslot(int(tt.periods[lec]))
            lines.append(f"{c.id} {inst.rooms[int(tt.rooms[lec])].id} {d} {t}")
    return "\n".join(lines) + "\n"


def parse_solution(inst: Instance, text: str) -> Timetable:
    per_course: list[list[tuple[int, int]]] = [[] for _ in inst.courses]
    for no, raw in enumerate(text.splitlines(), 1):
        toks = raw.split()
        if not toks:
            continue
        if len(toks) != 4:
            raise CttFormatError(f"expected '<course> <room> <day> <timeslot>', got {raw.strip()!r}", no)
        cid, rid, ds, ts = toks
        if cid not in inst.course_index:
            raise CttFormatError(f"unknown course {cid!r}", no)
        if rid not in inst.room_index:
            raise CttFormatError(f"unknown room {rid!r}", no)
        try:
            d, t = int(ds), int(ts)
        except ValueError:
            raise CttFormatError("day and timeslot must be integers", no) from None
        if not (0 <= d < inst.n_days and 0 <= t < inst.periods_per_day):
            raise CttFormatError(f"day/timeslot out of range: {d} {t}", no)
        ci = inst.course_index[cid]
        p = inst.period(d, t)
        if not inst.available[ci, p]:
            raise CttFormatError(f"course {cid} is unavailable at day {d} timeslot {t}", no)
        if any(pp == p for pp, _ in per_course[ci]):
            raise CttFormatError(f"course {cid} has two lectures at day {d} timeslot {t}", no)
        per_course[ci].append((p, inst.room_index[rid]))
    periods, rooms = [], []
    for ci, c in enumerate(inst.courses):
        got = per_course[ci]
        if len(got) != c.n_lectures:
            raise CttFormatError(f"course {c.id} has {len(got)} lectures in the solution, expected "
                                 f"{c.n_lectures}")
        for p, r in got:
            periods.append(p)
            rooms.append(r)
    return Timetable(inst, periods, rooms)


def load_solution(inst: Instance, path: str | Path) -> Timetable:
    return parse_solution(inst, Path(path).read_text())
