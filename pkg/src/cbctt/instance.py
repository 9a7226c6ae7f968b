"""CB-CTT instances: data model, ITC-2007 ``.ctt`` reader/writer, screening and features."""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations
from pathlib import Path
from typing import Iterable

import numpy as np

from .errors import CttFormatError, DegenerateInstanceError

logger = logging.getLogger(__name__)

HEADER_KEYS = ("Name", "Courses", "Rooms", "Days", "Periods_per_day", "Curricula", "Constraints")
FEATURE_NAMES = ("Le", "Cu", "RO", "Co", "Av", "RS", "DL")


@dataclass(frozen=True)
class Course:
    id: str
    teacher: str
    n_lectures: int
    min_working_days: int
    n_students: int

    def __post_init__(self):
        if self.n_lectures < 1:
            raise ValueError(f"course {self.id}: n_lectures must be >= 1")
        if self.min_working_days < 1:
            raise ValueError(f"course {self.id}: min_working_days must be >= 1")
        if self.n_students < 0:
            raise ValueError(f"course {self.id}: n_students must be >= 0")


@dataclass(frozen=True)
class Room:
    id: str
    capacity: int

    def __post_init__(self):
        if self.capacity < 0:
            raise ValueError(f"room {self.id}: negative capacity")


@dataclass(frozen=True)
class Curriculum:
    id: str
    course_indices: tuple[int, ...]


@dataclass(frozen=True, order=True)
class Unavailability:
    course_index: int
    day: int
    timeslot: int


@dataclass(frozen=True, eq=True)
class Instance:
    """Immutable problem definition with dense 0-based indices for courses, rooms, curricula.

    Lectures are numbered globally: the lectures of course ``c`` occupy the
    contiguous range ``course_first_lecture[c] : course_first_lecture[c] + n_lectures``.
    """

    name: str
    n_days: int
    periods_per_day: int
    courses: tuple[Course, ...]
    rooms: tuple[Room, ...]
    curricula: tuple[Curriculum, ...]
    unavailabilities: tuple[Unavailability, ...] = ()

    def __post_init__(self):
        if self.n_days < 1 or self.periods_per_day < 1:
            raise ValueError("n_days and periods_per_day must be positive")
        _check_unique("course", [c.id for c in self.courses])
        _check_unique("room", [r.id for r in self.rooms])
        _check_unique("curriculum", [q.id for q in self.curricula])
        n = len(self.courses)
        for q in self.curricula:
            if len(set(q.course_indices)) != len(q.course_indices):
                raise ValueError(f"curriculum {q.id}: duplicate course")
            if any(not 0 <= c < n for c in q.course_indices):
                raise ValueError(f"curriculum {q.id}: undeclared course index")
        for u in self.unavailabilities:
            if not 0 <= u.course_index < n:
                raise ValueError(f"unavailability references undeclared course {u.course_index}")
            if not (0 <= u.day < self.n_days and 0 <= u.timeslot < self.periods_per_day):
                raise ValueError(f"unavailability out of range: {u}")

    # -- derived quantities (not part of equality) ---------------------------------

    @property
    def n_periods(self) -> int:
        return self.n_days * self.periods_per_day

    @property
    def n_courses(self) -> int:
        return len(self.courses)

    @property
    def n_rooms(self) -> int:
        return len(self.rooms)

    @property
    def n_curricula(self) -> int:
        return len(self.curricula)

    @cached_property
    def n_lectures(self) -> int:
        return sum(c.n_lectures for c in self.courses)

    @cached_property
    def course_index(self) -> dict[str, int]:
        return {c.id: i for i, c in enumerate(self.courses)}

    @cached_property
    def room_index(self) -> dict[str, int]:
        return {r.id: i for i, r in enumerate(self.rooms)}

    @cached_property
    def course_first_lecture(self) -> np.ndarray:
        counts = np.array([c.n_lectures for c in self.courses], dtype=np.int64)
        return np.concatenate(([0], np.cumsum(counts)[:-1])).astype(np.int64)

    @cached_property
    def lecture_course(self) -> np.ndarray:
        return np.repeat(np.arange(self.n_courses, dtype=np.int64),
                         [c.n_lectures for c in self.courses])

    @cached_property
    def available(self) -> np.ndarray:
        """Boolean ``(n_courses, n_periods)`` availability matrix."""
        av = np.ones((self.n_courses, self.n_periods), dtype=np.bool_)
        for u in self.unavailabilities:
            av[u.course_index, u.day * self.periods_per_day + u.timeslot] = False
        av.flags.writeable = False
        return av

    @cached_property
    def course_curricula(self) -> tuple[tuple[int, ...], ...]:
        member: list[list[int]] = [[] for _ in self.courses]
        for qi, q in enumerate(self.curricula):
            for c in q.course_indices:
                member[c].append(qi)
        return tuple(tuple(m) for m in member)

    def period(self, day: int, timeslot: int) -> int:
        return day * self.periods_per_day + timeslot

    def day_timeslot(self, period: int) -> tuple[int, int]:
        return divmod(period, self.periods_per_day)


def _check_unique(kind: str, ids: list[str]) -> None:
    seen: set[str] = set()
    for i in ids:
        if i in seen:
            raise ValueError(f"duplicate {kind} id {i!r}")
        seen.add(i)


# -- .ctt reader / writer ----------------------------------------------------------


class _Lines:
    """Non-blank lines with their 1-based line numbers."""

    def __init__(self, text: str):
        self.items = [(no, ln.split()) for no, ln in enumerate(text.splitlines(), 1) if ln.strip()]
        self.pos = 0

    def peek(self):
        if self.pos >= len(self.items):
            return None, None
        return self.items[self.pos]

    def next(self, what: str):
        if self.pos >= len(self.items):
            last = self.items[-1][0] if self.items else 0
            raise CttFormatError(f"unexpected end of input, expected {what}", last + 1)
        item = self.items[self.pos]
        self.pos += 1
        return item


def _int(tok: str, no: int, what: str) -> int:
    try:
        return int(tok)
    except ValueError:
        raise CttFormatError(f"expected integer for {what}, got {tok!r}", no) from None


def _section(lines: _Lines, label: str) -> None:
    no, toks = lines.next(label)
    if toks != [label]:
        raise CttFormatError(f"expected {label}", no)


def _rows(lines: _Lines, section: str, expected: int, next_label: str, min_tokens: int):
    rows = []
    for _ in range(expected):
        no, toks = lines.peek()
        if toks is None or toks == [next_label] or toks == ["END."]:
            raise CttFormatError(
                f"{section} section has fewer rows ({len(rows)}) than the header count {expected}",
                no if no is not None else None)
        lines.next(section)
        if len(toks) < min_tokens:
            raise CttFormatError(f"malformed {section} row: {' '.join(toks)!r}", no)
        rows.append((no, toks))
    no, toks = lines.peek()
    if toks is not None and toks != [next_label]:
        raise CttFormatError(
            f"{section} section has more rows than the header count {expected}", no)
    return rows


def parse_ctt(text: str) -> Instance:
    """Parse an ITC-2007 curriculum-track instance.

    Raises CttFormatError (with the offending line number) on syntax errors,
    header/section count mismatches, duplicate ids, undeclared ids, and
    out-of-range unavailability entries.
    """
    lines = _Lines(text)
    header: dict[str, str] = {}
    for key in HEADER_KEYS:
        no, toks = lines.next(f"{key}:")
        if not toks or toks[0] != f"{key}:" or len(toks) < 2:
            raise CttFormatError(f"expected '{key}: <value>'", no)
        header[key] = " ".join(toks[1:]) if key == "Name" else toks[1]
        if key != "Name":
            header[key] = str(_int(toks[1], no, key))
    n_courses, n_rooms = int(header["Courses"]), int(header["Rooms"])
    n_days, ppd = int(header["Days"]), int(header["Periods_per_day"])
    n_curricula, n_constraints = int(header["Curricula"]), int(header["Constraints"])
    if n_days < 1 or ppd < 1:
        raise CttFormatError("Days and Periods_per_day must be positive")

    _section(lines, "COURSES:")
    courses: list[Course] = []
    index: dict[str, int] = {}
    for no, t in _rows(lines, "COURSES", n_courses, "ROOMS:", 5):
        if t[0] in index:
            raise CttFormatError(f"duplicate course id {t[0]!r}", no)
        try:
            course = Course(t[0], t[1], _int(t[2], no, "lectures"), _int(t[3], no, "min working days"),
                            _int(t[4], no, "students"))
        except ValueError as e:
            if isinstance(e, CttFormatError):
                raise
            raise CttFormatError(str(e), no) from None
        index[t[0]] = len(courses)
        courses.append(course)

    _section(lines, "ROOMS:")
    rooms: list[Room] = []
    room_ids: set[str] = set()
    for no, t in _rows(lines, "ROOMS", n_rooms, "CURRICULA:", 2):
        if t[0] in room_ids:
            raise CttFormatError(f"duplicate room id {t[0]!r}", no)
        cap = _int(t[1], no, "capacity")
        if cap < 0:
            raise CttFormatError("negative room capacity", no)
        room_ids.add(t[0])
        rooms.append(Room(t[0], cap))

    _section(lines, "CURRICULA:")
    curricula: list[Curriculum] = []
    curr_ids: set[str] = set()
    for no, t in _rows(lines, "CURRICULA", n_curricula, "UNAVAILABILITY_CONSTRAINTS:", 2):
        if t[0] in curr_ids:
            raise CttFormatError(f"duplicate curriculum id {t[0]!r}", no)
        k = _int(t[1], no, "curriculum size")
        members = t[2:]
        if len(members) != k:
            raise CttFormatError(f"curriculum {t[0]} declares {k} courses but lists {len(members)}", no)
        idx = []
        for cid in members:
            if cid not in index:
                raise CttFormatError(f"curriculum {t[0]} references undeclared course {cid!r}", no)
            idx.append(index[cid])
        if len(set(idx)) != len(idx):
            raise CttFormatError(f"curriculum {t[0]} lists a course twice", no)
        curr_ids.add(t[0])
        curricula.append(Curriculum(t[0], tuple(idx)))

    _section(lines, "UNAVAILABILITY_CONSTRAINTS:")
    unav: list[Unavailability] = []
    seen: set[Unavailability] = set()
    for no, t in _rows(lines, "UNAVAILABILITY_CONSTRAINTS", n_constraints, "END.", 3):
        if t[0] not in index:
            raise CttFormatError(f"unavailability references undeclared course {t[0]!r}", no)
        d, s = _int(t[1], no, "day"), _int(t[2], no, "timeslot")
        if not (0 <= d < n_days and 0 <= s < ppd):
            raise CttFormatError(f"unavailability day/timeslot out of range: {d} {s}", no)
        u = Unavailability(index[t[0]], d, s)
        if u in seen:
            logger.warning("line %d: duplicate unavailability %s %d %d ignored", no, t[0], d, s)
            continue
        seen.add(u)
        unav.append(u)

    no, toks = lines.next("END.")
    if toks != ["END."]:
        raise CttFormatError("expected END.", no)

    return Instance(header["Name"], n_days, ppd, tuple(courses), tuple(rooms), tuple(curricula),
                    tuple(unav))


def load_ctt(path: str | Path) -> Instance:
    return parse_ctt(Path(path).read_text())


def format_ctt(inst: Instance) -> str:
    """Serialize in the layout used by the published ITC-2007 files."""
    out = [
        f"Name: {inst.name}",
        f"Courses: {inst.n_courses}",
        f"Rooms: {inst.n_rooms}",
        f"Days: {inst.n_days}",
        f"Periods_per_day: {inst.periods_per_day}",
        f"Curricula: {inst.n_curricula}",
        f"Constraints: {len(inst.unavailabilities)}",
        "",
        "COURSES:",
    ]
    out += [f"{c.id} {c.teacher} {c.n_lectures} {c.min_working_days} {c.n_students}"
            for c in inst.courses]
    out += ["", "ROOMS:"]
    out += [f"{r.id}\t{r.capacity}" for r in inst.rooms]
    out += ["", "CURRICULA:"]
    for q in inst.curricula:
        ids = " ".join(inst.courses[c].id for c in q.course_indices)
        out.append(f"{q.id}  {len(q.course_indices)} {ids}")
    out += ["", "UNAVAILABILITY_CONSTRAINTS:"]
    out += [f"{inst.courses[u.course_index].id} {u.day} {u.timeslot}" for u in inst.unavailabilities]
    out += ["", "END.", ""]
    return "\n".join(out)


# -- screening ---------------------------------------------------------------------


class Screening(str, enum.Enum):
    PROVABLY_INFEASIBLE = "ProvablyInfeasible"
    UNREALISTIC_ROOM_ENDOWMENT = "UnrealisticRoomEndowment"


@dataclass(frozen=True)
class Finding:
    kind: Screening
    message: str
    course_index: int | None = None


def validate_instance(inst: Instance) -> list[Finding]:
    """Screen an instance for the classes that make it useless as tuning data."""
    findings: list[Finding] = []
    n_avail = inst.available.sum(axis=1)
    for ci, c in enumerate(inst.courses):
        if n_avail[ci] < c.n_lectures:
            findings.append(Finding(
                Screening.PROVABLY_INFEASIBLE,
                f"course {c.id} has {c.n_lectures} lectures but only {n_avail[ci]} available periods",
                ci))
    if inst.n_lectures > inst.n_rooms * inst.n_periods:
        findings.append(Finding(
            Screening.PROVABLY_INFEASIBLE,
            f"{inst.n_lectures} lectures exceed {inst.n_rooms * inst.n_periods} room-period slots"))
    max_cap = max((r.capacity for r in inst.rooms), default=0)
    for ci, c in enumerate(inst.courses):
        if c.n_students > max_cap:
            findings.append(Finding(
                Screening.UNREALISTIC_ROOM_ENDOWMENT,
                f"course {c.id} has {c.n_students} students, largest room seats {max_cap}",
                ci))
    return findings


def is_provably_infeasible(inst: Instance) -> bool:
    return any(f.kind is Screening.PROVABLY_INFEASIBLE for f in validate_instance(inst))


def conflict_pairs(inst: Instance) -> frozenset[tuple[int, int]]:
    """Unordered course pairs ``(a, b)``, ``a < b``, sharing a curriculum or a teacher."""
    pairs: set[tuple[int, int]] = set()
    for q in inst.curricula:
        for a, b in combinations(sorted(q.course_indices), 2):
            pairs.add((a, b))
    by_teacher: dict[str, list[int]] = {}
    for i, c in enumerate(inst.courses):
        by_teacher.setdefault(c.teacher, []).append(i)
    for group in by_teacher.values():
        pairs.update(combinations(group, 2))
    return frozenset(pairs)


# -- features ----------------------------------------------------------------------


@dataclass(frozen=True)
class FeatureVector:
    Le: int
    Cu: int
    RO: float
    Co: float
    Av: float
    RS: float
    DL: float

    def to_dict(self) -> dict[str, float]:
        return {k: getattr(self, k) for k in FEATURE_NAMES}

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, k) for k in FEATURE_NAMES], dtype=float)


def extract_features(inst: Instance) -> FeatureVector:
    if inst.n_rooms == 0 or inst.n_periods == 0:
        raise DegenerateInstanceError("feature extraction needs at least one room and one period")
    le = inst.n_lectures
    n_c = inst.n_courses
    ro = 100.0 * le / (inst.n_rooms * inst.n_periods)
    n_pairs = math.comb(n_c, 2)
    co = 100.0 * len(conflict_pairs(inst)) / n_pairs if n_pairs else 0.0
    av = 100.0 * (1.0 - len(inst.unavailabilities) / (n_c * inst.n_periods)) if n_c else 100.0
    caps = np.array([r.capacity for r in inst.rooms])
    rs = float(np.mean([100.0 * np.mean(caps >= c.n_students) for c in inst.courses])) if n_c else 100.0
    if inst.curricula:
        curr_lectures = sum(inst.courses[c].n_lectures for q in inst.curricula for c in q.course_indices)
        dl = curr_lectures / (inst.n_curricula * inst.n_days)
    else:
        dl = 0.0
    return FeatureVector(Le=le, Cu=inst.n_curricula, RO=ro, Co=co, Av=av, RS=rs, DL=dl)


# -- toy generator -----------------------------------------------------------------


def generate_toy_instance(n_days: int, periods_per_day: int, n_rooms: int, n_courses: int,
                          n_curricula: int, seed: int, n_lectures: int | None = None) -> Instance:
    """Small random instance for tests; never provably infeasible.

    Every course belongs to at least one curriculum (round-robin), so with a single
    curriculum all courses conflict. ``n_lectures`` fixes the lecture total.
    """
    for name, v in (("n_days", n_days), ("periods_per_day", periods_per_day), ("n_rooms", n_rooms),
                    ("n_courses", n_courses), ("n_curricula", n_curricula)):
        if v < 1:
            raise ValueError(f"{name} must be >= 1")
    n_periods = n_days * periods_per_day
    if n_lectures is not None and not n_courses <= n_lectures <= n_courses * n_periods:
        raise ValueError(
            f"cannot spread {n_lectures} lectures over {n_courses} courses with {n_periods} periods")
    if n_lectures is not None and n_lectures > n_rooms * n_periods:
        raise ValueError(f"{n_lectures} lectures cannot fit {n_rooms * n_periods} room-period slots")

    rng = np.random.default_rng(seed)
    if n_lectures is None:
        lectures = rng.integers(1, min(3, n_periods) + 1, size=n_courses)
        while lectures.sum() > n_rooms * n_periods:
            lectures[int(np.argmax(lectures))] -= 1
    else:
        lectures = np.ones(n_courses, dtype=np.int64)
        for _ in range(n_lectures - n_courses):
            open_ = np.flatnonzero(lectures < n_periods)
            lectures[rng.choice(open_)] += 1

    n_teachers = max(1, (n_courses + 1) // 2)
    courses = []
    for i in range(n_courses):
        nl = int(lectures[i])
        courses.append(Course(
            id=f"c{i:02d}",
            teacher=f"t{int(rng.integers(n_teachers)):02d}",
            n_lectures=nl,
            min_working_days=int(rng.integers(1, min(nl, n_days) + 1)),
            n_students=int(rng.integers(5, 61)),
        ))
    rooms = tuple(Room(f"r{i}", int(rng.integers(10, 71))) for i in range(n_rooms))

    members: list[set[int]] = [set() for _ in range(n_curricula)]
    for i in range(n_courses):
        members[i % n_curricula].add(i)
    for q in members:
        extra = rng.integers(0, n_courses, size=int(rng.integers(0, 2)))
        q.update(int(e) for e in extra)
    curricula = tuple(Curriculum(f"q{j}", tuple(sorted(m))) for j, m in enumerate(members))

    unav: list[Unavailability] = []
    for i, c in enumerate(courses):
        blocked = np.flatnonzero(rng.random(n_periods) < 0.15)
        spare = n_periods - c.n_lectures
        for p in blocked[:spare]:
            d, s = divmod(int(p), periods_per_day)
            unav.append(Unavailability(i, d, s))

    return Instance(f"toy-{seed}", n_days, periods_per_day, tuple(courses), rooms, curricula,
                    tuple(unav))


def instances_from_paths(paths: Iterable[str | Path]) -> list[Instance]:
    return [load_ctt(p) for p in paths]
