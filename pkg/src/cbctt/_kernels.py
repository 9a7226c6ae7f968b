"""Compiled hot paths: incremental tables, move deltas, sampling, the annealing loop.

Static instance data and mutable timetable state travel as namedtuples of arrays
so every kernel works on integer indices only.
"""

from __future__ import annotations

from collections import namedtuple

import numpy as np
from numba import njit

W_MWD = 5
W_ISO = 2
W_CAP = 1
W_STAB = 1
MAX_TRIES = 10_000

Static = namedtuple(
    "Static",
    "n_days ppd n_periods n_rooms n_curricula lec_course course_first course_nlect "
    "course_students course_mwd room_cap available conf_ptr conf_idx cc_ptr cc_idx "
    "period_day period_slot",
)
State = namedtuple(
    "State",
    "lec_period lec_room occ course_period course_day course_ndays course_room course_nrooms "
    "curr_period empty_slot empty_pos n_empty",
)


def build_static(inst, pairs) -> Static:
    n_c = inst.n_courses
    conf: list[list[int]] = [[] for _ in range(n_c)]
    for a, b in sorted(pairs):
        conf[a].append(b)
        conf[b].append(a)
    conf_ptr = np.zeros(n_c + 1, dtype=np.int64)
    conf_ptr[1:] = np.cumsum([len(x) for x in conf])
    conf_idx = np.array([b for x in conf for b in x], dtype=np.int64)
    cc = inst.course_curricula
    cc_ptr = np.zeros(n_c + 1, dtype=np.int64)
    cc_ptr[1:] = np.cumsum([len(x) for x in cc])
    cc_idx = np.array([q for x in cc for q in x], dtype=np.int64)
    return Static(
        n_days=inst.n_days,
        ppd=inst.periods_per_day,
        n_periods=inst.n_periods,
        n_rooms=inst.n_rooms,
        n_curricula=inst.n_curricula,
        lec_course=inst.lecture_course.copy(),
        course_first=inst.course_first_lecture.copy(),
        course_nlect=np.array([c.n_lectures for c in inst.courses], dtype=np.int64),
        course_students=np.array([c.n_students for c in inst.courses], dtype=np.int64),
        course_mwd=np.array([c.min_working_days for c in inst.courses], dtype=np.int64),
        room_cap=np.array([r.capacity for r in inst.rooms], dtype=np.int64),
        available=inst.available.astype(np.uint8),
        conf_ptr=conf_ptr,
        conf_idx=conf_idx,
        cc_ptr=cc_ptr,
        cc_idx=cc_idx,
        period_day=np.arange(inst.n_periods, dtype=np.int64) // inst.periods_per_day,
        period_slot=np.arange(inst.n_periods, dtype=np.int64) % inst.periods_per_day,
    )


def empty_state(S: Static, periods: np.ndarray, rooms: np.ndarray) -> State:
    n_c = S.course_nlect.shape[0]
    X = State(
        lec_period=np.asarray(periods, dtype=np.int64).copy(),
        lec_room=np.asarray(rooms, dtype=np.int64).copy(),
        occ=np.zeros((S.n_periods, S.n_rooms), dtype=np.int64),
        course_period=np.zeros((n_c, S.n_periods), dtype=np.int64),
        course_day=np.zeros((n_c, S.n_days), dtype=np.int64),
        course_ndays=np.zeros(n_c, dtype=np.int64),
        course_room=np.zeros((n_c, S.n_rooms), dtype=np.int64),
        course_nrooms=np.zeros(n_c, dtype=np.int64),
        curr_period=np.zeros((S.n_curricula, S.n_periods), dtype=np.int64),
        empty_slot=np.zeros(S.n_periods * S.n_rooms, dtype=np.int64),
        empty_pos=np.zeros(S.n_periods * S.n_rooms, dtype=np.int64),
        n_empty=np.zeros(1, dtype=np.int64),
    )
    rebuild(S, X)
    return X


@njit(cache=True)
def rebuild(S, X):
    X.occ[:] = 0
    X.course_period[:] = 0
    X.course_day[:] = 0
    X.course_ndays[:] = 0
    X.course_room[:] = 0
    X.course_nrooms[:] = 0
    X.curr_period[:] = 0
    for lec in range(X.lec_period.shape[0]):
        c = S.lec_course[lec]
        p = X.lec_period[lec]
        r = X.lec_room[lec]
        X.occ[p, r] += 1
        X.course_period[c, p] += 1
        d = p // S.ppd
        if X.course_day[c, d] == 0:
            X.course_ndays[c] += 1
        X.course_day[c, d] += 1
        if X.course_room[c, r] == 0:
            X.course_nrooms[c] += 1
        X.course_room[c, r] += 1
        for k in range(S.cc_ptr[c], S.cc_ptr[c + 1]):
            X.curr_period[S.cc_idx[k], p] += 1
    # unordered list of empty (period, room) slots with back-pointers for O(1) updates
    n = 0
    for slot in range(S.n_periods * S.n_rooms):
        if X.occ[slot // S.n_rooms, slot % S.n_rooms] == 0:
            X.empty_slot[n] = slot
            X.empty_pos[slot] = n
            n += 1
        else:
            X.empty_pos[slot] = -1
    X.n_empty[0] = n


@njit(cache=True)
def _slot_filled(X, slot):
    k = X.empty_pos[slot]
    n = X.n_empty[0] - 1
    last = X.empty_slot[n]
    X.empty_slot[k] = last
    X.empty_pos[last] = k
    X.empty_pos[slot] = -1
    X.n_empty[0] = n


@njit(cache=True)
def _slot_freed(X, slot):
    n = X.n_empty[0]
    X.empty_slot[n] = slot
    X.empty_pos[slot] = n
    X.n_empty[0] = n + 1


# -- from-scratch cost (independent of the incremental tables) ---------------------


@njit(cache=True)
def cost_components(S, lec_period, lec_room):
    """Violation counts: conflicts, room_occupancy, room_capacity, min_working_days,
    isolated_lectures, room_stability."""
    L = lec_period.shape[0]
    n_c = S.course_nlect.shape[0]
    out = np.zeros(6, dtype=np.int64)
    conflict = np.zeros((n_c, n_c), dtype=np.uint8)
    for a in range(n_c):
        for k in range(S.conf_ptr[a], S.conf_ptr[a + 1]):
            conflict[a, S.conf_idx[k]] = 1
    for i in range(L):
        for j in range(i + 1, L):
            if lec_period[i] == lec_period[j] and conflict[S.lec_course[i], S.lec_course[j]]:
                out[0] += 1
    occ = np.zeros((S.n_periods, S.n_rooms), dtype=np.int64)
    for i in range(L):
        occ[lec_period[i], lec_room[i]] += 1
    for p in range(S.n_periods):
        for r in range(S.n_rooms):
            if occ[p, r] > 1:
                out[1] += occ[p, r] - 1
    for i in range(L):
        excess = S.course_students[S.lec_course[i]] - S.room_cap[lec_room[i]]
        if excess > 0:
            out[2] += excess
    for c in range(n_c):
        days = np.zeros(S.n_days, dtype=np.uint8)
        rooms = np.zeros(S.n_rooms, dtype=np.uint8)
        for i in range(S.course_first[c], S.course_first[c] + S.course_nlect[c]):
            days[lec_period[i] // S.ppd] = 1
            rooms[lec_room[i]] = 1
        nd = days.sum()
        if S.course_mwd[c] > nd:
            out[3] += S.course_mwd[c] - nd
        out[5] += rooms.sum() - 1
    cp = np.zeros((S.n_curricula, S.n_periods), dtype=np.int64)
    for i in range(L):
        c = S.lec_course[i]
        for k in range(S.cc_ptr[c], S.cc_ptr[c + 1]):
            cp[S.cc_idx[k], lec_period[i]] += 1
    for q in range(S.n_curricula):
        for p in range(S.n_periods):
            out[4] += _isolated(S, cp, q, p)
    return out


@njit(cache=True)
def weighted(parts, w_hard):
    return (w_hard * (parts[0] + parts[1]) + W_CAP * parts[2] + W_MWD * parts[3]
            + W_ISO * parts[4] + W_STAB * parts[5])


# -- incremental evaluation --------------------------------------------------------


@njit(cache=True)
def _isolated(S, cp, q, p):
    # a lone curriculum lecture with no curriculum lecture in a neighbouring timeslot of its day;
    # several lectures sharing the period count as adjacent to each other
    if cp[q, p] != 1:
        return 0
    t = p % S.ppd
    if t > 0 and cp[q, p - 1] > 0:
        return 0
    if t < S.ppd - 1 and cp[q, p + 1] > 0:
        return 0
    return 1


@njit(cache=True)
def _iso_window_sum(S, cp, q, p1, p2):
    # isolated count over the timeslots around p1 and p2 within their days, each period once
    d1 = p1 // S.ppd
    s = 0
    for off in (-1, 0, 1):
        p = p1 + off
        if 0 <= p < S.n_periods and p // S.ppd == d1:
            s += _isolated(S, cp, q, p)
    for off in (-1, 0, 1):
        p = p2 + off
        if 0 <= p < S.n_periods and p // S.ppd == p2 // S.ppd:
            if p // S.ppd == d1 and abs(p - p1) <= 1:
                continue
            s += _isolated(S, cp, q, p)
    return s


@njit(cache=True)
def ml_applicable(S, X, lec, p2, r2):
    if lec < 0 or lec >= X.lec_period.shape[0]:
        return False
    if p2 < 0 or p2 >= S.n_periods or r2 < 0 or r2 >= S.n_rooms:
        return False
    p1 = X.lec_period[lec]
    if p1 == p2 and X.lec_room[lec] == r2:
        return False
    c = S.lec_course[lec]
    if not S.available[c, p2]:
        return False
    if p1 != p2 and X.course_period[c, p2] > 0:
        return False
    return True


@njit(cache=True)
def sl_applicable(S, X, la, lb):
    L = X.lec_period.shape[0]
    if la < 0 or lb < 0 or la >= L or lb >= L:
        return False
    ca = S.lec_course[la]
    cb = S.lec_course[lb]
    if ca == cb:
        return False
    pa = X.lec_period[la]
    pb = X.lec_period[lb]
    if not S.available[ca, pb] or not S.available[cb, pa]:
        return False
    if pa != pb and (X.course_period[ca, pb] > 0 or X.course_period[cb, pa] > 0):
        return False
    return True


@njit(cache=True)
def ml_delta(S, X, lec, p2, r2, w_hard):
    c = S.lec_course[lec]
    p1 = X.lec_period[lec]
    r1 = X.lec_room[lec]
    delta = 0
    if p1 != p2 or r1 != r2:
        if X.occ[p1, r1] > 1:
            delta -= w_hard
        if X.occ[p2, r2] > 0:
            delta += w_hard
    if r1 != r2:
        st = S.course_students[c]
        delta += W_CAP * (max(0, st - S.room_cap[r2]) - max(0, st - S.room_cap[r1]))
        nr = X.course_nrooms[c]
        after = nr
        if X.course_room[c, r1] == 1:
            after -= 1
        if X.course_room[c, r2] == 0:
            after += 1
        delta += W_STAB * (after - nr)
    if p1 != p2:
        clash = 0
        for k in range(S.conf_ptr[c], S.conf_ptr[c + 1]):
            c2 = S.conf_idx[k]
            clash += X.course_period[c2, p2] - X.course_period[c2, p1]
        delta += w_hard * clash
        d1 = p1 // S.ppd
        d2 = p2 // S.ppd
        if d1 != d2:
            nd = X.course_ndays[c]
            after = nd
            if X.course_day[c, d1] == 1:
                after -= 1
            if X.course_day[c, d2] == 0:
                after += 1
            mwd = S.course_mwd[c]
            delta += W_MWD * (max(0, mwd - after) - max(0, mwd - nd))
        cp = X.curr_period
        iso = 0
        for k in range(S.cc_ptr[c], S.cc_ptr[c + 1]):
            q = S.cc_idx[k]
            before = _iso_window_sum(S, cp, q, p1, p2)
            cp[q, p1] -= 1
            cp[q, p2] += 1
            iso += _iso_window_sum(S, cp, q, p1, p2) - before
            cp[q, p2] -= 1
            cp[q, p1] += 1
        delta += W_ISO * iso
    return delta


@njit(cache=True)
def apply_ml(S, X, lec, p2, r2):
    c = S.lec_course[lec]
    p1 = X.lec_period[lec]
    r1 = X.lec_room[lec]
    if p1 == p2 and r1 == r2:
        return
    X.occ[p1, r1] -= 1
    if X.occ[p1, r1] == 0:
        _slot_freed(X, p1 * S.n_rooms + r1)
    if X.occ[p2, r2] == 0:
        _slot_filled(X, p2 * S.n_rooms + r2)
    X.occ[p2, r2] += 1
    X.course_period[c, p1] -= 1
    X.course_period[c, p2] += 1
    d1 = p1 // S.ppd
    d2 = p2 // S.ppd
    X.course_day[c, d1] -= 1
    if X.course_day[c, d1] == 0:
        X.course_ndays[c] -= 1
    if X.course_day[c, d2] == 0:
        X.course_ndays[c] += 1
    X.course_day[c, d2] += 1
    X.course_room[c, r1] -= 1
    if X.course_room[c, r1] == 0:
        X.course_nrooms[c] -= 1
    if X.course_room[c, r2] == 0:
        X.course_nrooms[c] += 1
    X.course_room[c, r2] += 1
    for k in range(S.cc_ptr[c], S.cc_ptr[c + 1]):
        q = S.cc_idx[k]
        X.curr_period[q, p1] -= 1
        X.curr_period[q, p2] += 1
    X.lec_period[lec] = p2
    X.lec_room[lec] = r2


@njit(cache=True)
def sl_delta(S, X, la, lb, w_hard):
    pa = X.lec_period[la]
    ra = X.lec_room[la]
    pb = X.lec_period[lb]
    rb = X.lec_room[lb]
    if pa == pb and ra == rb:
        return 0
    d = ml_delta(S, X, la, pb, rb, w_hard)
    apply_ml(S, X, la, pb, rb)
    d += ml_delta(S, X, lb, pa, ra, w_hard)
    apply_ml(S, X, la, pa, ra)
    return d


@njit(cache=True)
def apply_sl(S, X, la, lb):
    pa = X.lec_period[la]
    ra = X.lec_room[la]
    pb = X.lec_period[lb]
    rb = X.lec_room[lb]
    if pa == pb and ra == rb:
        return
    apply_ml(S, X, la, pb, rb)
    apply_ml(S, X, lb, pa, ra)


# -- move sampling -----------------------------------------------------------------


@njit(cache=True)
def _randint(rng, n):
    # float draw: several times cheaper than Generator.integers inside compiled code
    k = np.int64(rng.random() * n)
    return k if k < n else n - 1


@njit(cache=True)
def sample_ml(S, X, rng, restrict_empty):
    """Uniform applicable (lecture, period, room) by rejection; lecture -1 when exhausted."""
    L = X.lec_period.shape[0]
    for _ in range(MAX_TRIES):
        lec = _randint(rng, L)
        if restrict_empty:
            # uniform over empty slots: same law as rejecting occupied uniform slots
            n = X.n_empty[0]
            if n == 0:
                return -1, -1, -1
            slot = X.empty_slot[_randint(rng, n)]
            p = slot // S.n_rooms
            r = slot - p * S.n_rooms
        else:
            p = _randint(rng, S.n_periods)
            r = _randint(rng, S.n_rooms)
        if ml_applicable(S, X, lec, p, r):
            return lec, p, r
    return -1, -1, -1


@njit(cache=True)
def sample_sl(S, X, rng):
    L = X.lec_period.shape[0]
    for _ in range(MAX_TRIES):
        la = _randint(rng, L)
        lb = _randint(rng, L)
        if sl_applicable(S, X, la, lb):
            return la, lb
    return -1, -1


# -- annealing ---------------------------------------------------------------------

# indices into the integer run-state vector
IT, LEVEL_S, LEVEL_A, CUR, BEST, NTRACE, PLATEAU, STATUS = range(8)


@njit(cache=True)
def anneal_chunk(S, X, rng, T, fparams, iparams, run, stop_it, best_period, best_room,
                 tr_it, tr_t, tr_cur, tr_best):
    """Advance one run until ``run[IT] == stop_it``; resumable across calls.

    fparams = (T_min, cr, sr); iparams = (n_s, n_a, w_hard, restrict_empty, can_swap).
    ``T`` is a one-element array holding the current temperature.

    Everything is written out inline: calls between compiled functions that take
    arrays cost far more here than the move evaluation itself. A swap is evaluated
    as two moves applied in sequence and undone when rejected; the result agrees
    with ``sl_delta``/``apply_sl``.
    """
    t_min = fparams[0]
    cr = fparams[1]
    sr = fparams[2]
    n_s = iparams[0]
    n_a = iparams[1]
    w_hard = iparams[2]
    restrict = iparams[3] != 0
    can_swap = iparams[4] != 0

    ppd = S.ppd
    n_p = S.n_periods
    n_r = S.n_rooms
    lec_course = S.lec_course
    course_students = S.course_students
    course_mwd = S.course_mwd
    room_cap = S.room_cap
    available = S.available
    conf_ptr = S.conf_ptr
    conf_idx = S.conf_idx
    cc_ptr = S.cc_ptr
    cc_idx = S.cc_idx
    pday = S.period_day
    pslot = S.period_slot
    lec_period = X.lec_period
    lec_room = X.lec_room
    occ = X.occ
    course_period = X.course_period
    course_day = X.course_day
    course_ndays = X.course_ndays
    course_room = X.course_room
    course_nrooms = X.course_nrooms
    curr_period = X.curr_period
    empty_slot = X.empty_slot
    empty_pos = X.empty_pos
    n_empty = X.n_empty[0]
    n_lec = lec_period.shape[0]

    mv_l = np.zeros(2, dtype=np.int64)
    mv_p = np.zeros(2, dtype=np.int64)
    mv_r = np.zeros(2, dtype=np.int64)
    old_p = np.zeros(2, dtype=np.int64)
    old_r = np.zeros(2, dtype=np.int64)

    temp = T[0]
    it = run[IT]
    s = run[LEVEL_S]
    a = run[LEVEL_A]
    cur = run[CUR]
    best = run[BEST]
    plateau = run[PLATEAU] != 0
    ntr = run[NTRACE]
    while it < stop_it:
        # -- draw a move as a list of up to two lecture relocations
        n_mv = 0
        want_sl = can_swap and rng.random() < sr
        first_sl = want_sl
        found = False
        for _attempt in range(2):
            if want_sl:
                la = 0
                lb = 0
                for _ in range(MAX_TRIES):
                    la = _randint(rng, n_lec)
                    lb = _randint(rng, n_lec)
                    ca = lec_course[la]
                    cb = lec_course[lb]
                    if ca == cb:
                        continue
                    pa = lec_period[la]
                    pb = lec_period[lb]
                    if available[ca, pb] == 0 or available[cb, pa] == 0:
                        continue
                    if pa != pb and (course_period[ca, pb] > 0 or course_period[cb, pa] > 0):
                        continue
                    found = True
                    break
                if found:
                    pa = lec_period[la]
                    pb = lec_period[lb]
                    ra = lec_room[la]
                    rb = lec_room[lb]
                    if pa != pb or ra != rb:
                        mv_l[0] = la
                        mv_p[0] = pb
                        mv_r[0] = rb
                        mv_l[1] = lb
                        mv_p[1] = pa
                        mv_r[1] = ra
                        n_mv = 2
                    break
            else:
                for _ in range(MAX_TRIES):
                    lec = _randint(rng, n_lec)
                    if restrict:
                        if n_empty == 0:
                            break
                        slot = empty_slot[_randint(rng, n_empty)]
                        p2 = slot // n_r
                        r2 = slot - p2 * n_r
                    else:
                        p2 = _randint(rng, n_p)
                        r2 = _randint(rng, n_r)
                    p1 = lec_period[lec]
                    if p1 == p2 and lec_room[lec] == r2:
                        continue
                    c = lec_course[lec]
                    if available[c, p2] == 0:
                        continue
                    if p1 != p2 and course_period[c, p2] > 0:
                        continue
                    mv_l[0] = lec
                    mv_p[0] = p2
                    mv_r[0] = r2
                    n_mv = 1
                    found = True
                    break
                if found:
                    break
            # the chosen neighborhood looks empty here: draw from the other one instead
            if not want_sl and not can_swap:
                break
            want_sl = not want_sl
        if not found:
            run[STATUS] = 1 if first_sl else 2
            break

        # -- evaluate while applying; phase 1 replays the relocations backwards
        delta = 0
        phase = 0
        while True:
            for k in range(n_mv):
                if phase == 0:
                    lec = mv_l[k]
                    p2 = mv_p[k]
                    r2 = mv_r[k]
                else:
                    j = n_mv - 1 - k
                    lec = mv_l[j]
                    p2 = old_p[j]
                    r2 = old_r[j]
                c = lec_course[lec]
                p1 = lec_period[lec]
                r1 = lec_room[lec]
                if p1 == p2 and r1 == r2:
                    continue
                d1 = pday[p1]
                d2 = pday[p2]
                if phase == 0:
                    old_p[k] = p1
                    old_r[k] = r1
                    if occ[p1, r1] > 1:
                        delta -= w_hard
                    if occ[p2, r2] > 0:
                        delta += w_hard
                    if r1 != r2:
                        st = course_students[c]
                        e1 = max(0, st - room_cap[r1])
                        e2 = max(0, st - room_cap[r2])
                        delta += W_CAP * (e2 - e1)
                        chg = 0
                        if course_room[c, r1] == 1:
                            chg -= 1
                        if course_room[c, r2] == 0:
                            chg += 1
                        delta += W_STAB * chg
                    if p1 != p2:
                        clash = 0
                        for k2 in range(conf_ptr[c], conf_ptr[c + 1]):
                            c2 = conf_idx[k2]
                            clash += course_period[c2, p2] - course_period[c2, p1]
                        delta += w_hard * clash
                        if d1 != d2:
                            nd = course_ndays[c]
                            after = nd
                            if course_day[c, d1] == 1:
                                after -= 1
                            if course_day[c, d2] == 0:
                                after += 1
                            mwd = course_mwd[c]
                            delta += W_MWD * (max(0, mwd - after) - max(0, mwd - nd))
                        iso = 0
                        for k2 in range(cc_ptr[c], cc_ptr[c + 1]):
                            q = cc_idx[k2]
                            for side in range(2):
                                if side == 1:
                                    curr_period[q, p1] -= 1
                                    curr_period[q, p2] += 1
                                sgn = 1 if side == 1 else -1
                                # each period around p1 and p2 within its day, counted once
                                for j6 in range(6):
                                    if j6 < 3:
                                        p = p1 + j6 - 1
                                        dd = d1
                                    else:
                                        p = p2 + j6 - 4
                                        dd = d2
                                    if p < 0 or p >= n_p or pday[p] != dd:
                                        continue
                                    if j6 >= 3 and dd == d1 and p - p1 <= 1 and p1 - p <= 1:
                                        continue
                                    if curr_period[q, p] != 1:
                                        continue
                                    t = pslot[p]
                                    if t > 0 and curr_period[q, p - 1] > 0:
                                        continue
                                    if t < ppd - 1 and curr_period[q, p + 1] > 0:
                                        continue
                                    iso += sgn
                            curr_period[q, p2] -= 1
                            curr_period[q, p1] += 1
                        delta += W_ISO * iso
                # apply the relocation to every table
                occ[p1, r1] -= 1
                if occ[p1, r1] == 0:
                    slot = p1 * n_r + r1
                    empty_slot[n_empty] = slot
                    empty_pos[slot] = n_empty
                    n_empty += 1
                if occ[p2, r2] == 0:
                    slot = p2 * n_r + r2
                    pos = empty_pos[slot]
                    n_empty -= 1
                    last = empty_slot[n_empty]
                    empty_slot[pos] = last
                    empty_pos[last] = pos
                    empty_pos[slot] = -1
                occ[p2, r2] += 1
                if p1 != p2:
                    course_period[c, p1] -= 1
                    course_period[c, p2] += 1
                    course_day[c, d1] -= 1
                    if course_day[c, d1] == 0:
                        course_ndays[c] -= 1
                    if course_day[c, d2] == 0:
                        course_ndays[c] += 1
                    course_day[c, d2] += 1
                    for k2 in range(cc_ptr[c], cc_ptr[c + 1]):
                        q = cc_idx[k2]
                        curr_period[q, p1] -= 1
                        curr_period[q, p2] += 1
                if r1 != r2:
                    course_room[c, r1] -= 1
                    if course_room[c, r1] == 0:
                        course_nrooms[c] -= 1
                    if course_room[c, r2] == 0:
                        course_nrooms[c] += 1
                    course_room[c, r2] += 1
                lec_period[lec] = p2
                lec_room[lec] = r2
            if phase == 1:
                break
            it += 1
            s += 1
            if delta <= 0 or rng.random() < np.exp(-delta / temp):
                cur += delta
                a += 1
                if cur < best:
                    best = cur
                    best_period[:] = lec_period
                    best_room[:] = lec_room
                break
            phase = 1

        if not plateau and (s >= n_s or a >= n_a):
            temp = temp * cr
            if temp <= t_min:
                temp = t_min
                plateau = True
            s = 0
            a = 0
            if ntr < tr_it.shape[0]:
                tr_it[ntr] = it
                tr_t[ntr] = temp
                tr_cur[ntr] = cur
                tr_best[ntr] = best
                ntr += 1
    X.n_empty[0] = n_empty
    T[0] = temp
    run[IT] = it
    run[LEVEL_S] = s
    run[LEVEL_A] = a
    run[CUR] = cur
    run[BEST] = best
    run[PLATEAU] = 1 if plateau else 0
    run[NTRACE] = ntr


# -- exhaustive search -------------------------------------------------------------


@njit(cache=True)
def brute_force(S, w_hard):
    """Depth-first enumeration of every invariant-satisfying timetable.

    Lectures of one course are interchangeable, so they are placed in strictly
    increasing period order; this drops only duplicate relabelings.
    """
    L = S.lec_course.shape[0]
    n_c = S.course_nlect.shape[0]
    periods = np.zeros(L, dtype=np.int64)
    rooms = np.zeros(L, dtype=np.int64)
    best_p = np.zeros(L, dtype=np.int64)
    best_r = np.zeros(L, dtype=np.int64)
    slot = np.full(L, -1, dtype=np.int64)  # next candidate index p * R + r per depth
    used = np.zeros((n_c, S.n_periods), dtype=np.uint8)
    n_slots = S.n_periods * S.n_rooms
    best = np.int64(-1)
    found = False
    depth = 0
    slot[0] = -1
    while depth >= 0:
        c = S.lec_course[depth]
        if slot[depth] >= 0:
            used[c, periods[depth]] = 0
        nxt = slot[depth] + 1
        if slot[depth] < 0 and depth > 0 and S.lec_course[depth - 1] == c:
            nxt = (periods[depth - 1] + 1) * S.n_rooms
        placed = False
        while nxt < n_slots:
            p = nxt // S.n_rooms
            if S.available[c, p] and used[c, p] == 0:
                placed = True
                break
            nxt += 1
        if not placed:
            slot[depth] = -1
            depth -= 1
            continue
        slot[depth] = nxt
        periods[depth] = nxt // S.n_rooms
        rooms[depth] = nxt % S.n_rooms
        used[c, periods[depth]] = 1
        if depth == L - 1:
            total = weighted(cost_components(S, periods, rooms), w_hard)
            if not found or total < best:
                best = total
                found = True
                best_p[:] = periods
                best_r[:] = rooms
        else:
            depth += 1
            slot[depth] = -1
    return found, best, best_p, best_r
