"""Composite MoveLecture / SwapLectures neighborhood with swap-rate selection."""

from __future__ import annotations

import numpy as np

from . import _kernels as K
from .errors import NeighborhoodExhaustedError
from .evaluation import Move, Timetable
from .instance import Instance


def restrict_to_empty_rooms(inst: Instance) -> bool:
    """ML targets only empty rooms unless lectures fill every room-period slot."""
    return inst.n_lectures < inst.n_rooms * inst.n_periods


def sample_move(inst: Instance, tt: Timetable, sr: float, rng: np.random.Generator) -> Move:
    """Pick SL with probability ``sr`` (else ML), then a uniform applicable move in it.

    Uniformity comes from rejection sampling over raw tuples, capped at
    ``MAX_TRIES`` draws. When the chosen neighborhood yields nothing within the
    cap the other one is tried; NeighborhoodExhaustedError is raised only if
    both come up empty.
    """
    if not 0.0 <= sr <= 1.0:
        raise ValueError("swap rate must lie in [0, 1]")
    S, X = tt._S, tt._X
    want_sl = rng.random() < sr
    for kind in ((True, False) if want_sl else (False, True)):
        if kind:
            la, lb = K.sample_sl(S, X, rng)
            if la >= 0:
                return Move.sl(la, lb)
        else:
            lec, p, r = K.sample_ml(S, X, rng, restrict_to_empty_rooms(inst))
            if lec >= 0:
                return Move.ml(lec, p, r)
    raise NeighborhoodExhaustedError(f"no applicable ML or SL move after {K.MAX_TRIES} draws each")
