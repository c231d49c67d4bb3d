"""Endmember estimation scoring: permutation-matched RMS spectral angle.

The score is the root-mean-square of per-endmember spectral angles under
the column pairing that minimizes it; cosine normalization makes it
invariant to positive rescaling of any column.  Reports are in degrees.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import linalg
from .errors import DimensionError, ValidationError

# Columns are paired exhaustively up to this size; above it the assignment
# on squared angles (exact for a sum objective) takes over.
EXHAUSTIVE_LIMIT = 8

_COS_SLACK = 1e-12


@dataclass(frozen=True, eq=False)
class AngleErrorReport:
    phi_degrees: float
    best_permutation: tuple[int, ...]
    per_endmember_angles_degrees: np.ndarray


def _angle_matrix_degrees(truth: np.ndarray, estimate: np.ndarray) -> np.ndarray:
    tn = np.linalg.norm(truth, axis=0)
    en = np.linalg.norm(estimate, axis=0)
    if float(tn.min()) <= 0.0 or float(en.min()) <= 0.0:
        raise ValidationError("matrices must not contain zero columns")
    cos = (truth / tn).T @ (estimate / en)
    worst = float(np.max(np.abs(cos)))
    if worst > 1.0 + _COS_SLACK:
        raise ValidationError(
            f"cosine {worst!r} exceeds 1 beyond rounding; input looks corrupted"
        )
    return np.degrees(np.arccos(np.clip(cos, -1.0, 1.0)))


def _best_assignment(cost: np.ndarray) -> tuple[int, ...]:
    n = cost.shape[0]
    if n <= EXHAUSTIVE_LIMIT:
        idx = np.arange(n)
        best, best_perm = np.inf, tuple(idx)
        for perm in itertools.permutations(range(n)):
            total = float(cost[idx, perm].sum())
            if total < best - 1e-15:
                best, best_perm = total, perm
        return best_perm
    rows, cols = linear_sum_assignment(cost)
    perm = np.empty(n, dtype=int)
    perm[rows] = cols
    return tuple(int(p) for p in perm)


def rms_angle_error(truth, estimate) -> AngleErrorReport:
    """Permutation-minimized RMS spectral angle between column sets.

    ``truth`` and ``estimate`` are (bands x n) matrices; entry ``i`` of the
    per-endmember vector is the angle between truth column ``i`` and its
    matched estimate column.
    """
    t = linalg.as_matrix(truth, "truth")
    e = linalg.as_matrix(estimate, "estimate")
    if t.shape != e.shape:
        raise DimensionError(f"shape mismatch: truth {t.shape}, estimate {e.shape}")
    angles = _angle_matrix_degrees(t, e)
    perm = _best_assignment(angles ** 2)
    per = angles[np.arange(t.shape[1]), list(perm)]
    phi = math.sqrt(float(np.mean(per ** 2)))
    per_frozen = per.copy()
    per_frozen.flags.writeable = False
    return AngleErrorReport(
        phi_degrees=phi,
        best_permutation=perm,
        per_endmember_angles_degrees=per_frozen,
    )
