"""Synthetic scene generation: Dirichlet abundances under a purity cap,
random endmember signatures, and pixel synthesis ``X = A @ S``.

Randomness comes from numpy's PCG64 generator seeded with the scene seed,
so a given :class:`SceneConfig` reproduces the same scene bit for bit
(endmembers are drawn first, then abundances; batch sizes depend only on
the acceptance history, which is itself a function of the stream).
Dirichlet draws are normalized independent Gamma(mu_i, 1) variates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import (
    DimensionError,
    InternalConsistencyError,
    PurityCapError,
    ValidationError,
)

# Rejection-sampling budget: give up once this many draws went by with an
# acceptance rate below _MIN_ACCEPT_RATE.
_DRAW_BUDGET = 1_000_000
_MIN_ACCEPT_RATE = 1e-3

_COND_LIMIT = 1e6
_RANK_RTOL = 1e-10


@dataclass(frozen=True)
class SceneConfig:
    """Scene recipe; ``purity_cap`` bounds every abundance norm.

    ``dirichlet_param`` defaults to the symmetric vector 1/n.  Endmembers
    come from ``synthetic_random`` (uniform entries, columns rescaled to
    unit maximum) or from a spectral-library CSV with selected columns.
    """

    n_endmembers: int
    n_bands: int
    n_pixels: int
    purity_cap: float
    dirichlet_param: tuple[float, ...] | None = None
    seed: int = 0
    endmember_source: str = "synthetic_random"
    library_path: str | None = None
    library_indices: tuple[int, ...] | None = None

    def __post_init__(self):
        n, m, l = self.n_endmembers, self.n_bands, self.n_pixels
        if n < 2:
            raise DimensionError("need at least 2 endmembers")
        if m < n:
            raise DimensionError(f"need n_bands >= n_endmembers, got {m} < {n}")
        if l < n:
            raise DimensionError(f"need n_pixels >= n_endmembers, got {l} < {n}")
        floor = 1.0 / math.sqrt(n)
        if not (floor < self.purity_cap <= 1.0):
            raise ValidationError(
                f"purity cap must lie in (1/sqrt({n}), 1], got {self.purity_cap}"
            )
        if self.dirichlet_param is not None:
            mu = tuple(float(v) for v in self.dirichlet_param)
            if len(mu) != n or any(v <= 0 for v in mu):
                raise ValidationError(
                    "dirichlet_param must hold n positive concentrations"
                )
            object.__setattr__(self, "dirichlet_param", mu)
        if self.endmember_source not in ("synthetic_random", "csv_library"):
            raise ValidationError(
                f"unknown endmember source {self.endmember_source!r}"
            )
        if self.endmember_source == "csv_library":
            if self.library_path is None or self.library_indices is None:
                raise ValidationError(
                    "csv_library source needs library_path and library_indices"
                )
            if len(self.library_indices) != n:
                raise ValidationError(
                    f"need {n} library indices, got {len(self.library_indices)}"
                )

    def concentrations(self) -> np.ndarray:
        if self.dirichlet_param is None:
            return np.full(self.n_endmembers, 1.0 / self.n_endmembers)
        return np.asarray(self.dirichlet_param, dtype=float)


@dataclass(frozen=True, eq=False)
class Scene:
    """Endmembers (bands x n), abundances (n x pixels), pixels (bands x pixels)."""

    endmembers: np.ndarray
    abundances: np.ndarray
    pixels: np.ndarray
    purity_cap: float

    def __post_init__(self):
        a = linalg.as_matrix(self.endmembers, "endmembers")
        s = linalg.as_matrix(self.abundances, "abundances")
        x = linalg.as_matrix(self.pixels, "pixels")
        if a.shape[1] != s.shape[0] or x.shape != (a.shape[0], s.shape[1]):
            raise DimensionError(
                f"inconsistent scene shapes A={a.shape}, S={s.shape}, X={x.shape}"
            )
        if not np.array_equal(x, a @ s):
            raise ValidationError("pixels do not equal endmembers @ abundances")
        if float(s.min()) < 0.0:
            raise ValidationError("abundances contain a negative entry")
        if float(np.max(np.abs(s.sum(axis=0) - 1.0))) > 1e-9:
            raise ValidationError("abundance columns do not sum to one")
        norms = np.linalg.norm(s, axis=0)
        if float(norms.max()) > self.purity_cap + 1e-12:
            raise ValidationError(
                f"an abundance norm {norms.max():.6f} exceeds the purity cap"
            )
        _require_full_rank(a, "endmember matrix", cols=True)
        _require_full_rank(s, "abundance matrix", cols=False)
        for name, arr in (("endmembers", a), ("abundances", s), ("pixels", x)):
            frozen = arr.copy()
            frozen.flags.writeable = False
            object.__setattr__(self, name, frozen)

    @property
    def n_endmembers(self) -> int:
        return self.endmembers.shape[1]


def _require_full_rank(m: np.ndarray, name: str, cols: bool) -> None:
    svals = np.linalg.svd(m, compute_uv=False)
    need = m.shape[1] if cols else m.shape[0]
    if svals.size < need or svals[need - 1] <= _RANK_RTOL * svals[0]:
        raise ValidationError(f"{name} is rank deficient")


def _draw_endmembers(cfg: SceneConfig, rng: np.random.Generator) -> np.ndarray:
    if cfg.endmember_source == "csv_library":
        a = load_spectral_library(cfg.library_path, cfg.library_indices)
        if a.shape[0] != cfg.n_bands:
            raise ValidationError(
                f"library has {a.shape[0]} bands, config expects {cfg.n_bands}"
            )
        return a
    for _ in range(100):
        a = rng.uniform(0.0, 1.0, size=(cfg.n_bands, cfg.n_endmembers))
        a /= a.max(axis=0)
        svals = np.linalg.svd(a, compute_uv=False)
        if svals[-1] > _RANK_RTOL * svals[0] and svals[0] / svals[-1] < _COND_LIMIT:
            return a
    raise InternalConsistencyError("could not draw a well-conditioned endmember matrix")


def _draw_abundances(cfg: SceneConfig, rng: np.random.Generator) -> np.ndarray:
    n, l, cap = cfg.n_endmembers, cfg.n_pixels, cfg.purity_cap
    mu = cfg.concentrations()
    for _ in range(3):
        cols = []
        accepted = 0
        drawn = 0
        while accepted < l:
            batch = max(2048, 2 * (l - accepted))
            g = rng.gamma(shape=mu, scale=1.0, size=(batch, n))
            sums = g.sum(axis=1)
            ok = sums > 0.0
            s = g[ok] / sums[ok, None]
            keep = np.linalg.norm(s, axis=1) <= cap
            kept = s[keep]
            drawn += batch
            accepted += kept.shape[0]
            cols.append(kept)
            if drawn >= _DRAW_BUDGET and accepted < l:
                rate = accepted / drawn
                if rate < _MIN_ACCEPT_RATE:
                    raise PurityCapError(
                        f"purity cap {cap} accepts only {rate:.2e} of draws "
                        f"(floor is 1/sqrt({n}) = {1.0 / math.sqrt(n):.6f}); "
                        "loosen the cap"
                    )
        s_all = np.vstack(cols)[:l].T  # (n, l)
        svals = np.linalg.svd(s_all, compute_uv=False)
        if svals[-1] > _RANK_RTOL * svals[0]:
            return s_all
    raise ValidationError("abundance matrix stayed rank deficient after 3 attempts")


def generate_scene(cfg: SceneConfig) -> Scene:
    """Draw a scene per the config; deterministic for a fixed config."""
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(cfg.seed)))
    a = _draw_endmembers(cfg, rng)
    s = _draw_abundances(cfg, rng)
    return Scene(endmembers=a, abundances=s, pixels=a @ s, purity_cap=cfg.purity_cap)


def load_spectral_library(path, selected_indices) -> np.ndarray:
    """Read endmember columns from a spectral-library CSV.

    Format: header ``wavelength,name1,name2,...``; each following row holds
    the wavelength and one reflectance per named column.  ``selected_indices``
    are 0-based positions among the named columns.  Returns a (bands x k)
    matrix and validates full column rank.
    """
    idx = [int(i) for i in selected_indices]
    if len(idx) == 0:
        raise ValueError("no library columns selected")
    with open(path, "r", encoding="utf-8", newline="") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ValidationError(f"{path}: line 1: empty spectral library")
    header = lines[0].split(",")
    if len(header) < 2 or header[0].strip().lower() != "wavelength":
        raise ValidationError(
            f"{path}: line 1: header must start with 'wavelength' and name columns"
        )
    n_named = len(header) - 1
    for i in idx:
        if not (0 <= i < n_named):
            raise ValidationError(
                f"selected index {i} outside the {n_named} library columns"
            )
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != len(header):
            raise ValidationError(
                f"{path}: line {lineno}: expected {len(header)} fields, got {len(parts)}"
            )
        try:
            rows.append([float(p) for p in parts[1:]])
        except ValueError as exc:
            raise ValidationError(f"{path}: line {lineno}: {exc}") from exc
    if not rows:
        raise ValidationError(f"{path}: line 2: no data rows")
    table = np.asarray(rows, dtype=float)
    out = table[:, idx]
    if len(set(idx)) < len(idx):
        raise ValidationError("duplicate column selection is rank deficient")
    _require_full_rank(out, "selected library columns", cols=True)
    return out


def save_spectral_library(path, wavelengths, names, reflectance) -> None:
    """Write a spectral-library CSV (exact float round trip, LF endings)."""
    table = linalg.as_matrix(reflectance, "reflectance")
    wl = linalg.as_vector(wavelengths, "wavelengths")
    if table.shape != (wl.shape[0], len(names)):
        raise DimensionError(
            f"reflectance shape {table.shape} does not match "
            f"{wl.shape[0]} wavelengths x {len(names)} names"
        )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("wavelength," + ",".join(str(n) for n in names) + "\n")
        for i in range(wl.shape[0]):
            cells = [f"{wl[i]:.17g}"] + [f"{v:.17g}" for v in table[i]]
            fh.write(",".join(cells) + "\n")
