"""Spectral flow of a sampled periodic family of Hermitian matrices.

Sign convention: an eigenvalue branch that moves *down* through the level
counts +1 and one that moves up counts -1.  With this choice the flow
equals the index of the discretized ``d/dt - A`` (see
:func:`sflab.fredholm.aps_index_estimate`).

Crossings are detected with half-open tests so a branch sitting exactly on
the level at a sample is counted once::

    down: lam(t_j) >= mu > lam(t_{j+1})      up: lam(t_j) < mu <= lam(t_{j+1})
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ._parallel import pmap
from .exceptions import InvalidFilter, RefinementNeeded, ValidationError

MODES = ("all", "weight-above", "weight-below")
MIN_OVERLAP = 0.5
MIN_OVERLAP_GAP = 0.1
ORTHO_TOL = 1e-10


@dataclass(frozen=True)
class LoopEigenData:
    """Eigen-decompositions of a Hermitian family sampled on a loop.

    Attributes
    ----------
    times : ndarray of shape (T,)
        Strictly increasing sample angles in ``[0, 2 pi)``.
    eigenvalues : ndarray of shape (T, d)
        Ascending at every sample.
    eigenvectors : ndarray of shape (T, d, d)
        ``eigenvectors[j][:, i]`` belongs to ``eigenvalues[j, i]``.
    weights : ndarray of shape (T, d) or None
        Optional localization weight of each eigenvector, in ``[0, 1]``.
    """

    times: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    weights: np.ndarray | None = None

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        vals = np.asarray(self.eigenvalues, dtype=float)
        vecs = np.asarray(self.eigenvectors, dtype=complex)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "eigenvalues", vals)
        object.__setattr__(self, "eigenvectors", vecs)
        if times.ndim != 1 or len(times) < 2:
            raise ValidationError("need at least two sample times")
        if np.any(np.diff(times) <= 0) or times[0] < 0 or times[-1] >= 2 * np.pi:
            raise ValidationError("times must increase strictly within [0, 2pi)")
        T = len(times)
        if vals.ndim != 2 or vals.shape[0] != T:
            raise ValidationError(f"eigenvalues must have shape (T, d), got {vals.shape}")
        d = vals.shape[1]
        if vecs.shape != (T, d, d):
            raise ValidationError(f"eigenvectors must have shape {(T, d, d)}, got {vecs.shape}")
        if np.any(np.diff(vals, axis=1) < 0):
            raise ValidationError("eigenvalues must be ascending at every sample")
        gram = np.einsum("tki,tkj->tij", vecs.conj(), vecs)
        if np.max(np.abs(gram - np.eye(d))) > ORTHO_TOL:
            raise ValidationError("eigenvectors are not orthonormal")
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=float)
            if w.shape != (T, d):
                raise ValidationError(f"weights must have shape {(T, d)}, got {w.shape}")
            if np.any(w < -1e-12) or np.any(w > 1 + 1e-12):
                raise ValidationError("weights must lie in [0, 1]")
            object.__setattr__(self, "weights", np.clip(w, 0.0, 1.0))

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[1]

    def __neg__(self) -> "LoopEigenData":
        w = None if self.weights is None else self.weights[:, ::-1]
        return LoopEigenData(self.times, -self.eigenvalues[:, ::-1], self.eigenvectors[:, :, ::-1], w)

    @classmethod
    def from_family(cls, family: Callable[[float], np.ndarray], times, weight=None) -> "LoopEigenData":
        """Diagonalize ``family(t)`` at each sample.

        ``weight``, if given, maps an eigenvector matrix ``(d, d)`` to the
        per-column weights.
        """
        times = np.asarray(times, dtype=float)

        def decompose(t):
            A = np.asarray(family(t), dtype=complex)
            return np.linalg.eigh((A + A.conj().T) / 2)

        parts = pmap(decompose, times)
        vals = np.stack([p[0] for p in parts])
        vecs = np.stack([p[1] for p in parts])
        w = None if weight is None else np.stack([weight(v) for v in vecs])
        return cls(times, vals, vecs, w)


def uniform_times(T: int) -> np.ndarray:
    return 2 * np.pi * np.arange(T) / T


@dataclass(frozen=True)
class CrossingFilter:
    """Which crossings of ``level`` are counted.

    Only branches within ``window`` of the level are tracked.  ``mode``
    ``weight-above`` keeps crossings whose localization weight is at least
    ``theta``; ``weight-below`` keeps those at most ``1 - theta``.
    """

    level: float = 0.0
    window: float = np.inf
    theta: float = 0.7
    mode: str = "all"

    def __post_init__(self):
        if self.mode not in MODES:
            raise InvalidFilter(f"mode must be one of {MODES}, got {self.mode!r}")
        if not self.window > 0:
            raise InvalidFilter(f"window must be positive, got {self.window}")
        if not 0.5 < self.theta <= 1.0:
            raise InvalidFilter(f"theta must lie in (0.5, 1], got {self.theta}")
        if not np.isfinite(self.level):
            raise InvalidFilter("level must be finite")

    def mirrored(self) -> "CrossingFilter":
        """Filter for the negated family (level -> -level)."""
        return CrossingFilter(-self.level, self.window, self.theta, self.mode)

    def accepts(self, weight) -> bool:
        if self.mode == "all":
            return True
        if self.mode == "weight-above":
            return weight >= self.theta
        return weight <= 1.0 - self.theta


@dataclass(frozen=True)
class Crossing:
    t0: float
    t1: float
    branch: int
    dir: int
    eigenvalues: tuple[float, float]
    weight: float | None


@dataclass
class SpectralFlowResult:
    flow: int
    crossings: list[Crossing] = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "flow": int(self.flow),
            "crossings": [
                {
                    "t0": c.t0,
                    "t1": c.t1,
                    "branch": c.branch,
                    "dir": c.dir,
                    "eigenvalues": list(c.eigenvalues),
                    "weight": c.weight,
                }
                for c in self.crossings
            ],
            "diagnostics": dict(self.diagnostics),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


@dataclass
class _Step:
    sources: np.ndarray
    targets: np.ndarray
    overlaps: np.ndarray
    movement: float


def _match_step(v0, v1, lam0, lam1, flt: CrossingFilter, j: int) -> _Step:
    sources = np.flatnonzero(np.abs(lam0 - flt.level) < flt.window)
    if sources.size == 0:
        return _Step(sources, sources.copy(), np.ones(0), 0.0)
    ov = np.abs(v0[:, sources].conj().T @ v1) ** 2
    order = np.argsort(ov, axis=1)
    best = order[:, -1]
    best_ov = ov[np.arange(len(sources)), best]
    second_ov = ov[np.arange(len(sources)), order[:, -2]] if ov.shape[1] > 1 else np.zeros(len(sources))
    if np.any(best_ov < MIN_OVERLAP):
        raise RefinementNeeded(f"step {j}: matching overlap {best_ov.min():.3f} < {MIN_OVERLAP}")
    if np.any(best_ov - second_ov < MIN_OVERLAP_GAP):
        raise RefinementNeeded(f"step {j}: two candidate matches within {MIN_OVERLAP_GAP} overlap")
    # best_ov > 1/2 makes the argmax injective, so this is already a bijection onto its image
    movement = float(np.max(np.abs(lam1[best] - lam0[sources])))
    if np.isfinite(flt.window) and movement > flt.window / 2:
        raise RefinementNeeded(f"step {j}: eigenvalue moved {movement:.3g} > window/2")
    return _Step(sources, best, best_ov, movement)


def match_branches(data: LoopEigenData, flt: CrossingFilter | None = None) -> list[dict[int, int]]:
    """Branch correspondence for each consecutive sample pair, wraparound included.

    Entry ``j`` maps eigenvector indices at ``times[j]`` to indices at
    ``times[(j + 1) % T]``.  Only branches inside the filter window are
    matched (by maximal overlap); all others map to themselves.
    """
    flt = flt or CrossingFilter()
    T, d = data.eigenvalues.shape
    out = []
    for j in range(T):
        jn = (j + 1) % T
        st = _match_step(data.eigenvectors[j], data.eigenvectors[jn], data.eigenvalues[j], data.eigenvalues[jn], flt, j)
        perm = {i: i for i in range(d)}
        perm.update({int(s): int(t) for s, t in zip(st.sources, st.targets)})
        out.append(perm)
    return out


def spectral_flow(data: LoopEigenData, flt: CrossingFilter | None = None) -> SpectralFlowResult:
    """Net number of eigenvalue branches crossing ``flt.level`` downward around the loop."""
    flt = flt or CrossingFilter()
    if flt.mode != "all" and data.weights is None:
        raise InvalidFilter(f"mode {flt.mode!r} needs localization weights")
    mu = flt.level
    T = len(data.times)
    lam = data.eigenvalues
    crossings: list[Crossing] = []
    max_move, min_ov, rejected, unclassified = 0.0, 1.0, 0, 0
    for j in range(T):
        jn = (j + 1) % T
        st = _match_step(data.eigenvectors[j], data.eigenvectors[jn], lam[j], lam[jn], flt, j)
        max_move = max(max_move, st.movement)
        if st.overlaps.size:
            min_ov = min(min_ov, float(st.overlaps.min()))
        below0 = int(np.sum(lam[j] < mu))
        below1 = int(np.sum(lam[jn] < mu))
        net = 0
        t0 = float(data.times[j])
        t1 = float(data.times[jn]) + (2 * np.pi if jn == 0 else 0.0)
        for s, tg in zip(st.sources, st.targets):
            a, b = lam[j, s], lam[jn, tg]
            if a >= mu > b:
                direction = 1
            elif a < mu <= b:
                direction = -1
            else:
                continue
            net += direction
            w = None
            if data.weights is not None:
                w = float((data.weights[j, s] + data.weights[jn, tg]) / 2)
                if not (w >= flt.theta or w <= 1 - flt.theta):
                    unclassified += 1
            if not flt.accepts(w):
                rejected += 1
                continue
            crossings.append(Crossing(t0, t1, int(s), direction, (float(a), float(b)), w))
        # every branch that crossed must have been tracked
        if net != below1 - below0:
            raise RefinementNeeded(
                f"step {j}: tracked crossings ({net}) disagree with level counts ({below1 - below0}); "
                "a branch moved across the level from outside the window"
            )
    flow = sum(c.dir for c in crossings)
    diagnostics = {
        "samples": T,
        "max_step_movement": max_move,
        "min_match_overlap": min_ov,
        "rejected_crossings": rejected,
        "unclassified_crossings": unclassified,
    }
    return SpectralFlowResult(int(flow), crossings, diagnostics)


def cayley_loop_winding(data: LoopEigenData) -> int:
    """Winding number of ``det((A - i)(A + i)^-1)`` around the sampled loop.

    Serves as a sanity oracle: for finite Hermitian loops it is always 0,
    like the unfiltered spectral flow.
    """
    lam = data.eigenvalues
    # per-sample log det as a sum of eigenvalue phases, exact up to 2 pi
    phases = np.sum(np.angle((lam - 1j) / (lam + 1j)), axis=1)
    steps = np.diff(np.append(phases, phases[0]))
    steps = (steps + np.pi) % (2 * np.pi) - np.pi
    # a step near pi cannot be resolved
    if np.any(np.abs(steps) >= np.pi - 1e-9):
        raise RefinementNeeded("Cayley determinant phase step reaches pi")
    total = steps.sum() / (2 * np.pi)
    return int(round(total))


def sample_family(family: Callable[[float], np.ndarray], T: int, weight=None) -> LoopEigenData:
    return LoopEigenData.from_family(family, uniform_times(T), weight)

