"""Half-space edge Hamiltonians and the edge index.

A finite truncation to sites ``0..N-1`` carries gap modes at both ends.
Only the ones localized at the physical edge (site 0) belong to the
half-infinite operator, so crossings are filtered by left mass.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ._parallel import pmap
from .exceptions import GaplessModel, IndeterminateLocalization, TooFewSites, ValidationError
from .models import EdgeSymbolFamily, symbol_gap
from .spectralflow import CrossingFilter, LoopEigenData, SpectralFlowResult, spectral_flow, uniform_times

GAP_TOL = 1e-8
DEGENERACY_TOL = 1e-9


@dataclass(frozen=True)
class HalfSpaceOperator:
    N: int
    k: int
    matrix: np.ndarray

    def block(self, m: int, n: int) -> np.ndarray:
        k = self.k
        return self.matrix[m * k:(m + 1) * k, n * k:(n + 1) * k]


def toeplitz_blocks(blocks: np.ndarray, N: int) -> np.ndarray:
    """Block Toeplitz matrix with ``(m, n)`` block ``blocks[n - m + R]``."""
    R = (blocks.shape[0] - 1) // 2
    k = blocks.shape[1]
    M = np.zeros((N * k, N * k), dtype=complex)
    for a in range(-R, R + 1):
        if abs(a) < N and np.any(blocks[a + R]):
            M += np.kron(np.eye(N, k=a), blocks[a + R])
    return M


def build_halfspace(family: EdgeSymbolFamily, t: float, N: int) -> HalfSpaceOperator:
    """Truncated edge Hamiltonian on sites ``0..N-1``: block ``(m, n)`` is ``h_{n-m}(t)``."""
    if N <= 2 * family.range + 2:
        raise TooFewSites(f"need more than {2 * family.range + 2} sites, got {N}")
    M = toeplitz_blocks(family.blocks(t), N)
    return HalfSpaceOperator(N, family.k, (M + M.conj().T) / 2)


def left_mass(vectors: np.ndarray, N: int, k: int) -> np.ndarray:
    """Mass of each column on sites ``m < N / 2``."""
    n_left = (N + 1) // 2
    return np.sum(np.abs(vectors[: n_left * k]) ** 2, axis=0)


def _separate_degenerate(vals, vecs, N, k):
    # inside an (almost) degenerate cluster eigh may mix the two edges;
    # rotate to the basis that diagonalizes the left-half projector
    scale = max(1.0, float(np.max(np.abs(vals))))
    edges = np.flatnonzero(np.diff(vals) > DEGENERACY_TOL * scale)
    starts = np.concatenate(([0], edges + 1))
    stops = np.concatenate((edges + 1, [len(vals)]))
    n_left = (N + 1) // 2
    for a, b in zip(starts, stops):
        if b - a < 2:
            continue
        Vc = vecs[:, a:b]
        left = Vc[: n_left * k]
        _, U = np.linalg.eigh(left.conj().T @ left)
        vecs[:, a:b] = Vc @ U
    return vecs


def loop_eigendata(build, N: int, k: int, T: int) -> LoopEigenData:
    """Diagonalize ``build(t)`` (an ``Nk x Nk`` Hermitian matrix) at ``T`` uniform angles.

    Weights are the left masses of the eigenvectors, with near-degenerate
    clusters split by left mass.
    """
    times = uniform_times(T)

    def decompose(t):
        vals, vecs = np.linalg.eigh(build(t))
        return vals, _separate_degenerate(vals, vecs, N, k)

    parts = pmap(decompose, times)
    vals = np.stack([p[0] for p in parts])
    vecs = np.stack([p[1] for p in parts])
    weights = np.stack([left_mass(v, N, k) for v in vecs])
    return LoopEigenData(times, vals, vecs, weights)


def edge_eigendata(family: EdgeSymbolFamily, N: int, T: int) -> LoopEigenData:
    """Eigen-data of ``H#(t_j)`` at ``T`` uniform angles, with left-mass weights."""
    build_halfspace(family, 0.0, N)
    return loop_eigendata(lambda t: build_halfspace(family, t, N).matrix, N, family.k, T)


def default_window(gap: float) -> float:
    return min(0.4 * gap, 0.5)


def check_gap(family: EdgeSymbolFamily, mu: float, grid: int = 64) -> float:
    gap = symbol_gap(family, mu, grid)
    if gap <= GAP_TOL:
        raise GaplessModel(f"symbol has spectrum within {gap:.3g} of mu={mu}")
    return gap


def check_localization(data: LoopEigenData, mu: float, window: float, theta: float) -> None:
    """Raise if a state inside the window is neither clearly left nor clearly right."""
    inside = np.abs(data.eigenvalues - mu) < window
    w = data.weights[inside]
    bad = (w > 1 - theta) & (w < theta)
    if np.any(bad):
        raise IndeterminateLocalization(
            f"{int(bad.sum())} gap state(s) with left mass in ({1 - theta:.2f}, {theta:.2f}); increase the site count"
        )


@dataclass
class EdgeIndexReport:
    """Left-filtered and right-filtered flows of the truncated edge family.

    ``flow.flow`` is the edge index.
    """

    flow: SpectralFlowResult
    flow_right: SpectralFlowResult
    N: int
    T: int
    theta: float
    delta: float
    gap: float
    stability: dict = field(default_factory=dict)

    @property
    def index(self) -> int:
        return self.flow.flow

    def to_dict(self) -> dict:
        return {
            "edge_index": int(self.flow.flow),
            "flow": self.flow.to_dict(),
            "flow_right": self.flow_right.to_dict(),
            "sites": self.N,
            "steps": self.T,
            "theta": self.theta,
            "delta": self.delta,
            "gap": self.gap,
            "stability": [{"sites": n, "steps": t, "theta": th, "flow": f} for (n, t, th), f in sorted(self.stability.items())],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def filtered_flows(data: LoopEigenData, mu: float, theta: float, delta: float):
    check_localization(data, mu, delta, theta)
    left = spectral_flow(data, CrossingFilter(mu, delta, theta, "weight-above"))
    right = spectral_flow(data, CrossingFilter(mu, delta, theta, "weight-below"))
    return left, right


def edge_spectral_flow(
    family: EdgeSymbolFamily,
    mu: float = 0.0,
    N: int = 60,
    T: int = 200,
    theta: float = 0.7,
    delta: float | None = None,
) -> EdgeIndexReport:
    """Edge index as the spectral flow of left-localized branches through ``mu``.

    ``delta`` is the half-width of the tracking window around ``mu``;
    it defaults to ``min(0.4 * gap, 0.5)`` with ``gap`` the bulk gap.
    """
    if not 0.5 < theta <= 1:
        raise ValidationError(f"theta must lie in (0.5, 1], got {theta}")
    gap = check_gap(family, mu)
    delta = default_window(gap) if delta is None else float(delta)
    if not 0 < 2 * delta < gap:
        raise ValidationError(f"window {delta} must be positive and below half the gap {gap:.4g}")
    data = edge_eigendata(family, N, T)
    left, right = filtered_flows(data, mu, theta, delta)
    return EdgeIndexReport(left, right, N, T, theta, delta, gap)


def edge_stability(
    family: EdgeSymbolFamily,
    mu: float = 0.0,
    sites=(40, 60, 80),
    steps=(200, 400),
    thetas=(0.6, 0.7, 0.8, 0.9),
    delta: float | None = None,
) -> dict:
    """Edge index for every ``(N, T, theta)`` combination of the sweep."""
    gap = check_gap(family, mu)
    delta = default_window(gap) if delta is None else float(delta)
    out = {}
    for N in sites:
        for T in steps:
            data = edge_eigendata(family, N, T)
            for theta in thetas:
                left, _ = filtered_flows(data, mu, theta, delta)
                out[(N, T, theta)] = left.flow
    return out


def edge_bands(family: EdgeSymbolFamily, mu: float = 0.0, N: int = 60, T: int = 200, gap: float | None = None):
    """Rows ``(t, lambda, left_mass)`` for every eigenvalue inside the bulk gap.

    Rows are ordered by ``t`` and then ``lambda``.  When ``mu`` lies outside
    the spectrum entirely the table is empty.
    """
    gap = symbol_gap(family, mu) if gap is None else gap
    data = edge_eigendata(family, N, T)
    rows = []
    for j, t in enumerate(data.times):
        for lam, w in zip(data.eigenvalues[j], data.weights[j]):
            if abs(lam - mu) < gap:
                rows.append((float(t), float(lam), float(w)))
    return rows
