"""Fredholm index estimators for half-infinite Toeplitz operators and for ``d/dt - A``.

A finite truncation of a Fredholm operator is square, so its index is
zero.  The estimators recover the half-infinite index by keeping only the
near-kernel vectors localized at the physical edge (low site index) and
discarding those created by the artificial cut at the far end.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .disc import disc_toeplitz_from_coefficients
from .edge import build_halfspace
from .exceptions import (
    AmbiguousCluster,
    AmbiguousSide,
    RefinementNeeded,
    SingularSymbol,
    ValidationError,
)
from .models import EdgeSymbolFamily

SIDE_THRESHOLD = 0.7
CLUSTER_GAP = 10.0
SINGULAR_TOL = 1e-10
DENSE_LIMIT = 1200


@dataclass(frozen=True)
class NearKernelVector:
    sigma: float
    side: str
    kind: str
    left_mass: float


@dataclass
class IndexEstimate:
    """Half-infinite index recovered from a truncation.

    ``index`` is the number of edge-localized kernel vectors minus the
    number of edge-localized cokernel vectors.
    """

    index: int
    near_kernel: list[NearKernelVector] = field(default_factory=list)
    tol_used: float = 0.0
    condition: float = np.inf

    def to_dict(self) -> dict:
        return {
            "index": int(self.index),
            "near_kernel": [
                {"sigma": v.sigma, "side": v.side, "kind": v.kind, "left_mass": v.left_mass}
                for v in self.near_kernel
            ],
            "tol_used": self.tol_used,
            "condition": self.condition if np.isfinite(self.condition) else None,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def det_winding(samples) -> int:
    """Winding number of ``det g(s)`` around the origin.

    ``samples`` holds ``g(s_j)`` at ``S`` increasing angles covering the
    circle once: shape ``(S,)`` for scalars or ``(S, k, k)``.
    """
    g = np.asarray(samples, dtype=complex)
    dets = g if g.ndim == 1 else np.linalg.det(g)
    if np.min(np.abs(dets)) < SINGULAR_TOL:
        raise SingularSymbol(f"|det g| = {np.min(np.abs(dets)):.3g} at a sample")
    steps = np.angle(np.roll(dets, -1) / dets)
    if np.any(np.abs(steps) >= np.pi - 1e-9):
        raise RefinementNeeded("determinant phase jumps by pi between samples")
    return int(round(steps.sum() / (2 * np.pi)))


def sample_symbol(symbol, S: int) -> np.ndarray:
    """``g(s_j)`` at ``S`` uniform angles as an ``(S, k, k)`` array."""
    s = 2 * np.pi * np.arange(S) / S
    if isinstance(symbol, Mapping):
        out = sum(np.multiply.outer(np.exp(1j * p * s), np.atleast_2d(np.asarray(c, dtype=complex))) for p, c in symbol.items())
        return np.asarray(out, dtype=complex)
    vals = [np.atleast_2d(np.asarray(symbol(x), dtype=complex)) for x in s]
    return np.stack(vals)


def fourier_coefficients(symbol, N: int, S: int | None = None) -> dict[int, np.ndarray]:
    """Coefficients ``ghat(p)``, ``|p| < N``, of ``g(s) = sum ghat(p) e^{ips}``."""
    if isinstance(symbol, Mapping):
        return {int(p): np.atleast_2d(np.asarray(c, dtype=complex)) for p, c in symbol.items() if abs(int(p)) < N}
    S = S or max(256, 8 * N)
    g = sample_symbol(symbol, S)
    ghat = np.fft.fft(g, axis=0) / S
    return {p: ghat[p % S] for p in range(-N + 1, N)}


def _classify(sigmas, vectors, left_rows, kind):
    """Sort near-kernel vectors into edge and far-end ones by mass on ``left_rows``."""
    if vectors.shape[1] > 1:
        # a degenerate near-kernel may mix both ends; use the basis that
        # diagonalizes the left-half projector within it
        left = vectors[left_rows]
        _, U = np.linalg.eigh(left.conj().T @ left)
        vectors = vectors @ U
    out = []
    for j in range(vectors.shape[1]):
        v = vectors[:, j]
        mass = float(np.sum(np.abs(v[left_rows]) ** 2) / np.sum(np.abs(v) ** 2))
        if mass >= SIDE_THRESHOLD:
            side = "left-edge"
        elif mass <= 1 - SIDE_THRESHOLD:
            side = "right-edge"
        else:
            raise AmbiguousSide(f"{kind} vector with left mass {mass:.3f}")
        out.append(NearKernelVector(float(sigmas[j]), side, kind, mass))
    return out


def _cut(sigmas: np.ndarray, sigma_max: float, tol_rel: float):
    """Cluster size and gap ratio for ascending singular values."""
    cut = tol_rel * sigma_max
    r = int(np.sum(sigmas < cut))
    if r == 0:
        return 0, (sigmas[0] / cut if len(sigmas) else np.inf)
    if r == len(sigmas):
        return r, np.inf
    largest = sigmas[r - 1]
    ratio = np.inf if largest == 0 else sigmas[r] / largest
    if ratio < CLUSTER_GAP:
        raise AmbiguousCluster(f"no clear singular-value gap at the cut: ratio {ratio:.3g} < {CLUSTER_GAP}")
    return r, ratio


def _estimate_dense(M: np.ndarray, left_rows: np.ndarray, tol_rel: float) -> IndexEstimate:
    U, sig, Vh = np.linalg.svd(M)
    order = np.argsort(sig)
    sig = sig[order]
    r, ratio = _cut(sig, float(sig[-1]), tol_rel)
    kern = _classify(sig[:r], Vh.conj().T[:, order[:r]], left_rows, "kernel")
    coker = _classify(sig[:r], U[:, order[:r]], left_rows, "cokernel")
    return _assemble(kern, coker, tol_rel * float(sig[-1]), ratio)


def _assemble(kern, coker, tol_used, ratio) -> IndexEstimate:
    index = sum(v.side == "left-edge" for v in kern) - sum(v.side == "left-edge" for v in coker)
    return IndexEstimate(int(index), kern + coker, float(tol_used), float(ratio))


def toeplitz_index_estimate(symbol, N: int = 64, tol_rel: float = 1e-6) -> IndexEstimate:
    """Index of the half-infinite Toeplitz operator ``T_g`` from its ``N``-site truncation.

    ``symbol`` is a callable ``s -> g(s)`` (scalar or ``k x k``) or a
    mapping of Fourier coefficients.  Block ``(m, n)`` of the truncation is
    ``ghat(m - n)``, so ``T_{e^{is}}`` is the forward shift and has index -1.
    """
    if N < 32:
        raise ValidationError(f"need at least 32 sites, got {N}")
    samples = sample_symbol(symbol, max(256, 8 * N))
    det_winding(samples)  # invertibility and resolution check
    coeffs = fourier_coefficients(symbol, N)
    M = disc_toeplitz_from_coefficients(coeffs, N, "hardy").matrix
    k = samples.shape[1]
    return _estimate_dense(M, np.arange(((N + 1) // 2) * k), tol_rel)


def aps_operator(blocks, dt: float) -> sp.csr_matrix:
    """Sparse ``(L u)_j = (u_{j+1} - u_j) / dt - A_j u_j`` on the loop, indices mod ``T``."""
    T = len(blocks)
    D = blocks[0].shape[0]
    diag = sp.block_diag([sp.csr_matrix(-np.eye(D) / dt - A) for A in blocks], format="csr")
    forward = sp.csr_matrix((np.ones(T), (np.arange(T), (np.arange(T) + 1) % T)), shape=(T, T))
    return (diag + sp.kron(forward, sp.identity(D) / dt, format="csr")).tocsr()


def _smallest_pairs(G: sp.spmatrix, count: int, shift: float):
    vals, vecs = spla.eigsh(G.tocsc(), k=count, sigma=shift, which="LM")
    order = np.argsort(vals)
    return np.sqrt(np.clip(vals[order], 0, None)), vecs[:, order]


def aps_index_estimate(
    family: Callable[[float], np.ndarray],
    T: int = 96,
    tol_rel: float = 1e-6,
    k: int = 1,
) -> IndexEstimate:
    """Index of the discretized ``d/dt - A(t)`` on the loop of ``T`` time slices.

    ``family(t)`` returns a Hermitian ``D x D`` matrix acting on ``D / k``
    sites of ``k`` components each.  Near-kernel vectors are sorted into
    edge (low site index) and far-end by their mass on the first half of
    the sites, summed over all time slices.  For edge families the result
    equals the spectral flow through zero.
    """
    dt = 2 * np.pi / T
    times = dt * np.arange(T)
    blocks = [np.asarray(family(t), dtype=complex) for t in times]
    D = blocks[0].shape[0]
    if D % k:
        raise ValidationError(f"matrix size {D} is not a multiple of k={k}")
    for A in blocks:
        if np.max(np.abs(A - A.conj().T)) > 1e-10:
            raise ValidationError("family must be Hermitian at every sample")
    sites = D // k
    n_left = ((sites + 1) // 2) * k
    # left-half rows of every time slice
    left_rows = (np.arange(T)[:, None] * D + np.arange(n_left)[None, :]).ravel()
    L = aps_operator(blocks, dt)

    if T * D <= DENSE_LIMIT:
        return _estimate_dense(L.toarray(), left_rows, tol_rel)

    LhL = (L.conj().T @ L).tocsc()
    LLh = (L @ L.conj().T).tocsc()
    sigma_max = float(np.sqrt(spla.eigsh(LhL, k=1, which="LA", return_eigenvectors=False)[0]))
    cut = tol_rel * sigma_max
    # slightly negative shift keeps the factorization regular on exact kernels
    shift = -1e-9 * sigma_max**2
    count = 8
    while True:
        count = min(count, T * D - 2)
        sk, vk = _smallest_pairs(LhL, count, shift)
        sc, vc = _smallest_pairs(LLh, count, shift)
        if np.sum(sk < cut) < count or count >= T * D - 2:
            break
        count *= 2
    r, ratio = _cut(sk, sigma_max, tol_rel)
    if int(np.sum(sc < cut)) != r:
        raise AmbiguousCluster(f"kernel ({r}) and cokernel ({int(np.sum(sc < cut))}) cluster sizes differ")
    kern = _classify(sk[:r], vk[:, :r], left_rows, "kernel")
    coker = _classify(sc[:r], vc[:, :r], left_rows, "cokernel")
    return _assemble(kern, coker, cut, ratio)


def aps_edge_index(family: EdgeSymbolFamily, mu: float = 0.0, N: int = 40, T: int = 96, tol_rel: float = 1e-6) -> IndexEstimate:
    """``aps_index_estimate`` of ``H#(t) - mu`` for an edge symbol family."""
    shift = mu * np.eye(N * family.k)
    return aps_index_estimate(lambda t: build_halfspace(family, t, N).matrix - shift, T, tol_rel, family.k)
