"""Toeplitz operators on holomorphic 1-forms on the unit disc.

A half-space sequence ``u`` is identified with the form ``sum_j u_j z^j dz``.
Under this identification a translation-invariant operator with symbol
blocks ``h_a`` becomes multiplication by ``a(s) = sum_a h_a e^{-ias}``, so
the boundary Fourier coefficient of degree ``p`` is ``h_{-p}``.  The symbol
is extended radially constant into the disc.

In the orthonormalized monomial basis the Toeplitz matrix has blocks

    T[m, n] = ahat(m - n) * c_{m+n} / sqrt(c_{2m} c_{2n}),

with ``c_p = int_0^1 r^p w(r) dr`` the radial moments of the area weight.
The Hardy space corresponds to all ratios equal to one; the Bergman space
of the disc to ``w(r) = r``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Sequence, Union

import numpy as np

from .edge import check_gap, default_window, filtered_flows, loop_eigendata
from .exceptions import BadWeight, GaplessModel, SymbolNotInvertible, ValidationError
from .models import EdgeSymbolFamily
from .spectralflow import SpectralFlowResult

Weight = Union[str, Callable[[np.ndarray], np.ndarray], Sequence[float]]

QUADRATURE_NODES = 64


@dataclass(frozen=True)
class DiscToeplitz:
    N: int
    k: int
    weight: str
    matrix: np.ndarray


def radial_moments(weight: Weight, count: int) -> np.ndarray | None:
    """Moments ``c_0 .. c_{count-1}``; ``None`` for the Hardy space.

    ``weight`` is ``"hardy"``, ``"bergman"`` (``w(r) = r``, closed form
    ``c_p = 1 / (p + 2)``), a callable radial weight (Gauss-Legendre
    quadrature with a fixed node count), or an explicit moment sequence.
    """
    if isinstance(weight, str):
        if weight == "hardy":
            return None
        if weight == "bergman":
            return 1.0 / (np.arange(count) + 2.0)
        raise BadWeight(f"unknown weight {weight!r}")
    if callable(weight):
        x, w = np.polynomial.legendre.leggauss(QUADRATURE_NODES)
        r = (x + 1) / 2
        vals = np.asarray(weight(r), dtype=float) * w / 2
        c = np.array([np.sum(r**p * vals) for p in range(count)])
    else:
        c = np.asarray(weight, dtype=float)
        if c.ndim != 1 or len(c) < count:
            raise BadWeight(f"need {count} radial moments, got {c.shape}")
        c = c[:count]
    if np.any(~np.isfinite(c)) or np.any(c <= 0):
        raise BadWeight("radial moments must be positive")
    return c


def weight_ratios(weight: Weight, N: int) -> np.ndarray:
    """``gamma[m, n] = c_{m+n} / sqrt(c_{2m} c_{2n})`` (all ones for Hardy)."""
    c = radial_moments(weight, 2 * N - 1)
    if c is None:
        return np.ones((N, N))
    idx = np.arange(N)
    return c[idx[:, None] + idx[None, :]] / np.sqrt(np.outer(c[2 * idx], c[2 * idx]))


def _weight_label(weight: Weight) -> str:
    return weight if isinstance(weight, str) else "custom"


def disc_toeplitz_from_coefficients(coefficients: Mapping[int, np.ndarray], N: int, weight: Weight = "hardy") -> DiscToeplitz:
    """Truncated Toeplitz matrix of a boundary symbol given by Fourier coefficients.

    ``coefficients[p]`` is the ``k x k`` coefficient of ``e^{ips}``; block
    ``(m, n)`` of the result is ``coefficients[m - n]`` times the weight ratio.
    """
    if N < 2:
        raise ValidationError(f"degree N must be at least 2, got {N}")
    coeffs = {int(p): np.atleast_2d(np.asarray(c, dtype=complex)) for p, c in coefficients.items()}
    k = next(iter(coeffs.values())).shape[0]
    M = np.zeros((N * k, N * k), dtype=complex)
    for p, c in coeffs.items():
        if abs(p) < N:
            M += np.kron(np.eye(N, k=-p), c)
    gamma = weight_ratios(weight, N)
    M = M * np.kron(gamma, np.ones((k, k)))
    return DiscToeplitz(N, k, _weight_label(weight), M)


def disc_toeplitz(family: EdgeSymbolFamily, t: float, N: int, weight: Weight = "hardy") -> DiscToeplitz:
    """Disc Toeplitz operator of the family's boundary symbol at angle ``t``."""
    blocks = family.blocks(t)
    R = family.range
    coeffs = {-a: blocks[a + R] for a in range(-R, R + 1)}
    op = disc_toeplitz_from_coefficients(coeffs, N, weight)
    return DiscToeplitz(op.N, op.k, op.weight, (op.matrix + op.matrix.conj().T) / 2)


def disc_spectral_flow(
    family: EdgeSymbolFamily,
    mu: float = 0.0,
    N: int = 60,
    T: int = 200,
    weight: Weight = "hardy",
    theta: float = 0.7,
    delta: float | None = None,
) -> SpectralFlowResult:
    """Spectral flow of ``t -> T_{a_t}`` counting branches localized at low degree."""
    try:
        gap = check_gap(family, mu, 64)
    except GaplessModel as exc:
        raise SymbolNotInvertible(str(exc)) from None
    delta = default_window(gap) if delta is None else float(delta)
    radial_moments(weight, 2 * N - 1)
    data = loop_eigendata(lambda t: disc_toeplitz(family, t, N, weight).matrix, N, family.k, T)
    left, _ = filtered_flows(data, mu, theta, delta)
    return left


def coburn_difference(symbol, t: float, N: int, weight: Weight = "bergman") -> np.ndarray:
    """Weighted minus Hardy Toeplitz matrix.

    ``symbol`` is an :class:`EdgeSymbolFamily` (evaluated at ``t``) or a
    mapping of boundary Fourier coefficients, which need not be Hermitian.
    """
    if isinstance(symbol, EdgeSymbolFamily):
        return disc_toeplitz(symbol, t, N, weight).matrix - disc_toeplitz(symbol, t, N, "hardy").matrix
    return (
        disc_toeplitz_from_coefficients(symbol, N, weight).matrix
        - disc_toeplitz_from_coefficients(symbol, N, "hardy").matrix
    )


def coburn_decay(symbol, t: float = 0.0, N: int = 64, weight: Weight = "bergman") -> np.ndarray:
    """Descending singular values of the weighted-minus-Hardy Toeplitz difference.

    The difference is compact in the limit, so its leading singular values
    settle as ``N`` grows while the tail decays.
    """
    if N < 16:
        raise ValidationError(f"degree N must be at least 16, got {N}")
    return np.linalg.svd(coburn_difference(symbol, t, N, weight), compute_uv=False)
