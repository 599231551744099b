"""Bulk index: spectral gap, eigenbundle frames and Chern numbers on the torus.

The torus is oriented by ``ds ^ dt`` (``s`` transverse to the edge, ``t``
along it).  Chern numbers follow ``c1 = (i / 2 pi) int tr(P dP ^ dP)``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .exceptions import RankJump, SingularLink, ValidationError
from .models import BlochModel, bloch_grid

GAP_TOL = 1e-8
LINK_TOL = 1e-8
CONVERGED_RESIDUAL = 1e-6
BUNDLES = ("positive", "negative")


def spectral_gap(model: BlochModel, mu: float, grid: int) -> float:
    """Smallest distance from ``mu`` to the spectrum of ``H(s, t)`` over a grid.

    A value below ``GAP_TOL`` means the model is gapless at this resolution;
    deciding what to do about it is up to the caller.
    """
    if grid < 8:
        raise ValidationError(f"grid must be at least 8, got {grid}")
    ev = np.linalg.eigvalsh(bloch_grid(model, grid))
    return float(np.min(np.abs(ev - mu)))


@dataclass(frozen=True)
class EigenbundleFrames:
    """Orthonormal frames ``V[i, j]`` (``k x r``) of one eigenbundle on a ``G x G`` grid."""

    frames: np.ndarray
    bundle: str
    mu: float
    min_gap: float

    @property
    def grid(self) -> int:
        return self.frames.shape[0]

    @property
    def rank(self) -> int:
        return self.frames.shape[-1]

    def projectors(self) -> np.ndarray:
        V = self.frames
        return V @ np.conj(np.swapaxes(V, -1, -2))


def _split(model, mu, grid):
    if grid < 8:
        raise ValidationError(f"grid must be at least 8, got {grid}")
    ev, vecs = np.linalg.eigh(bloch_grid(model, grid))
    return ev - mu, vecs


def eigenbundle_frames(model: BlochModel, mu: float, bundle: str = "positive", grid: int = 40) -> EigenbundleFrames:
    """Frames of the eigenspace where ``H(s, t) - mu`` is positive (or negative).

    Raises
    ------
    RankJump
        If the rank changes across the grid, or an eigenvalue sits within
        ``GAP_TOL`` of ``mu``.
    """
    if bundle not in BUNDLES:
        raise ValidationError(f"bundle must be one of {BUNDLES}, got {bundle!r}")
    shifted, vecs = _split(model, mu, grid)
    min_gap = float(np.min(np.abs(shifted)))
    n_pos = np.sum(shifted > 0, axis=-1)
    if min_gap <= GAP_TOL or np.any(n_pos != n_pos.flat[0]):
        raise RankJump(f"eigenbundle rank not constant on the {grid}x{grid} grid (min gap {min_gap:.3g})")
    r_pos = int(n_pos.flat[0])
    k = model.k
    # eigh sorts ascending: the positive part is the top r_pos columns
    V = vecs[..., k - r_pos:] if bundle == "positive" else vecs[..., : k - r_pos]
    return EigenbundleFrames(np.ascontiguousarray(V), bundle, float(mu), min_gap)


@dataclass
class ChernReport:
    chern: int
    raw: float
    residual: float
    min_gap: float
    grid: int
    fluxes: np.ndarray
    bundle: str = "positive"

    @property
    def converged(self) -> bool:
        return self.residual < CONVERGED_RESIDUAL

    @property
    def max_abs_flux(self) -> float:
        return float(np.max(np.abs(self.fluxes))) if self.fluxes.size else 0.0

    def to_dict(self, include_fluxes: bool = False) -> dict:
        out = {
            "chern": int(self.chern),
            "raw": float(self.raw),
            "residual": float(self.residual),
            "converged": bool(self.converged),
            "min_gap": float(self.min_gap),
            "grid": int(self.grid),
            "bundle": self.bundle,
            "max_abs_flux": self.max_abs_flux,
            "admissible": bool(self.max_abs_flux < np.pi / 2),
        }
        if include_fluxes:
            out["fluxes"] = self.fluxes.tolist()
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def flux_rows(self):
        """``(s, t, flux)`` rows, ``s`` major, for CSV export."""
        G = self.grid
        angles = 2 * np.pi * np.arange(G) / G
        for i in range(G):
            for j in range(G):
                yield angles[i], angles[j], self.fluxes[i, j]


def _links(V, axis):
    overlap = np.conj(np.swapaxes(V, -1, -2)) @ np.roll(V, -1, axis=axis)
    det = np.linalg.det(overlap) if V.shape[-1] else np.ones(V.shape[:2], dtype=complex)
    if np.min(np.abs(det)) < LINK_TOL:
        raise SingularLink(f"link determinant {np.min(np.abs(det)):.3g} below {LINK_TOL}; refine the grid")
    return det / np.abs(det)


def chern_plaquette(frames: EigenbundleFrames) -> ChernReport:
    """Lattice Chern number of an eigenbundle from plaquette fluxes.

    Link variables are ``U(k) = det(V(k)^dagger V(k + e))`` normalized to unit
    modulus.  Each plaquette flux is the principal argument of the
    holonomy around the cell, i.e. of the conjugated link product
    ``U_s(k) U_t(k + e_s) U_s(k + e_t)^-1 U_t(k)^-1``; the fluxes sum to
    ``2 pi`` times the Chern number, exactly up to rounding, for any frame
    choice.
    """
    V = frames.frames
    Us = _links(V, 0)
    Ut = _links(V, 1)
    loop = Us * np.roll(Ut, -1, axis=0) * np.conj(np.roll(Us, -1, axis=1)) * np.conj(Ut)
    fluxes = -np.angle(loop)
    # keep the principal branch (-pi, pi] after the sign flip
    fluxes[fluxes == -np.pi] = np.pi
    raw = float(fluxes.sum() / (2 * np.pi))
    chern = int(round(raw))
    return ChernReport(chern, raw, abs(raw - chern), frames.min_gap, frames.grid, fluxes, frames.bundle)


def berry_chern_oracle(model: BlochModel, mu: float, bundle: str = "positive", grid: int = 128) -> float:
    """Independent real-valued Chern number from the spectral projector.

    Riemann sum of ``(i / 2 pi) tr(P [d_s P, d_t P])`` with periodic central
    differences.  Not rounded.
    """
    if bundle not in BUNDLES:
        raise ValidationError(f"bundle must be one of {BUNDLES}, got {bundle!r}")
    shifted, vecs = _split(model, mu, grid)
    mask = shifted > 0 if bundle == "positive" else shifted < 0
    P = np.einsum("stia,sta,stja->stij", vecs, mask.astype(float), vecs.conj())
    h = 2 * np.pi / grid
    dPs = (np.roll(P, -1, axis=0) - np.roll(P, 1, axis=0)) / (2 * h)
    dPt = (np.roll(P, -1, axis=1) - np.roll(P, 1, axis=1)) / (2 * h)
    curv = np.einsum("stij,stjk,stki->st", P, dPs, dPt) - np.einsum("stij,stjk,stki->st", P, dPt, dPs)
    return float(np.real(1j / (2 * np.pi) * curv.sum() * h * h))


def bulk_report(model: BlochModel, mu: float = 0.0, grid: int = 40, bundle: str = "positive") -> ChernReport:
    return chern_plaquette(eigenbundle_frames(model, mu, bundle, grid))


def bulk_index(model: BlochModel, mu: float = 0.0, grid: int = 40) -> int:
    """Chern number of the bundle above the Fermi level."""
    return bulk_report(model, mu, grid, "positive").chern
