"""Tight-binding Bloch models on Z^2 and their edge symbol families.

Hopping convention, shared by every module::

    (H u)_{(m, n)} = sum_{(a, b)} h_{(a, b)} u_{(m + a, n + b)}

so the Bloch matrix is ``H(s, t) = sum h_{(a, b)} exp(i (a s + b t))``.
``s`` is the direction cut by the half-space projection (transverse to the
edge) and ``t`` runs along the edge.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping

import numpy as np

from .exceptions import DimensionMismatch, EmptyModel, HermiticityViolation

HERMITIAN_TOL = 1e-12

SIGMA_0 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def _frozen(matrix) -> np.ndarray:
    out = np.array(matrix, dtype=complex, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class BlochModel:
    """Finite-range periodic hopping Hamiltonian with ``k`` internal degrees.

    Use :func:`validate_model` to build one from raw data; the constructor
    itself does not check invariants.
    """

    k: int
    hoppings: Mapping[tuple[int, int], np.ndarray]
    label: str = ""

    @property
    def range(self) -> int:
        """Largest |a| over stored hoppings (the transverse range)."""
        return max(abs(a) for a, _ in self.hoppings)

    def __eq__(self, other):
        if not isinstance(other, BlochModel):
            return NotImplemented
        if self.k != other.k or self.label != other.label:
            return False
        if set(self.hoppings) != set(other.hoppings):
            return False
        return all(np.array_equal(self.hoppings[v], other.hoppings[v]) for v in self.hoppings)

    __hash__ = None

    def to_dict(self) -> dict:
        hops = []
        for (a, b) in sorted(self.hoppings):
            h = self.hoppings[(a, b)]
            hops.append({"a": a, "b": b, "re": h.real.tolist(), "im": h.imag.tolist()})
        return {"k": self.k, "label": self.label, "hoppings": hops}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def validate_model(raw) -> BlochModel:
    """Build a :class:`BlochModel` from a raw description and check it.

    ``raw`` is either a mapping in the model JSON layout (``k``, ``label``,
    ``hoppings`` as a list of ``{"a", "b", "re", "im"}``) or a mapping with
    ``k`` and ``hoppings`` given as ``{(a, b): matrix}``.

    Conjugate partners are never filled in: a hopping ``h_(a,b)`` without a
    stored ``h_(-a,-b) == h_(a,b)^dagger`` raises ``HermiticityViolation``.
    """
    if isinstance(raw, BlochModel):
        raw = {"k": raw.k, "label": raw.label, "hoppings": dict(raw.hoppings)}
    try:
        k = int(raw["k"])
        entries = raw["hoppings"]
    except (KeyError, TypeError) as exc:
        raise EmptyModel(f"model description needs 'k' and 'hoppings': {exc}") from None
    if k < 1:
        raise DimensionMismatch(f"k must be positive, got {k}")
    label = str(raw.get("label", ""))

    if isinstance(entries, Mapping):
        items = [((int(a), int(b)), np.asarray(h, dtype=complex)) for (a, b), h in entries.items()]
    else:
        items = []
        for e in entries:
            re = np.asarray(e["re"], dtype=float)
            im = np.asarray(e.get("im", np.zeros_like(re)), dtype=float)
            if re.shape != im.shape:
                raise DimensionMismatch(f"re/im shapes differ for hopping ({e['a']}, {e['b']})")
            items.append(((int(e["a"]), int(e["b"])), re + 1j * im))
    if not items:
        raise EmptyModel("model has no hoppings")

    hoppings: dict[tuple[int, int], np.ndarray] = {}
    for vec, h in items:
        if h.ndim == 0 and k == 1:
            h = h.reshape(1, 1)
        if h.shape != (k, k):
            raise DimensionMismatch(f"hopping {vec} has shape {h.shape}, expected {(k, k)}")
        if vec in hoppings:
            hoppings[vec] = hoppings[vec] + h
        else:
            hoppings[vec] = h

    for (a, b), h in hoppings.items():
        partner = hoppings.get((-a, -b))
        if partner is None:
            raise HermiticityViolation(f"hopping ({a}, {b}) has no conjugate partner ({-a}, {-b})")
        dev = np.max(np.abs(partner - h.conj().T))
        if dev > HERMITIAN_TOL:
            raise HermiticityViolation(
                f"h({-a}, {-b}) differs from h({a}, {b})^dagger by {dev:.3g}"
            )
    if all(not np.any(h) for h in hoppings.values()):
        raise EmptyModel("all hopping matrices vanish")
    return BlochModel(k=k, hoppings={v: _frozen(h) for v, h in sorted(hoppings.items())}, label=label)


def load_model_json(path) -> BlochModel:
    with open(path, encoding="utf-8") as fh:
        return validate_model(json.load(fh))


def save_model_json(model: BlochModel, path) -> None:
    Path(path).write_text(model.to_json() + "\n", encoding="utf-8")


def qwz_model(m: float) -> BlochModel:
    """Qi-Wu-Zhang two-band model.

    ``H(s, t) = sin(s) sx + sin(t) sy + (m + cos s + cos t) sz``; gapped for
    ``m`` not in {-2, 0, 2}, with Chern number of magnitude one for
    ``0 < |m| < 2``.
    """
    hx = (SIGMA_Z - 1j * SIGMA_X) / 2
    hy = (SIGMA_Z - 1j * SIGMA_Y) / 2
    hoppings = {
        (0, 0): float(m) * SIGMA_Z,
        (1, 0): hx,
        (-1, 0): hx.conj().T,
        (0, 1): hy,
        (0, -1): hy.conj().T,
    }
    return validate_model({"k": 2, "label": f"qwz:{float(m)!r}", "hoppings": hoppings})


def eval_bloch(model: BlochModel, s: float, t: float) -> np.ndarray:
    """Bloch matrix ``H(s, t)``, symmetrized to be exactly Hermitian."""
    H = np.zeros((model.k, model.k), dtype=complex)
    for (a, b), h in model.hoppings.items():
        H += h * np.exp(1j * (a * s + b * t))
    dev = np.max(np.abs(H - H.conj().T))
    assert dev <= HERMITIAN_TOL * max(1.0, np.max(np.abs(H))), f"non-Hermitian Bloch matrix ({dev:.3g})"
    return (H + H.conj().T) / 2


def bloch_grid(model: BlochModel, grid: int) -> np.ndarray:
    """``H(s_i, t_j)`` on the uniform ``grid x grid`` torus mesh.

    Returns an array of shape ``(grid, grid, k, k)`` indexed ``[i, j]`` with
    ``s_i = 2 pi i / grid`` and ``t_j = 2 pi j / grid``.
    """
    angles = 2 * np.pi * np.arange(grid) / grid
    H = np.zeros((grid, grid, model.k, model.k), dtype=complex)
    for (a, b), h in model.hoppings.items():
        phase = np.exp(1j * (a * angles[:, None] + b * angles[None, :]))
        H += phase[:, :, None, None] * h
    return (H + np.conj(np.swapaxes(H, -1, -2))) / 2


def edge_symbol(model: BlochModel, t: float) -> dict[int, np.ndarray]:
    """Partial Fourier transform along the edge: ``h_a(t) = sum_b h_(a,b) e^{ibt}``.

    Every ``|a| <= model.range`` appears as a key; missing ones are zero.
    """
    R = model.range
    out = {a: np.zeros((model.k, model.k), dtype=complex) for a in range(-R, R + 1)}
    for (a, b), h in model.hoppings.items():
        out[a] = out[a] + h * np.exp(1j * b * t)
    return out


@dataclass(frozen=True)
class EdgeSymbolFamily:
    """Periodic family ``t -> {h_a(t) : |a| <= range}`` of block Laurent symbols.

    ``coefficients(t)`` must return a mapping from ``a`` to ``k x k`` arrays
    with ``h_{-a}(t) == h_a(t)^dagger``; absent keys mean zero.
    """

    k: int
    range: int
    coefficients: Callable[[float], Mapping[int, np.ndarray]]
    label: str = ""
    model: BlochModel | None = field(default=None, compare=False)

    @classmethod
    def from_model(cls, model: BlochModel) -> "EdgeSymbolFamily":
        return cls(
            k=model.k,
            range=model.range,
            coefficients=lambda t: edge_symbol(model, t),
            label=model.label,
            model=model,
        )

    def blocks(self, t: float) -> np.ndarray:
        """Symbol blocks as an array of shape ``(2R + 1, k, k)``, index ``a + R``."""
        R = self.range
        out = np.zeros((2 * R + 1, self.k, self.k), dtype=complex)
        for a, h in self.coefficients(t).items():
            if abs(a) > R:
                if np.any(h):
                    raise DimensionMismatch(f"symbol coefficient {a} exceeds range {R}")
                continue
            out[a + R] = h
        return out

    def symbol(self, s, t: float) -> np.ndarray:
        """Full Bloch symbol ``sum_a h_a(t) e^{ias}``; vectorized over ``s``."""
        s = np.atleast_1d(np.asarray(s, dtype=float))
        B = self.blocks(t)
        a = np.arange(-self.range, self.range + 1)
        phases = np.exp(1j * np.outer(s, a))
        H = np.einsum("sa,aij->sij", phases, B)
        return (H + np.conj(np.swapaxes(H, -1, -2))) / 2


def symbol_gap(family: EdgeSymbolFamily, mu: float, grid: int = 64) -> float:
    """Smallest ``|eig(H(s, t)) - mu|`` of the family's symbol on a ``grid^2`` mesh."""
    s = 2 * np.pi * np.arange(grid) / grid
    gap = np.inf
    for t in s:
        ev = np.linalg.eigvalsh(family.symbol(s, t))
        gap = min(gap, float(np.min(np.abs(ev - mu))))
    return gap
