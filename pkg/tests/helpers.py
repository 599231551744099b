"""Random test inputs shared by the suites."""
import numpy as np

from sflab.bulk import spectral_gap
from sflab.models import qwz_model, validate_model

PERTURBATION_VECTORS = [(0, 0), (1, 0), (0, 1), (1, 1), (1, -1), (2, 0), (0, 2)]


def random_hermitian(rng, d, scale=1.0):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return scale * (a + a.conj().T) / 2


def random_loop(rng, d, harmonics=2):
    """Smooth periodic Hermitian family ``t -> C + sum A_n cos nt + B_n sin nt``."""
    C = random_hermitian(rng, d)
    coeffs = [(random_hermitian(rng, d), random_hermitian(rng, d)) for _ in range(harmonics)]

    def family(t):
        out = C.copy()
        for n, (A, B) in enumerate(coeffs, start=1):
            out = out + A * np.cos(n * t) + B * np.sin(n * t)
        return out

    return family


def perturbed_qwz(rng, m, min_gap=0.4, scale=0.35, grid=64):
    """qwz(m) plus random k=2 hoppings of range <= 2, shrunk until the gap exceeds ``min_gap``."""
    base = qwz_model(m)
    extra = {v: rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)) for v in PERTURBATION_VECTORS}
    while True:
        hops = {v: np.array(h) for v, h in base.hoppings.items()}
        for (a, b), h in extra.items():
            if (a, b) == (0, 0):
                hops[(0, 0)] = hops[(0, 0)] + scale * (h + h.conj().T) / 2
                continue
            hops[(a, b)] = hops.get((a, b), 0) + scale * h
            hops[(-a, -b)] = hops.get((-a, -b), 0) + scale * h.conj().T
        model = validate_model({"k": 2, "label": f"perturbed-qwz:{m}", "hoppings": hops})
        if spectral_gap(model, 0.0, grid) > min_gap:
            return model
        scale /= 2
