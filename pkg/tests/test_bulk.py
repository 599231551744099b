import numpy as np
import pytest
from scipy.stats import unitary_group

from conftest import GAPPED_BUILTINS
from sflab.bulk import (
    EigenbundleFrames,
    berry_chern_oracle,
    bulk_index,
    chern_plaquette,
    eigenbundle_frames,
    spectral_gap,
)
from sflab.exceptions import RankJump
from sflab.models import SIGMA_Z, qwz_model, validate_model


def constant(h):
    h = np.atleast_2d(np.asarray(h, dtype=complex))
    return validate_model({"k": h.shape[0], "hoppings": {(0, 0): h}})


def gap_brute_force(model, mu, grid):
    # eigenvalues from the closed form |d(s, t)| for qwz, independent of bloch_grid
    m = model.hoppings[(0, 0)][0, 0].real
    s = 2 * np.pi * np.arange(grid) / grid
    S, T = np.meshgrid(s, s, indexing="ij")
    d = np.sqrt(np.sin(S) ** 2 + np.sin(T) ** 2 + (m + np.cos(S) + np.cos(T)) ** 2)
    return float(np.min(np.minimum(np.abs(d - mu), np.abs(-d - mu))))


def test_gap_constant():
    assert spectral_gap(constant(SIGMA_Z), 0.0, 8) == 1.0


def test_gap_closes_for_m2():
    assert spectral_gap(qwz_model(2.0), 0.0, 64) < 1e-12


@pytest.mark.parametrize("m", [1.0, -1.5, 3.0])
def test_gap_matches_closed_form(m):
    assert spectral_gap(qwz_model(m), 0.0, 64) == pytest.approx(gap_brute_force(qwz_model(m), 0.0, 64), abs=1e-12)


def test_gap_grid_stable():
    g64 = spectral_gap(qwz_model(1.0), 0.0, 64)
    g128 = spectral_gap(qwz_model(1.0), 0.0, 128)
    assert g64 > 0
    assert round(g64, 3) == round(g128, 3)


def test_frames_constant_model():
    fr = eigenbundle_frames(constant(SIGMA_Z), 0.0, "positive", 8)
    assert fr.rank == 1
    np.testing.assert_allclose(np.abs(fr.frames[..., 0, 0]), 1.0)
    np.testing.assert_allclose(np.abs(fr.frames[..., 1, 0]), 0.0)
    full = eigenbundle_frames(constant(np.diag([2.0, 3.0])), 0.0, "positive", 8)
    assert full.rank == 2


def test_frames_orthonormal():
    fr = eigenbundle_frames(qwz_model(1.0), 0.0, "negative", 16)
    gram = np.conj(np.swapaxes(fr.frames, -1, -2)) @ fr.frames
    np.testing.assert_allclose(gram, np.broadcast_to(np.eye(fr.rank), gram.shape), atol=1e-10)


def test_rank_jump_when_gap_closes():
    with pytest.raises(RankJump):
        eigenbundle_frames(qwz_model(2.0), 0.0, "positive", 40)


def test_constant_model_chern_zero():
    rep = chern_plaquette(eigenbundle_frames(constant(SIGMA_Z), 0.0, "positive", 8))
    assert rep.chern == 0
    assert np.all(rep.fluxes == 0)
    assert berry_chern_oracle(constant(SIGMA_Z), 0.0, "positive", 16) == pytest.approx(0.0, abs=1e-12)


# expected integers come from the Berry-curvature oracle at grid 128
# (values 0.99894 / -0.99894 / 3.7e-5 for m = 1 / -1 / 3)
@pytest.mark.parametrize("m, expected", [(1.0, 1), (-1.0, -1), (3.0, 0), (-3.0, 0), (0.5, 1), (-1.5, -1)])
def test_chern_values(m, expected):
    oracle = berry_chern_oracle(qwz_model(m), 0.0, "positive", 128)
    assert abs(oracle - round(oracle)) < 3e-3
    assert round(oracle) == expected
    rep = chern_plaquette(eigenbundle_frames(qwz_model(m), 0.0, "positive", 40))
    assert rep.chern == expected
    assert rep.converged


def test_sign_flips_with_mass():
    assert bulk_index(qwz_model(-1.0)) == -bulk_index(qwz_model(1.0))


def test_fluxes_principal_branch():
    rep = chern_plaquette(eigenbundle_frames(qwz_model(1.0), 0.0, "positive", 40))
    assert np.all(rep.fluxes > -np.pi) and np.all(rep.fluxes <= np.pi)
    assert rep.chern == round(rep.fluxes.sum() / (2 * np.pi))
    assert rep.max_abs_flux < np.pi / 2


@pytest.mark.parametrize("m", GAPPED_BUILTINS)
def test_gauge_invariance(m, rng):
    fr = eigenbundle_frames(qwz_model(m), 0.0, "positive", 40)
    G, r = fr.grid, fr.rank
    U = unitary_group.rvs(r, size=G * G, random_state=rng).reshape(G, G, r, r) if r > 1 else np.exp(
        2j * np.pi * rng.random((G, G, 1, 1))
    )
    rotated = EigenbundleFrames(fr.frames @ U, fr.bundle, fr.mu, fr.min_gap)
    a, b = chern_plaquette(fr), chern_plaquette(rotated)
    assert a.chern == b.chern
    np.testing.assert_allclose(a.fluxes, b.fluxes, atol=1e-10)


@pytest.mark.parametrize("m", GAPPED_BUILTINS)
def test_positive_plus_negative_is_zero(m):
    pos = chern_plaquette(eigenbundle_frames(qwz_model(m), 0.0, "positive", 40)).chern
    neg = chern_plaquette(eigenbundle_frames(qwz_model(m), 0.0, "negative", 40)).chern
    assert pos + neg == 0


@pytest.mark.parametrize("m", GAPPED_BUILTINS)
def test_grid_doubling(m):
    assert bulk_index(qwz_model(m), 0.0, 20) == bulk_index(qwz_model(m), 0.0, 40) == bulk_index(qwz_model(m), 0.0, 80)
