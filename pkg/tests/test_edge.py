import numpy as np
import pytest

from conftest import GAPPED_BUILTINS, qwz_family
from sflab.bulk import bulk_index
from sflab.edge import build_halfspace, edge_bands, edge_spectral_flow, edge_stability
from sflab.exceptions import GaplessModel, TooFewSites
from sflab.models import SIGMA_Z, EdgeSymbolFamily, qwz_model


def static_family(h0=SIGMA_Z, h1=None):
    k = np.atleast_2d(h0).shape[0]

    def coefficients(t):
        out = {0: np.atleast_2d(np.asarray(h0, dtype=complex))}
        if h1 is not None:
            h = np.atleast_2d(np.asarray(h1, dtype=complex))
            out[1], out[-1] = h, h.conj().T
        return out

    return EdgeSymbolFamily(k, 0 if h1 is None else 1, coefficients)


def test_block_diagonal_for_onsite_only():
    op = build_halfspace(static_family(), 0.3, 5)
    np.testing.assert_array_equal(op.matrix, np.kron(np.eye(5), SIGMA_Z))


def test_scalar_hopping_tridiagonal():
    fam = static_family(h0=[[0.0]], h1=[[1.0]])
    op = build_halfspace(fam, 0.0, 5)
    expected = np.diag(np.ones(4), 1) + np.diag(np.ones(4), -1)
    np.testing.assert_array_equal(op.matrix, expected)
    assert np.array_equal(op.matrix[:3, :3], [[0, 1, 0], [1, 0, 1], [0, 1, 0]])


def test_too_few_sites():
    with pytest.raises(TooFewSites):
        build_halfspace(qwz_family(1.0), 0.0, 4)


def test_qwz_halfspace_structure(rng):
    t = rng.uniform(0, 2 * np.pi)
    op = build_halfspace(qwz_family(1.0), t, 40)
    assert np.max(np.abs(op.matrix - op.matrix.conj().T)) <= 1e-12
    for m in range(39):
        for n in range(39):
            np.testing.assert_array_equal(op.block(m + 1, n + 1), op.block(m, n))
    blocks = qwz_family(1.0).blocks(t)
    np.testing.assert_array_equal(op.block(3, 4), blocks[2])  # h_{+1} above the diagonal


def test_static_family_zero_flow():
    rep = edge_spectral_flow(static_family(), 0.0, 20, 32)
    assert rep.index == 0 and rep.flow_right.flow == 0


@pytest.mark.parametrize("m", GAPPED_BUILTINS)
def test_edge_equals_bulk(m):
    rep = edge_spectral_flow(qwz_family(m), 0.0, 60, 200, 0.7, 0.3)
    assert rep.index == bulk_index(qwz_model(m))
    assert rep.index + rep.flow_right.flow == 0
    assert abs(rep.index) == (1 if abs(m) == 1 else 0)


def test_gapless_model_rejected():
    with pytest.raises(GaplessModel):
        edge_spectral_flow(EdgeSymbolFamily.from_model(qwz_model(2.0)), 0.0, 40, 64)


def test_stability_sweep_constant():
    table = edge_stability(qwz_family(-1.0), 0.0, sites=(40, 60), steps=(100, 200), thetas=(0.6, 0.9))
    assert set(table.values()) == {-1}


def test_bands_static_family():
    rows = edge_bands(static_family(h0=np.diag([-1.0, 1.0]), h1=0.2 * np.eye(2)), 0.0, 10, 4)
    by_t = {}
    for t, lam, _ in rows:
        by_t.setdefault(t, []).append(lam)
    columns = list(by_t.values())
    for col in columns[1:]:
        np.testing.assert_allclose(col, columns[0])


def test_bands_trace_left_branch():
    rows = edge_bands(qwz_family(1.0), 0.0, 60, 200)
    assert rows == sorted(rows)
    left = [(t, lam) for t, lam, w in rows if w > 0.9 and abs(lam) < 0.5]
    lams = [lam for _, lam in left]
    assert min(lams) < 0 < max(lams)


def test_bands_empty_outside_spectrum():
    assert edge_bands(qwz_family(1.0), 10.0, 20, 16) == []
