"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v``; the lines are collected in
the terminal summary under "acceptance criteria".
"""
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES, GAPPED_BUILTINS, qwz_family
from helpers import perturbed_qwz, random_loop
from sflab.bulk import EigenbundleFrames, berry_chern_oracle, bulk_index, bulk_report, chern_plaquette, eigenbundle_frames, spectral_gap
from sflab.disc import coburn_decay, disc_spectral_flow
from sflab.edge import edge_eigendata, edge_spectral_flow, edge_stability
from sflab.exceptions import RefinementNeeded
from sflab.fredholm import aps_edge_index, det_winding, sample_symbol, toeplitz_index_estimate
from sflab.models import EdgeSymbolFamily, qwz_model
from sflab.spectralflow import CrossingFilter, sample_family, spectral_flow

pytestmark = pytest.mark.acceptance


def record(number, title, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} -- {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def test_criterion_1_bulk_edge():
    start = time.perf_counter()
    rows, ok = [], True
    for m in GAPPED_BUILTINS:
        bulk = bulk_index(qwz_model(m), 0.0, 40)
        edge = edge_spectral_flow(qwz_family(m), 0.0, 60, 200, 0.7).index
        ok &= bulk == edge and abs(edge) == (1 if abs(m) == 1 else 0)
        rows.append(f"m={m:g}: bulk {bulk} edge {edge}")
    for m in (-1.0, 1.0):
        oracle = berry_chern_oracle(qwz_model(m), 0.0, "positive", 128)
        ok &= round(oracle) == bulk_index(qwz_model(m), 0.0, 40) and abs(oracle - round(oracle)) < 1e-2
        rows.append(f"oracle(m={m:g}) {oracle:.5f}")
    elapsed = time.perf_counter() - start
    ok &= elapsed < 60
    record(1, "bulk index equals edge spectral flow", ok, f"{'; '.join(rows)}; {elapsed:.1f}s")


def test_criterion_2_perturbed_sweep():
    rng = np.random.default_rng(20261018)
    mismatches, gaps = [], []
    for i in range(20):
        m = 1.0 if i % 2 == 0 else -1.0
        model = perturbed_qwz(rng, m)
        gaps.append(spectral_gap(model, 0.0, 64))
        bulk = bulk_index(model, 0.0, 40)
        edge = edge_spectral_flow(EdgeSymbolFamily.from_model(model), 0.0, 60, 200, 0.7).index
        if bulk != edge:
            mismatches.append((i, bulk, edge))
    ok = not mismatches and min(gaps) > 0.4
    record(2, "bulk = edge on 20 random perturbations", ok, f"min gap {min(gaps):.3f}, mismatches {mismatches}")


def test_criterion_3_disc():
    start = time.perf_counter()
    rows, ok = [], True
    for m in GAPPED_BUILTINS:
        edge = edge_spectral_flow(qwz_family(m), 0.0, 60, 200, 0.7)
        hardy = disc_spectral_flow(qwz_family(m), 0.0, 60, 200, "hardy", 0.7)
        bergman = disc_spectral_flow(qwz_family(m), 0.0, 60, 200, "bergman", 0.7)
        ok &= hardy.to_dict() == edge.flow.to_dict() and bergman.flow == edge.index
        rows.append(f"m={m:g}: {edge.index}/{hardy.flow}/{bergman.flow}")
    elapsed = time.perf_counter() - start
    ok &= elapsed < 60
    record(3, "disc flow (hardy entrywise, bergman integer) = edge", ok, f"edge/hardy/bergman {'; '.join(rows)}; {elapsed:.1f}s")


def test_criterion_4_coburn():
    fam = qwz_family(1.0)
    worst_ratio, worst_change = 0.0, 0.0
    for t in 2 * np.pi * np.arange(8) / 8:
        sv64 = coburn_decay(fam, t, 64)
        sv128 = coburn_decay(fam, t, 128)
        worst_ratio = max(worst_ratio, float(np.max(sv64[16:] / sv64[0])))
        worst_change = max(worst_change, float(np.max(np.abs(sv128[:8] - sv64[:8]) / sv64[:8])))
    ok = worst_ratio < 0.01 and worst_change < 0.05
    record(
        4,
        "Bergman - Hardy difference decays",
        ok,
        f"max sigma_j/sigma_1 (j>16) {worst_ratio:.4f} (< 0.01), max change of sigma_1..8 on N doubling {worst_change:.2e} (< 5%)",
    )


def test_criterion_5_aps():
    rows, ok = [], True
    for m in (-1.0, 1.0, 3.0):
        aps = aps_edge_index(qwz_family(m), 0.0, 40, 96).index
        edge = edge_spectral_flow(qwz_family(m), 0.0, 40, 96, 0.7).index
        ok &= aps == edge
        rows.append(f"m={m:g}: aps {aps} edge {edge}")
    record(5, "APS index equals edge spectral flow", ok, "; ".join(rows))


SYMBOLS_2X2 = {
    "g1": {1: np.diag([1.0, 0.0]), 0: np.array([[0.0, 0.3], [0.2, 2.0]])},
    "g2": {
        -1: np.array([[1.0, 0.0], [0.0, 0.0]]),
        1: np.array([[0.0, 0.5], [0.0, 0.0]]),
        0: np.array([[0.0, 0.0], [0.1, 0.2]]),
        -2: np.array([[0.0, 0.0], [0.0, 1.0]]),
    },
}


def test_criterion_6_toeplitz():
    symbols = {f"exp({w}is)": {w: np.ones((1, 1))} for w in range(-2, 3)} | SYMBOLS_2X2
    rows, ok = [], True
    for name, sym in symbols.items():
        index = toeplitz_index_estimate(sym, 64).index
        winding = det_winding(sample_symbol(sym, 512))
        ok &= index == -winding
        rows.append(f"{name}: {index}/{-winding}")
    record(6, "Toeplitz index = -det winding", ok, "; ".join(rows))


def test_criterion_7_chern_properties():
    rng = np.random.default_rng(7)
    ok, rows = True, []
    for m in GAPPED_BUILTINS:
        model = qwz_model(m)
        fr = eigenbundle_frames(model, 0.0, "positive", 40)
        phases = np.exp(2j * np.pi * rng.random((fr.grid, fr.grid, fr.rank, fr.rank)))
        rotated = chern_plaquette(EigenbundleFrames(fr.frames * phases, fr.bundle, fr.mu, fr.min_gap))
        rep = bulk_report(model, 0.0, 40, "positive")
        neg = bulk_report(model, 0.0, 40, "negative").chern
        doubled = bulk_index(model, 0.0, 80)
        good = rotated.chern == rep.chern and rep.chern + neg == 0 and doubled == rep.chern and rep.residual < 1e-6
        ok &= good
        rows.append(f"m={m:g}: c={rep.chern} gauge {rotated.chern} neg {neg} 2G {doubled} res {rep.residual:.1e}")
    record(7, "Chern engine invariants", ok, "; ".join(rows))


def test_criterion_8_spectral_flow_properties():
    rng = np.random.default_rng(8)
    nonzero, refine = [], 0
    for i in range(50):
        d = int(rng.integers(1, 9))
        family, mu = random_loop(rng, d), float(rng.normal())
        T = 256
        while True:
            data = sample_family(family, T)
            try:
                res = spectral_flow(data, CrossingFilter(mu))
                neg = spectral_flow(-data, CrossingFilter(-mu))
                break
            except RefinementNeeded:
                refine += 1
                T *= 2
        if res.flow != 0 or neg.flow != 0:
            nonzero.append(i)
    antisym, left_right = True, True
    for m in GAPPED_BUILTINS:
        data = edge_eigendata(qwz_family(m), 60, 200)
        for mode in ("all", "weight-above", "weight-below"):
            flt = CrossingFilter(0.0, 0.4, 0.7, mode)
            antisym &= spectral_flow(-data, flt.mirrored()).flow == -spectral_flow(data, flt).flow
        rep = edge_spectral_flow(qwz_family(m), 0.0, 60, 200, 0.7)
        left_right &= rep.index + rep.flow_right.flow == 0
    sweeps = {m: set(edge_stability(qwz_family(m), 0.0).values()) for m in (-1.0, 1.0, 3.0)}
    constant = all(len(v) == 1 for v in sweeps.values())
    ok = not nonzero and antisym and left_right and constant
    record(
        8,
        "spectral-flow engine invariants",
        ok,
        f"nonzero loops {nonzero} ({refine} refinements), antisymmetry {antisym}, left+right=0 {left_right}, sweeps {sweeps}",
    )
