"""``sflab`` command line.

Exit codes: 0 success, 2 invalid input / gapless model / failed
bulk-edge check, 3 numerics need refinement.  Reports go to stdout as JSON
(with ``--json``) and CSV tables only to files.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .bulk import berry_chern_oracle, bulk_report
from .disc import coburn_decay, disc_spectral_flow
from .edge import edge_bands, edge_spectral_flow, edge_stability
from .estimators import check_model
from .exceptions import NumericalAmbiguity, SflabError, ValidationError
from .fredholm import aps_edge_index, det_winding, sample_symbol, toeplitz_index_estimate
from .models import EdgeSymbolFamily

COMMANDS = ("chern", "edge-sf", "disc-sf", "verify-bec", "aps-index", "toeplitz-index", "coburn", "bands")


def fmt_float(x: float) -> str:
    return format(float(x), ".17g")


def _encode(obj) -> str:
    # json.dumps with every float at 17 significant digits; key order preserved
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_encode(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_encode(v) for v in obj) + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        if not math.isfinite(obj):
            return "null"
        return fmt_float(obj)
    if obj is None:
        return "null"
    return json.dumps(str(obj))


def dumps(obj) -> str:
    return _encode(obj)


@dataclass
class RunConfig:
    command: str
    model: str | None = None
    params: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)
    json: bool = False

    def validate(self) -> None:
        p = self.params
        checks = {
            "grid": lambda v: v >= 8,
            "sites": lambda v: v >= 8,
            "degree": lambda v: v >= 8,
            "steps": lambda v: v >= 16,
            "theta": lambda v: 0.5 < v < 1,
            "tol_rel": lambda v: 0 < v < 1,
        }
        for name, ok in checks.items():
            if p.get(name) is not None and not ok(p[name]):
                raise ValidationError(f"--{name.replace('_', '-')}={p[name]} out of range")
        if p.get("mu") is not None and not math.isfinite(p["mu"]):
            raise ValidationError("--mu must be finite")

    def provenance(self, model=None) -> dict:
        return {
            "command": self.command,
            "model": self.model,
            "model_label": None if model is None else model.label,
            "params": dict(sorted(self.params.items())),
            "outputs": dict(sorted(self.outputs.items())),
            "versions": {"sflab": __version__, "numpy": np.__version__, "scipy": scipy.__version__},
        }


def _family(model):
    return EdgeSymbolFamily.from_model(model)


def _write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt_float(x) if isinstance(x, (float, np.floating)) else x for x in row])


def _cmd_chern(cfg, model):
    p = cfg.params
    rep = bulk_report(model, p["mu"], p["grid"], p["bundle"])
    out = rep.to_dict()
    if p.get("oracle_grid"):
        out["berry_oracle"] = berry_chern_oracle(model, p["mu"], p["bundle"], p["oracle_grid"])
    if cfg.outputs.get("fluxes"):
        _write_csv(cfg.outputs["fluxes"], ["s", "t", "flux"], rep.flux_rows())
    return out, True, f"chern = {rep.chern} (raw {rep.raw:.6g}, grid {rep.grid}, {rep.bundle} bundle)"


def _cmd_edge(cfg, model):
    p = cfg.params
    fam = _family(model)
    rep = edge_spectral_flow(fam, p["mu"], p["sites"], p["steps"], p["theta"], p.get("delta"))
    if p.get("sweep"):
        rep.stability = edge_stability(fam, p["mu"], delta=rep.delta)
    return rep.to_dict(), True, f"edge index = {rep.index} (right-edge flow {rep.flow_right.flow})"


def _cmd_disc(cfg, model):
    p = cfg.params
    res = disc_spectral_flow(_family(model), p["mu"], p["degree"], p["steps"], p["weight"], p["theta"])
    out = res.to_dict()
    out["weight"] = p["weight"]
    return out, True, f"disc spectral flow ({p['weight']}) = {res.flow}"


def _cmd_verify(cfg, model):
    p = cfg.params
    bulk = bulk_report(model, p["mu"], p["grid"], "positive")
    edge = edge_spectral_flow(_family(model), p["mu"], p["sites"], p["steps"], p["theta"])
    match = bulk.chern == edge.index
    out = {"bulk": bulk.to_dict(), "edge": edge.to_dict(), "match": match}
    return out, match, f"bulk = {bulk.chern}, edge = {edge.index}: {'match' if match else 'MISMATCH'}"


def _cmd_aps(cfg, model):
    p = cfg.params
    est = aps_edge_index(_family(model), p["mu"], p["sites"], p["steps"], p["tol_rel"])
    return est.to_dict(), True, f"index(d/dt - A) = {est.index}"


def _cmd_coburn(cfg, model):
    p = cfg.params
    sv = coburn_decay(_family(model), p["t"], p["degree"], p["weight"])
    if cfg.outputs.get("out"):
        _write_csv(cfg.outputs["out"], ["j", "sigma"], ((j + 1, float(s)) for j, s in enumerate(sv)))
    out = {"degree": p["degree"], "t": p["t"], "weight": p["weight"], "singular_values": [float(s) for s in sv]}
    return out, True, f"sigma_1 = {sv[0]:.6g}, sigma_17/sigma_1 = {sv[16] / sv[0] if sv[0] else 0:.3g}"


def _cmd_bands(cfg, model):
    p = cfg.params
    rows = edge_bands(_family(model), p["mu"], p["sites"], p["steps"])
    if cfg.outputs.get("out"):
        _write_csv(cfg.outputs["out"], ["t", "lambda", "left_mass"], rows)
    return {"rows": len(rows)}, True, f"{len(rows)} in-gap rows"


def parse_symbol(spec: str):
    """``exp:<w>`` for ``e^{iws}``, inline JSON, or ``file:<path>`` with JSON.

    JSON layout: ``{"k": int, "coefficients": [{"p": int, "re": [[..]], "im": [[..]]}]}``
    with ``p`` the Fourier degree.
    """
    if spec.startswith("exp:"):
        try:
            w = int(spec[4:])
        except ValueError:
            raise ValidationError(f"bad winding in {spec!r}") from None
        return {w: np.ones((1, 1), dtype=complex)}
    if spec.startswith("file:"):
        text = Path(spec[5:]).read_text(encoding="utf-8")
    else:
        text = spec
    try:
        raw = json.loads(text)
        k = int(raw["k"])
        coeffs = {}
        for c in raw["coefficients"]:
            re = np.asarray(c["re"], dtype=float)
            im = np.asarray(c.get("im", np.zeros_like(re)), dtype=float)
            m = np.atleast_2d(re + 1j * im)
            if m.shape != (k, k):
                raise ValidationError(f"coefficient {c['p']} has shape {m.shape}, expected {(k, k)}")
            coeffs[int(c["p"])] = m
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise ValidationError(f"cannot parse symbol: {exc}") from None
    if not coeffs:
        raise ValidationError("symbol has no coefficients")
    return coeffs


def _cmd_toeplitz(cfg, _model):
    p = cfg.params
    sym = parse_symbol(p["symbol"])
    est = toeplitz_index_estimate(sym, p["sites"], p["tol_rel"])
    winding = det_winding(sample_symbol(sym, max(256, 8 * p["sites"])))
    out = est.to_dict()
    out["det_winding"] = winding
    out["oracle_agrees"] = est.index == -winding
    return out, True, f"index = {est.index}, winding = {winding}"


HANDLERS = {
    "chern": _cmd_chern,
    "edge-sf": _cmd_edge,
    "disc-sf": _cmd_disc,
    "verify-bec": _cmd_verify,
    "aps-index": _cmd_aps,
    "toeplitz-index": _cmd_toeplitz,
    "coburn": _cmd_coburn,
    "bands": _cmd_bands,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sflab", description="Bulk and edge indices, spectral flow and Toeplitz index checks.")
    parser.add_argument("--version", action="version", version=f"sflab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_, model=True, mu=True):
        sp = sub.add_parser(name, help=help_)
        if model:
            sp.add_argument("--model", required=True, help="qwz:<m> or file:<path>")
        if mu:
            sp.add_argument("--mu", type=float, default=0.0, help="Fermi level")
        sp.add_argument("--json", action="store_true", help="print the JSON report")
        return sp

    sp = add("chern", "bulk Chern number")
    sp.add_argument("--grid", type=int, default=40)
    sp.add_argument("--bundle", choices=("positive", "negative"), default="positive")
    sp.add_argument("--oracle-grid", type=int, default=None, help="also run the Berry-curvature oracle")
    sp.add_argument("--fluxes", default=None, help="CSV of plaquette fluxes")

    sp = add("edge-sf", "edge index (left-filtered spectral flow)")
    sp.add_argument("--sites", type=int, default=60)
    sp.add_argument("--steps", type=int, default=200)
    sp.add_argument("--theta", type=float, default=0.7)
    sp.add_argument("--delta", type=float, default=None)
    sp.add_argument("--sweep", action="store_true", help="add the N/T/theta robustness sweep")

    sp = add("disc-sf", "spectral flow of the disc Toeplitz family")
    sp.add_argument("--degree", type=int, default=60)
    sp.add_argument("--steps", type=int, default=200)
    sp.add_argument("--weight", choices=("hardy", "bergman"), default="hardy")
    sp.add_argument("--theta", type=float, default=0.7)

    sp = add("verify-bec", "check bulk index == edge index")
    sp.add_argument("--grid", type=int, default=40)
    sp.add_argument("--sites", type=int, default=60)
    sp.add_argument("--steps", type=int, default=200)
    sp.add_argument("--theta", type=float, default=0.7)

    sp = add("aps-index", "index of the discretized d/dt - (H#(t) - mu)")
    sp.add_argument("--sites", type=int, default=40)
    sp.add_argument("--steps", type=int, default=96)
    sp.add_argument("--tol-rel", type=float, default=1e-6)

    sp = add("toeplitz-index", "index of a Toeplitz operator vs. determinant winding", model=False, mu=False)
    sp.add_argument("--symbol", required=True, help="exp:<w>, inline JSON, or file:<path>")
    sp.add_argument("--sites", type=int, default=64)
    sp.add_argument("--tol-rel", type=float, default=1e-6)

    sp = add("coburn", "singular values of Bergman minus Hardy Toeplitz", mu=False)
    sp.add_argument("--t", type=float, default=0.0)
    sp.add_argument("--degree", type=int, default=64)
    sp.add_argument("--weight", choices=("bergman",), default="bergman")
    sp.add_argument("--out", default=None, help="CSV with rows j,sigma")

    sp = add("bands", "edge band table (t, lambda, left_mass)")
    sp.add_argument("--sites", type=int, default=60)
    sp.add_argument("--steps", type=int, default=200)
    sp.add_argument("--out", required=True, help="CSV output path")
    return parser


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    values = vars(ns).copy()
    command = values.pop("command")
    as_json = values.pop("json", False)
    model = values.pop("model", None)
    outputs = {k: values.pop(k) for k in ("fluxes", "out") if k in values and values[k] is not None}
    values.pop("fluxes", None)
    values.pop("out", None)
    return RunConfig(command, model, values, outputs, as_json)


def _error(code: str, message: str, status: int) -> int:
    print(dumps({"error": code, "message": message}))
    return status


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    cfg = config_from_args(ns)
    try:
        cfg.validate()
        model = check_model(cfg.model) if cfg.model is not None else None
        report, ok, summary = HANDLERS[cfg.command](cfg, model)
    except FileNotFoundError as exc:
        return _error("file_not_found", str(exc), 2)
    except NumericalAmbiguity as exc:
        return _error(exc.code, str(exc), 3)
    except SflabError as exc:
        return _error(exc.code, str(exc), 2)
    report = dict(report)
    report["provenance"] = cfg.provenance(model)
    if cfg.json:
        print(dumps(report))
    else:
        print(summary)
    return 0 if ok else 2


run = main


if __name__ == "__main__":
    sys.exit(main())
