"""Job dispatch: run one configured analysis and write its artifacts plus a manifest."""

from __future__ import annotations

import datetime as _dt
import functools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .config import JobConfig
from .fd_oracle import FdProblem, fd_buckling
from .maps import TongueMap, evaluate_cells
from .models import PendulumParams
from .output import (
    atomic_write,
    render_heatmap_svg,
    result_to_dict,
    sha256_file,
    write_mode_csv,
    write_result_json,
    write_tonguemap_csv,
)
from .pendulum import pendulum_point, stability_map_pendulum
from .spectral import SampledSignal, dft_peak, extended_spectrum
from .winkler import critical_load, tongue_map_winkler

__all__ = ["RunManifest", "run_job", "compare_point"]

MANIFEST_NAME = "manifest.json"


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="milliseconds")


@dataclass
class RunManifest:
    """What a completed run produced. Written last, so its presence marks completion."""

    kind: str
    config: dict
    tool_version: str
    started: str
    finished: str = ""
    cells: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)
    settings: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "tool_version": self.tool_version,
            "started": self.started,
            "finished": self.finished,
            "config": self.config,
            "settings": self.settings,
            "cells": self.cells,
            "outputs": self.outputs,
        }


def compare_point(K_bar, lambda_bar, search, fd_opts) -> dict:
    """Hill critical load against the FD oracle at one geometry, with the spectral cross-check."""
    hill = critical_load(K_bar, lambda_bar, search)
    prob = FdProblem.with_resolution(
        K_bar, lambda_bar, fd_opts["periods"], fd_opts["nodes_per_period"], fd_opts["boundary"]
    )
    fd = fd_buckling(prob)
    peak = dft_peak(SampledSignal(fd.mode, prob.spacing))
    nu = hill.locked_fraction / lambda_bar
    top = int(math.ceil(peak.wavenumber * lambda_bar)) + 1
    lattice = extended_spectrum(nu, lambda_bar, (0, top))
    distance = float(np.min(np.abs(lattice - peak.wavenumber)))
    return {
        "K_bar": float(K_bar),
        "lambda_bar": float(lambda_bar),
        "P_cr_ratio_hill": hill.P_cr_ratio,
        "P_cr_ratio_fd": fd.P_cr_ratio,
        "relative_discrepancy": abs(fd.P_bar_cr - hill.P_bar_cr) / hill.P_bar_cr,
        "classification": hill.classification.tag.value,
        "locked_fraction": hill.locked_fraction,
        "fd_peak_wavenumber": peak.wavenumber,
        "bin_width": peak.resolution,
        "nearest_extended_wavenumber": float(lattice[np.argmin(np.abs(lattice - peak.wavenumber))]),
        "spectrum_distance_bins": distance / peak.resolution,
        "fd_residual": fd.residual,
    }


def _map_summary(tmap: TongueMap) -> dict:
    total = tmap.shape[0] * tmap.shape[1]
    return {
        "total": total,
        "ok": total - len(tmap.errors),
        "failed": len(tmap.errors),
        "nan": tmap.nan_cells,
        "errors": [
            {"iy": iy, "ix": ix, "message": msg} for (iy, ix), msg in sorted(tmap.errors.items())
        ],
    }


def _write_map(cfg: JobConfig, tmap: TongueMap, out: Path, written: list[Path]) -> dict:
    csv_path = out / f"{cfg.kind}.csv"
    write_tonguemap_csv(tmap, csv_path)
    written.append(csv_path)
    summary = _map_summary(tmap)
    if cfg.svg:
        svg_path = out / f"{cfg.kind}.svg"
        summary["nan_rendered"] = render_heatmap_svg(tmap, cfg.channel, svg_path)
        written.append(svg_path)
    return summary


def run_job(cfg: JobConfig) -> RunManifest:
    """Run ``cfg`` and write its artifacts into ``cfg.output_dir``.

    Single-point jobs propagate :class:`FloquetError`; map jobs record failing
    cells in the grid and in the manifest instead. ``OSError`` propagates.
    """
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest(cfg.kind, cfg.echo, __version__, _now())
    manifest.settings = {
        "workers": cfg.workers,
        "M": cfg.hill.truncation,
        "brillouin_tolerance": cfg.hill.brillouin_tolerance,
        "tol_lock": cfg.tol_lock,
    }
    written: list[Path] = []
    kind = cfg.kind

    if kind == "pendulum-map":
        tmap = stability_map_pendulum(
            cfg.x_axis.values(), cfg.y_axis.values(), cfg.params["C_bar"], cfg.hill, cfg.tol_lock, cfg.workers
        )
        manifest.settings.update(C_bar=cfg.params["C_bar"], grid=[tmap.shape[1], tmap.shape[0]])
        manifest.cells = _write_map(cfg, tmap, out, written)
    elif kind == "winkler-map":
        tmap = tongue_map_winkler(cfg.x_axis.values(), cfg.y_axis.values(), cfg.search, cfg.workers)
        manifest.settings.update(
            re_threshold=cfg.search.re_threshold,
            bisection_tol=cfg.search.bisection_tol,
            grid=[tmap.shape[1], tmap.shape[0]],
        )
        manifest.cells = _write_map(cfg, tmap, out, written)
    elif kind == "winkler-critical":
        result = critical_load(cfg.params["K_bar"], cfg.params["lambda_bar"], cfg.search)
        path = out / f"{kind}.json"
        write_result_json(result, path)
        written.append(path)
        manifest.cells = {"total": 1, "ok": 1, "failed": 0, "nan": 0}
    elif kind == "pendulum-point":
        p = cfg.params
        result = pendulum_point(PendulumParams(p["A_bar"], p["Omega_bar"], p["C_bar"]), cfg.hill, cfg.tol_lock)
        path = out / f"{kind}.json"
        write_result_json(result, path)
        written.append(path)
        manifest.cells = {"total": 1, "ok": 1, "failed": 0, "nan": 0}
    elif kind == "reconstruct":
        p = cfg.params
        result = critical_load(p["K_bar"], p["lambda_bar"], cfg.search)
        mode = result.mode(p["periods"], p["samples_per_period"])
        csv_path = out / f"{kind}.csv"
        write_mode_csv(mode, csv_path)
        json_path = out / f"{kind}.json"
        d = result_to_dict(result)
        d["kind"] = kind
        d["mode"] = {
            "periods": p["periods"],
            "samples_per_period": p["samples_per_period"],
            "samples": int(mode.xi.size),
            "spacing": mode.spacing,
        }
        write_result_json(d, json_path)
        written += [csv_path, json_path]
        manifest.cells = {"total": 1, "ok": 1, "failed": 0, "nan": 0}
    elif kind == "oracle-compare":
        pts = cfg.params["points"]
        func = functools.partial(_compare_cell, cfg.search, cfg.fd)
        results = evaluate_cells(func, pts, cfg.workers)
        rows, failed = [], []
        for (K, lam), (ok, value) in zip(pts, results):
            if ok:
                rows.append(value)
            else:
                failed.append({"K_bar": K, "lambda_bar": lam, "message": value})
        report = {
            "kind": kind,
            "fd": dict(cfg.fd),
            "points": rows,
            "failed": failed,
            "max_relative_discrepancy": max((r["relative_discrepancy"] for r in rows), default=None),
            "max_spectrum_distance_bins": max((r["spectrum_distance_bins"] for r in rows), default=None),
        }
        path = out / f"{kind}.json"
        write_result_json(report, path)
        written.append(path)
        manifest.cells = {"total": len(pts), "ok": len(rows), "failed": len(failed), "nan": len(failed)}
    else:  # parse_config guarantees a known kind
        raise ValueError(f"unknown job kind {kind!r}")

    manifest.outputs = {p.name: sha256_file(p) for p in written}
    manifest.finished = _now()
    with atomic_write(out / MANIFEST_NAME) as fh:
        fh.write(json.dumps(manifest.to_dict(), indent=2) + "\n")
    return manifest


def _compare_cell(search, fd_opts, K_bar, lambda_bar):
    return compare_point(K_bar, lambda_bar, search, fd_opts)
