"""Dynamic stability maps of the linearised parametric pendulum."""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from .floquet import (
    DEFAULT_TOL_LOCK,
    FloquetExponent,
    FloquetSpectrum,
    HillOptions,
    PeriodicityClass,
    classify_spectrum,
    zone_eigenvalues,
)
from .maps import TongueMap, check_grid, evaluate_cells, map_metadata
from .models import PendulumParams, pendulum_system

__all__ = ["StabilityPoint", "pendulum_point", "stability_map_pendulum"]


@dataclass(frozen=True)
class StabilityPoint:
    T_bar_over_2pi: float
    A_bar: float
    C_bar: float
    max_re: float
    max_im_fraction: float
    classification: PeriodicityClass

    @property
    def stable(self) -> bool:
        return self.max_re <= 0


def pendulum_point(p: PendulumParams, opts: HillOptions | None = None, tol_lock: float = DEFAULT_TOL_LOCK) -> StabilityPoint:
    """Largest real part and largest folded imaginary fraction at one parameter point.

    The classification is taken from the exponent(s) attaining ``max_re``.
    """
    opts = opts or HillOptions()
    vals = zone_eigenvalues(pendulum_system(p), opts)
    spectrum = FloquetSpectrum(
        tuple(FloquetExponent(v) for v in vals), p.Omega_bar, opts.truncation, 2
    )
    return StabilityPoint(
        T_bar_over_2pi=1.0 / p.Omega_bar,
        A_bar=p.A_bar,
        C_bar=p.C_bar,
        max_re=spectrum.max_real,
        max_im_fraction=spectrum.max_im_fraction,
        classification=classify_spectrum(spectrum, tol_lock),
    )


def _pendulum_cell(C_bar, opts, tol_lock, A_bar, T_over_2pi):
    pt = pendulum_point(PendulumParams.from_period(T_over_2pi, A_bar, C_bar), opts, tol_lock)
    return pt.max_re, pt.max_im_fraction, float(pt.stable), pt.classification.tag.code


def stability_map_pendulum(
    T_grid,
    A_grid,
    C_bar: float,
    opts: HillOptions | None = None,
    tol_lock: float = DEFAULT_TOL_LOCK,
    workers: int = 1,
) -> TongueMap:
    """Stability map over ``T_bar / (2 pi)`` (x axis) and ``A_bar`` (y axis).

    Channels: ``max_re``, ``max_im_fraction``, ``stable`` (1.0 or 0.0) and
    ``classification`` (:attr:`Periodicity.code`).
    """
    opts = opts or HillOptions()
    T = check_grid(T_grid, "T_bar/(2 pi)", lower=0.0, lower_open=True)
    A = check_grid(A_grid, "A_bar", lower=0.0)
    PendulumParams(0.0, 1.0, C_bar)  # validates C_bar
    cells = [(a, t) for a in A for t in T]
    func = functools.partial(_pendulum_cell, C_bar, opts, tol_lock)
    results = evaluate_cells(func, cells, workers)
    names = ("max_re", "max_im_fraction", "stable", "classification")
    channels = {n: np.full((A.size, T.size), np.nan) for n in names}
    errors = {}
    for idx, (ok, value) in enumerate(results):
        iy, ix = divmod(idx, T.size)
        if ok:
            for n, v in zip(names, value):
                channels[n][iy, ix] = v
        else:
            errors[(iy, ix)] = value
    meta = map_metadata(
        system="pendulum",
        C_bar=float(C_bar),
        M=opts.truncation,
        brillouin_tolerance=opts.brillouin_tolerance,
        tol_lock=tol_lock,
    )
    return TongueMap(T, "T_bar/(2 pi)", A, "A_bar", channels, meta, errors)
