"""Critical buckling load and lock-in tongue map of the modulated Winkler beam.

The critical load is the smallest ``P_bar`` at which some Floquet exponent
reaches the imaginary axis. Exponents arrive there by collision, so
``min |Re s|`` touches zero without changing sign; the search therefore
scans ``f(P) = min_j |Re s_j|`` upward and bisects on ``f(P) - threshold``.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError, SearchError
from .floquet import (
    DEFAULT_TOL_LOCK,
    FloquetExponent,
    HillOptions,
    ModeShape,
    PeriodicityClass,
    Periodicity,
    classify_fraction,
    fold_fraction,
    harmonics_for,
    reconstruct_mode,
    zone_eigenvalues,
)
from .maps import TongueMap, check_grid, evaluate_cells, map_metadata
from .models import FLAT_CRITICAL_LOAD, WinklerParams, winkler_system

__all__ = [
    "CriticalSearchOptions",
    "CriticalLoadResult",
    "min_abs_real",
    "critical_load",
    "tongue_map_winkler",
]


@dataclass(frozen=True)
class CriticalSearchOptions:
    """Settings of the critical-load search.

    ``bisection_tol`` is relative to the load. ``tol_lock`` is the tolerance on
    the folded fraction used to call a mode periodic or period-doubled.
    """

    re_threshold: float = 1e-8
    P_lo: float = 0.0
    P_hi: float = 1.2 * FLAT_CRITICAL_LOAD
    coarse_steps: int = 200
    bisection_tol: float = 1e-8
    hill: HillOptions = field(default_factory=HillOptions)
    tol_lock: float = DEFAULT_TOL_LOCK

    def __post_init__(self):
        if not self.P_lo < self.P_hi:
            raise ParameterError(f"P bracket must satisfy P_lo < P_hi, got [{self.P_lo}, {self.P_hi}]")
        if self.P_lo < 0:
            raise ParameterError(f"P_lo must be >= 0, got {self.P_lo}")
        if int(self.coarse_steps) != self.coarse_steps or self.coarse_steps < 2:
            raise ParameterError(f"coarse_steps must be an integer >= 2, got {self.coarse_steps}")
        for name in ("re_threshold", "bisection_tol", "tol_lock"):
            if not getattr(self, name) > 0:
                raise ParameterError(f"{name} must be > 0, got {getattr(self, name)}")


@dataclass(frozen=True, eq=False)
class CriticalLoadResult:
    """Outcome of :func:`critical_load` for one ``(K_bar, lambda_bar)`` geometry.

    ``critical_exponents`` are purely imaginary exponents at the collision
    point, one per distinct folded fraction (plus its conjugate for
    quasi-periodic fractions). Locked fractions are snapped to exactly 0 or 1/2
    in these exponents; ``locked_fraction`` keeps the measured value.
    """

    K_bar: float
    lambda_bar: float
    P_bar_cr: float
    critical_exponents: tuple[FloquetExponent, ...]
    classification: PeriodicityClass
    degenerate: bool
    diagnostics: dict

    @property
    def P_cr_ratio(self) -> float:
        return self.P_bar_cr / FLAT_CRITICAL_LOAD

    @property
    def locked_fraction(self) -> float:
        return self.classification.locked_fraction

    @property
    def frequency(self) -> float:
        return 2 * math.pi / self.lambda_bar

    def mode(self, periods: float = 10.0, samples_per_period: int = 64) -> ModeShape:
        """Reconstruct the critical deflection over ``periods`` modulation wavelengths."""
        return reconstruct_mode(
            self.critical_exponents[0],
            self.frequency,
            (0.0, periods * self.lambda_bar),
            samples_per_period,
        )


def min_abs_real(K_bar: float, lambda_bar: float, P_bar: float, hill: HillOptions | None = None) -> float:
    """``min_j |Re s_j|`` over the Brillouin-zone exponents at load ``P_bar``."""
    series = winkler_system(WinklerParams(P_bar, K_bar, lambda_bar))
    return float(np.abs(zone_eigenvalues(series, hill).real).min())


def _fraction_clusters(fractions, tol=1e-6):
    out: list[float] = []
    for f in np.sort(fractions):
        if not out or f - out[-1] > tol:
            out.append(float(f))
    return out


def critical_load(K_bar: float, lambda_bar: float, opts: CriticalSearchOptions | None = None) -> CriticalLoadResult:
    """Critical load, critical exponents and lock-in class of one geometry.

    Raises
    ------
    SearchError
        If ``f`` never drops below the threshold inside the bracket, even after
        one refinement with four times as many coarse steps.
    """
    opts = opts or CriticalSearchOptions()
    WinklerParams(opts.P_lo, K_bar, lambda_bar)  # validates K_bar, lambda_bar
    thr = opts.re_threshold
    f = functools.partial(min_abs_real, K_bar, lambda_bar, hill=opts.hill)

    f_start = f(opts.P_lo)
    evaluations = 1
    if f_start <= thr:
        raise SearchError(
            f"already critical at the bracket start P_lo={opts.P_lo} (f={f_start:.3g})",
            f_lo=f_start,
        )
    steps = opts.coarse_steps
    bracket = None
    for _ in range(2):
        grid = np.linspace(opts.P_lo, opts.P_hi, steps + 1)
        prev = grid[0]
        for P in grid[1:]:
            fv = f(P)
            evaluations += 1
            if fv <= thr:
                bracket = (prev, P)
                break
            prev = P
        if bracket is not None:
            break
        f_end = fv
        steps *= 4
    if bracket is None:
        raise SearchError(
            f"no critical load in [{opts.P_lo}, {opts.P_hi}] for K_bar={K_bar}, "
            f"lambda_bar={lambda_bar}: f(P_lo)={f_start:.3g}, f(P_hi)={f_end:.3g}",
            f_lo=f_start,
            f_hi=f_end,
        )

    lo, hi = bracket
    iterations = 0
    while hi - lo > opts.bisection_tol * hi:
        mid = 0.5 * (lo + hi)
        if f(mid) <= thr:
            hi = mid
        else:
            lo = mid
        iterations += 1

    # The colliding pair sits symmetrically about its collision point just
    # below criticality, so its imaginary part is accurate there.
    series_lo = winkler_system(WinklerParams(lo, K_bar, lambda_bar))
    vals = zone_eigenvalues(series_lo, opts.hill)
    re = np.abs(vals.real)
    f_lo = float(re.min())
    near = vals[re <= 2 * f_lo + thr]
    omega = series_lo.frequency
    clusters = _fraction_clusters(np.atleast_1d(fold_fraction(near.imag, omega)))
    degenerate = len(clusters) > 1
    classes = [classify_fraction(c, opts.tol_lock) for c in clusters]
    classification = max(classes, key=lambda c: c.locked_fraction)

    series_cr = winkler_system(WinklerParams(hi, K_bar, lambda_bar))
    exps = []
    for c in sorted(classes, key=lambda c: -c.locked_fraction):
        if c.tag is Periodicity.PERIODIC:
            ims = [0.0]
        elif c.tag is Periodicity.PERIOD_DOUBLED:
            ims = [0.5 * omega]
        else:
            ims = [c.locked_fraction * omega, -c.locked_fraction * omega]
        for im in ims:
            s = 1j * im
            exps.append(FloquetExponent(s, harmonics_for(series_cr, s, opts.hill)))

    return CriticalLoadResult(
        K_bar=float(K_bar),
        lambda_bar=float(lambda_bar),
        P_bar_cr=float(hi),
        critical_exponents=tuple(exps),
        classification=classification,
        degenerate=degenerate,
        diagnostics={
            "M": opts.hill.truncation,
            "coarse_steps": steps,
            "coarse_evaluations": evaluations,
            "bisection_iterations": iterations,
            "bracket": [float(lo), float(hi)],
            "min_abs_re_below": f_lo,
        },
    )


def _winkler_cell(opts, K_bar, lambda_bar):
    r = critical_load(K_bar, lambda_bar, opts)
    return r.P_cr_ratio, r.locked_fraction, r.classification.tag.code


def tongue_map_winkler(lambda_grid, K_grid, opts: CriticalSearchOptions | None = None, workers: int = 1) -> TongueMap:
    """Critical-load ratio and lock-in fraction over a ``(lambda_bar, K_bar)`` grid.

    Channels are ``P_cr_ratio`` (``P_cr / 8 pi^2``), ``locked_fraction`` and
    ``classification`` (:attr:`Periodicity.code`). A failing cell is recorded
    in ``errors`` and left as NaN; the sweep never aborts.
    """
    opts = opts or CriticalSearchOptions()
    lam = check_grid(lambda_grid, "lambda_bar", lower=0.0, lower_open=True)
    K = check_grid(K_grid, "K_bar", lower=0.0, upper=1.0, upper_open=True)
    cells = [(k, l) for k in K for l in lam]
    results = evaluate_cells(functools.partial(_winkler_cell, opts), cells, workers)
    names = ("P_cr_ratio", "locked_fraction", "classification")
    channels = {n: np.full((K.size, lam.size), np.nan) for n in names}
    errors = {}
    for idx, (ok, value) in enumerate(results):
        iy, ix = divmod(idx, lam.size)
        if ok:
            for n, v in zip(names, value):
                channels[n][iy, ix] = v
        else:
            errors[(iy, ix)] = value
    meta = map_metadata(
        system="winkler",
        M=opts.hill.truncation,
        brillouin_tolerance=opts.hill.brillouin_tolerance,
        re_threshold=opts.re_threshold,
        bisection_tol=opts.bisection_tol,
        tol_lock=opts.tol_lock,
        P_bracket=[opts.P_lo, opts.P_hi],
        coarse_steps=opts.coarse_steps,
    )
    return TongueMap(lam, "lambda_bar", K, "K_bar", channels, meta, errors)
