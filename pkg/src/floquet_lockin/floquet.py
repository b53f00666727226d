"""Floquet exponents of linear periodic systems ``Y' = J(xi) Y``.

Two independent routes are provided:

* :func:`floquet_exponents` -- Hill's harmonic-balance method: the truncated
  block-Toeplitz Hill matrix is diagonalised and only the eigenvalues lying in
  the first Brillouin zone ``|Im s| < Omega/2 + tol`` are kept.
* :func:`monodromy_exponents` -- integrates the fundamental matrix over one
  period with fixed-step RK4 and takes ``log(mu) / T`` of its eigenvalues.

Everything here is a pure function of immutable inputs.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
import scipy.linalg

from .errors import NumericError, ParameterError, StructureError

__all__ = [
    "FourierMatrixSeries",
    "HillOptions",
    "FloquetExponent",
    "FloquetSpectrum",
    "Periodicity",
    "PeriodicityClass",
    "ModeShape",
    "HarmonicTruncationWarning",
    "fold_fraction",
    "fold_imag",
    "build_hill_matrix",
    "zone_eigenvalues",
    "floquet_exponents",
    "harmonics_for",
    "monodromy_exponents",
    "classify_fraction",
    "classify_spectrum",
    "reconstruct_mode",
    "DEFAULT_TOL_LOCK",
    "DEFAULT_MONODROMY_STEPS",
]

DEFAULT_TOL_LOCK = 1e-4
DEFAULT_MONODROMY_STEPS = 2**12


class HarmonicTruncationWarning(UserWarning):
    """Harmonics beyond ``2M`` cannot be represented in the truncated Hill matrix."""


def _readonly(a):
    a = np.array(a, dtype=complex, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class FourierMatrixSeries:
    """Periodic coefficient matrix ``J(xi) = sum_h J_h exp(i h Omega xi)``.

    Parameters
    ----------
    harmonics : mapping of int to (N, N) array_like
        Finitely supported Fourier coefficients. A zero ``J_0`` is inserted if
        absent.
    frequency : float
        Fundamental frequency ``Omega > 0``; the period is ``2 pi / Omega``.
    """

    harmonics: Mapping[int, np.ndarray]
    frequency: float

    def __post_init__(self):
        if not self.harmonics:
            raise StructureError("a Fourier series needs at least one harmonic")
        if not (np.isfinite(self.frequency) and self.frequency > 0):
            raise ParameterError(f"fundamental frequency must be > 0, got {self.frequency}")
        mats = {}
        shape = None
        for h, m in self.harmonics.items():
            if int(h) != h:
                raise StructureError(f"harmonic index {h!r} is not an integer")
            m = _readonly(m)
            if m.ndim != 2 or m.shape[0] != m.shape[1]:
                raise StructureError(f"harmonic {h} is not a square matrix: shape {m.shape}")
            if shape is None:
                shape = m.shape
            elif m.shape != shape:
                raise StructureError(
                    f"harmonic {h} has shape {m.shape}, expected {shape}"
                )
            mats[int(h)] = m
        if 0 not in mats:
            mats[0] = _readonly(np.zeros(shape))
        object.__setattr__(self, "harmonics", dict(sorted(mats.items())))
        object.__setattr__(self, "frequency", float(self.frequency))

    @property
    def order(self) -> int:
        return self.harmonics[0].shape[0]

    @property
    def period(self) -> float:
        return 2 * math.pi / self.frequency

    @property
    def max_harmonic(self) -> int:
        return max(abs(h) for h in self.harmonics)

    def matrix(self, h: int) -> np.ndarray:
        """``J_h``, or the zero matrix when ``h`` is not stored."""
        m = self.harmonics.get(h)
        if m is None:
            return np.zeros((self.order, self.order), dtype=complex)
        return m

    def is_real(self, tol: float = 1e-12) -> bool:
        """True when ``J_{-h} = conj(J_h)`` for every stored ``h``."""
        for h, m in self.harmonics.items():
            if np.max(np.abs(self.matrix(-h) - m.conj()), initial=0.0) > tol * max(
                1.0, np.max(np.abs(m))
            ):
                return False
        return True

    def evaluate(self, xi) -> np.ndarray:
        """Sample ``J`` at the points ``xi``; returns shape ``xi.shape + (N, N)``."""
        xi = np.asarray(xi, dtype=float)
        hs = np.array(list(self.harmonics))
        stack = np.stack(list(self.harmonics.values()))
        phase = np.exp(1j * self.frequency * np.multiply.outer(xi, hs))
        out = np.tensordot(phase, stack, axes=(-1, 0))
        if self.is_real():
            out = out.real
        return out


@dataclass(frozen=True)
class HillOptions:
    """Truncation settings for the Hill matrix.

    ``truncation`` is the number of retained harmonics ``M`` on each side. The
    Brillouin tolerance defaults to ``10**-M``.
    """

    truncation: int = 9
    brillouin_tolerance: float | None = None

    def __post_init__(self):
        if int(self.truncation) != self.truncation or not 1 <= self.truncation <= 64:
            raise ParameterError(f"truncation M must be an integer in [1, 64], got {self.truncation}")
        tol = self.brillouin_tolerance
        if tol is None:
            tol = 10.0 ** (-self.truncation)
        if not tol > 0:
            raise ParameterError(f"brillouin_tolerance must be > 0, got {tol}")
        object.__setattr__(self, "truncation", int(self.truncation))
        object.__setattr__(self, "brillouin_tolerance", float(tol))


@dataclass(frozen=True, eq=False)
class FloquetExponent:
    """One Floquet exponent with the harmonics ``r^h`` of its periodic factor.

    ``harmonics`` has shape ``(2M + 1, N)``; row ``h + M`` holds ``r^h``. It is
    ``None`` for exponents produced by the monodromy route.
    """

    value: complex
    harmonics: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "value", complex(self.value))
        if self.harmonics is not None:
            object.__setattr__(self, "harmonics", _readonly(self.harmonics))

    @property
    def truncation(self) -> int | None:
        if self.harmonics is None:
            return None
        return (self.harmonics.shape[0] - 1) // 2


def fold_fraction(imag, frequency):
    """Map ``Im(s) / Omega`` onto the folded interval ``[0, 1/2]``."""
    r = np.mod(np.asarray(imag, dtype=float) / frequency, 1.0)
    out = np.minimum(r, 1.0 - r)
    return float(out) if np.ndim(out) == 0 else out


def fold_imag(imag, frequency):
    """Shift imaginary parts into ``(-Omega/2, Omega/2]`` by multiples of ``Omega``."""
    half = 0.5 * frequency
    out = half - np.mod(half - np.asarray(imag, dtype=float), frequency)
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True, eq=False)
class FloquetSpectrum:
    """Floquet exponents retained in the first Brillouin zone.

    ``boundary_degenerate`` is set when an exponent sits on the zone boundary
    within tolerance; such exponents may appear together with their image
    ``s - i Omega`` so the count can exceed the system order by up to two.
    """

    exponents: tuple[FloquetExponent, ...]
    frequency: float
    truncation: int | None
    order: int
    boundary_degenerate: bool = False
    tolerance: float = 0.0

    def __len__(self):
        return len(self.exponents)

    def __iter__(self):
        return iter(self.exponents)

    @property
    def values(self) -> np.ndarray:
        return np.array([e.value for e in self.exponents], dtype=complex)

    @property
    def fractions(self) -> np.ndarray:
        return np.atleast_1d(fold_fraction(self.values.imag, self.frequency))

    @property
    def max_real(self) -> float:
        return float(self.values.real.max())

    @property
    def max_im_fraction(self) -> float:
        return float(self.fractions.max())

    def distinct(self, tol: float = 1e-8) -> tuple[FloquetExponent, ...]:
        """Exponents with zone-boundary duplicates (``s`` vs ``s - i Omega``) removed.

        Of each duplicate pair the member with positive imaginary part is kept.
        """
        kept: list[FloquetExponent] = []
        scale = max(1.0, self.frequency)
        for e in sorted(self.exponents, key=lambda e: -e.value.imag):
            s = e.value
            dup = False
            for k in kept:
                d = s - k.value
                if abs(d.real) <= tol * scale and abs(abs(d.imag) - self.frequency) <= tol * scale:
                    dup = True
                    break
            if not dup:
                kept.append(e)
        return tuple(kept)

    def restricted(self, exponents: Sequence[FloquetExponent]) -> "FloquetSpectrum":
        return FloquetSpectrum(
            tuple(exponents), self.frequency, self.truncation, self.order,
            self.boundary_degenerate, self.tolerance,
        )


class Periodicity(str, enum.Enum):
    PERIODIC = "periodic"
    PERIOD_DOUBLED = "period-doubled"
    QUASI_PERIODIC = "quasi-periodic"

    @property
    def code(self) -> int:
        """Integer code used in tongue-map classification channels."""
        return {"periodic": 0, "period-doubled": 1, "quasi-periodic": 2}[self.value]

    @classmethod
    def from_code(cls, code) -> "Periodicity":
        return [cls.PERIODIC, cls.PERIOD_DOUBLED, cls.QUASI_PERIODIC][int(code)]


@dataclass(frozen=True)
class PeriodicityClass:
    tag: Periodicity
    locked_fraction: float

    @property
    def locked(self) -> bool:
        return self.tag is not Periodicity.QUASI_PERIODIC


def classify_fraction(fraction: float, tol_lock: float = DEFAULT_TOL_LOCK) -> PeriodicityClass:
    """Three-way lock-in rule on a folded fraction in ``[0, 1/2]``."""
    if fraction <= tol_lock:
        tag = Periodicity.PERIODIC
    elif abs(fraction - 0.5) <= tol_lock:
        tag = Periodicity.PERIOD_DOUBLED
    else:
        tag = Periodicity.QUASI_PERIODIC
    return PeriodicityClass(tag, float(fraction))


def classify_spectrum(spectrum: FloquetSpectrum, tol_lock: float = DEFAULT_TOL_LOCK) -> PeriodicityClass:
    """Classify the response carried by the exponent(s) of largest real part.

    Exponents whose real part ties with the maximum (conjugate pairs, boundary
    images) are pooled and the largest folded fraction among them is used.
    """
    vals = spectrum.values
    re_max = vals.real.max()
    tie = 1e-9 * max(1.0, abs(re_max))
    lead = vals[vals.real >= re_max - tie]
    fraction = float(np.max(fold_fraction(lead.imag, spectrum.frequency)))
    return classify_fraction(fraction, tol_lock)


def build_hill_matrix(series: FourierMatrixSeries, opts: HillOptions | None = None) -> np.ndarray:
    """Truncated Hill matrix of size ``(2M + 1) N``.

    Block rows and columns are ordered by harmonic ``h = -M .. M``. Block
    ``(a, b)`` is ``J_{a-b}``; diagonal blocks additionally carry
    ``-i a Omega I``, so the first block row reads ``J_0 + i M Omega I``.
    """
    opts = opts or HillOptions()
    M = opts.truncation
    N = series.order
    too_high = [h for h in series.harmonics if abs(h) > 2 * M]
    if too_high:
        warnings.warn(
            f"harmonics {too_high} exceed 2M = {2 * M} and are ignored",
            HarmonicTruncationWarning,
            stacklevel=2,
        )
    size = (2 * M + 1) * N
    H = np.zeros((size, size), dtype=complex)
    for a in range(-M, M + 1):
        ra = (a + M) * N
        for b in range(-M, M + 1):
            J = series.harmonics.get(a - b)
            if J is not None:
                cb = (b + M) * N
                H[ra:ra + N, cb:cb + N] = J
        H[ra:ra + N, ra:ra + N] -= 1j * a * series.frequency * np.eye(N)
    return H


def _eig(H, series, opts, vectors):
    try:
        if vectors:
            return scipy.linalg.eig(H, check_finite=True)
        return scipy.linalg.eigvals(H, check_finite=True), None
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericError(
            f"eigensolver failed on Hill matrix of size {H.shape[0]} "
            f"(N={series.order}, M={opts.truncation}, Omega={series.frequency}): {exc}"
        ) from exc


def _zone_mask(vals, frequency, tol):
    return np.abs(vals.imag) < 0.5 * frequency + tol


def zone_eigenvalues(series: FourierMatrixSeries, opts: HillOptions | None = None) -> np.ndarray:
    """Brillouin-filtered Hill eigenvalues without eigenvectors (fast path)."""
    opts = opts or HillOptions()
    vals, _ = _eig(build_hill_matrix(series, opts), series, opts, vectors=False)
    vals = vals[_zone_mask(vals, series.frequency, opts.brillouin_tolerance)]
    if vals.size == 0:
        raise NumericError(
            f"no Hill eigenvalue inside the first Brillouin zone (M={opts.truncation}); "
            "increase the truncation"
        )
    return vals


def _normalise(v):
    v = v / np.linalg.norm(v)
    mag = np.abs(v)
    first = np.flatnonzero(mag > 1e-8 * mag.max())[0]
    v = v * (np.conj(v[first]) / mag[first])
    v[first] = v[first].real  # drop the rounding residue of the phase rotation
    return v


def _order(vals):
    return np.lexsort((-vals.imag, -vals.real))


def floquet_exponents(series: FourierMatrixSeries, opts: HillOptions | None = None) -> FloquetSpectrum:
    """Floquet exponents by Hill's method, restricted to the first Brillouin zone.

    Eigenvectors are normalised to unit Euclidean norm with their first
    significant entry real and positive, then reshaped to harmonics
    ``(2M + 1, N)``. Exponents are sorted by decreasing real, then imaginary,
    part.

    Raises
    ------
    NumericError
        If the eigensolver fails or no eigenvalue survives the zone filter.
    """
    opts = opts or HillOptions()
    M, N, om = opts.truncation, series.order, series.frequency
    H = build_hill_matrix(series, opts)
    vals, vecs = _eig(H, series, opts, vectors=True)
    keep = np.flatnonzero(_zone_mask(vals, om, opts.brillouin_tolerance))
    if keep.size == 0:
        raise NumericError(
            f"no Hill eigenvalue inside the first Brillouin zone (M={M}, size {H.shape[0]}); "
            "increase the truncation"
        )
    vals, vecs = vals[keep], vecs[:, keep]
    idx = _order(vals)
    exps = tuple(
        FloquetExponent(vals[i], _normalise(vecs[:, i]).reshape(2 * M + 1, N)) for i in idx
    )
    tol = opts.brillouin_tolerance
    on_edge = np.abs(np.abs(vals.imag) - 0.5 * om) <= max(tol, 1e-12 * om)
    degenerate = bool(len(exps) > N or on_edge.any())
    return FloquetSpectrum(exps, om, M, N, degenerate, tol)


def harmonics_for(series: FourierMatrixSeries, s: complex, opts: HillOptions | None = None) -> np.ndarray:
    """Harmonics of the (near-)null vector of ``H - s I``, shape ``(2M + 1, N)``.

    Used when ``s`` is known exactly (for instance a purely imaginary critical
    exponent) and only the periodic factor is wanted.
    """
    opts = opts or HillOptions()
    H = build_hill_matrix(series, opts)
    H[np.diag_indices_from(H)] -= s
    try:
        _, _, vh = np.linalg.svd(H)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"SVD failed for Hill matrix of size {H.shape[0]}: {exc}") from exc
    v = _normalise(vh[-1].conj())
    return v.reshape(2 * opts.truncation + 1, series.order)


def monodromy_exponents(series: FourierMatrixSeries, integrator_steps: int = DEFAULT_MONODROMY_STEPS) -> FloquetSpectrum:
    """Floquet exponents from the monodromy matrix (independent oracle).

    The fundamental matrix is integrated over one period from the identity with
    classical RK4 using ``integrator_steps`` equal steps. Exponents are
    ``log(mu) / T`` with imaginary parts folded into ``(-Omega/2, Omega/2]``.
    """
    if integrator_steps < 100:
        raise ParameterError(f"integrator_steps must be >= 100, got {integrator_steps}")
    n = int(integrator_steps)
    T = series.period
    dt = T / n
    # J at every full and half step, index 2k <-> k*dt
    Js = series.evaluate(np.arange(2 * n + 1) * (0.5 * dt))
    Y = np.eye(series.order, dtype=Js.dtype)
    for k in range(n):
        J0, Jm, J1 = Js[2 * k], Js[2 * k + 1], Js[2 * k + 2]
        k1 = J0 @ Y
        k2 = Jm @ (Y + 0.5 * dt * k1)
        k3 = Jm @ (Y + 0.5 * dt * k2)
        k4 = J1 @ (Y + dt * k3)
        Y = Y + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    if not np.all(np.isfinite(Y)):
        raise NumericError("monodromy integration overflowed")
    mu = np.linalg.eigvals(Y).astype(complex)
    if np.any(np.abs(mu) == 0):
        raise NumericError("singular monodromy matrix: a Floquet multiplier is zero")
    s = np.log(mu) / T
    s = s.real + 1j * fold_imag(s.imag, series.frequency)
    s = np.atleast_1d(s)
    exps = tuple(FloquetExponent(s[i]) for i in _order(s))
    return FloquetSpectrum(exps, series.frequency, None, series.order)


@dataclass(frozen=True, eq=False)
class ModeShape:
    """Uniform samples of one Floquet form ``sum_h r^h exp((i h Omega + s) xi)``."""

    xi: np.ndarray
    values: np.ndarray
    exponent: complex
    domain: tuple[float, float]
    samples_per_period: int
    component: int = 0

    @property
    def real(self) -> np.ndarray:
        return self.values.real

    @property
    def spacing(self) -> float:
        return float(self.xi[1] - self.xi[0])


def reconstruct_mode(
    exponent: FloquetExponent,
    frequency: float,
    domain: tuple[float, float],
    samples_per_period: int = 64,
    component: int = 0,
    growth_limit: float = 300.0,
) -> ModeShape:
    """Evaluate a Floquet form on a uniform grid.

    The grid starts at ``domain[0]`` with spacing ``T / samples_per_period`` and
    stops at the last node not beyond ``domain[1]``.

    Raises
    ------
    NumericError
        If ``|Re s| * max|xi|`` exceeds ``growth_limit`` (the exponential factor
        would overflow or swamp the periodic part).
    """
    if exponent.harmonics is None:
        raise ParameterError("exponent carries no harmonics; use a Hill spectrum")
    if samples_per_period < 8:
        raise ParameterError(f"samples_per_period must be >= 8, got {samples_per_period}")
    a, b = float(domain[0]), float(domain[1])
    T = 2 * math.pi / frequency
    if b - a < T * (1 - 1e-12):
        raise ParameterError(f"domain length {b - a} is shorter than one period {T}")
    s = exponent.value
    if abs(s.real) * max(abs(a), abs(b)) > growth_limit:
        raise NumericError(
            f"Re(s) = {s.real:.3g} grows by exp({abs(s.real) * max(abs(a), abs(b)):.3g}) over "
            "the domain; shorten the domain or normalise the exponent"
        )
    dx = T / samples_per_period
    count = int(math.floor((b - a) / dx + 1e-9)) + 1
    xi = a + dx * np.arange(count)
    M = exponent.truncation
    h = np.arange(-M, M + 1)
    r = exponent.harmonics[:, component]
    values = (np.exp(1j * frequency * np.multiply.outer(xi, h)) @ r) * np.exp(s * xi)
    xi.setflags(write=False)
    values.setflags(write=False)
    return ModeShape(xi, values, s, (a, b), int(samples_per_period), component)
