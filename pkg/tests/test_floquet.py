import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from floquet_lockin import (
    FloquetExponent,
    FourierMatrixSeries,
    HillOptions,
    NumericError,
    ParameterError,
    PendulumParams,
    Periodicity,
    StructureError,
    WinklerParams,
    build_hill_matrix,
    classify_spectrum,
    floquet_exponents,
    monodromy_exponents,
    pendulum_system,
    reconstruct_mode,
    winkler_system,
)
from floquet_lockin.floquet import (
    FloquetSpectrum,
    HarmonicTruncationWarning,
    classify_fraction,
    fold_fraction,
    fold_imag,
)


def hill_by_kron(series, M):
    """Independent constructor: sum of shift matrices kron J_h, minus the diagonal frequency term."""
    N = series.order
    H = np.zeros(((2 * M + 1) * N,) * 2, dtype=complex)
    for h, J in series.harmonics.items():
        H += np.kron(np.eye(2 * M + 1, k=-h), J)
    H -= np.kron(np.diag(1j * series.frequency * np.arange(-M, M + 1)), np.eye(N))
    return H


def matched_distance(a, b):
    """Max distance after greedy nearest matching of two equally sized sets."""
    a, b = list(np.asarray(a)), list(np.asarray(b))
    assert len(a) == len(b)
    worst = 0.0
    for x in a:
        j = int(np.argmin([abs(x - y) for y in b]))
        worst = max(worst, abs(x - b.pop(j)))
    return worst


def folded(vals, omega):
    vals = np.asarray(vals)
    return vals.real + 1j * fold_imag(vals.imag, omega)


# --- FourierMatrixSeries --------------------------------------------------------


def test_series_inserts_zero_J0():
    s = FourierMatrixSeries({1: np.eye(2), -1: np.eye(2)}, 1.0)
    assert np.array_equal(s.matrix(0), np.zeros((2, 2)))
    assert s.order == 2
    assert s.max_harmonic == 1


def test_series_rejects_mismatched_shapes():
    with pytest.raises(StructureError):
        FourierMatrixSeries({0: np.eye(2), 1: np.eye(3)}, 1.0)


def test_series_rejects_nonsquare_and_bad_frequency():
    with pytest.raises(StructureError):
        FourierMatrixSeries({0: np.ones((2, 3))}, 1.0)
    with pytest.raises(ParameterError):
        FourierMatrixSeries({0: np.eye(2)}, 0.0)


def test_series_is_immutable():
    s = FourierMatrixSeries({0: np.eye(2)}, 1.0)
    with pytest.raises(ValueError):
        s.matrix(0)[0, 0] = 5.0


def test_series_evaluate_matches_cosine():
    p = PendulumParams(0.3, 2.0, 0.1)
    s = pendulum_system(p)
    xi = np.linspace(0, 3, 7)
    J = s.evaluate(xi)
    assert J.shape == (7, 2, 2)
    np.testing.assert_allclose(J[:, 1, 0], -(1 + 0.3 * np.cos(2.0 * xi)), atol=1e-14)


def test_real_systems_are_conjugate_symmetric():
    assert pendulum_system(PendulumParams(0.4, 1.3, 0.01)).is_real()
    assert winkler_system(WinklerParams(50.0, 0.3, 0.7)).is_real()
    assert not FourierMatrixSeries({0: np.eye(1), 1: np.eye(1)}, 1.0).is_real()


def test_hill_options_validation():
    assert HillOptions(5).brillouin_tolerance == pytest.approx(1e-5)
    for bad in (0, 65, 2.5):
        with pytest.raises(ParameterError):
            HillOptions(bad)
    with pytest.raises(ParameterError):
        HillOptions(5, 0.0)


# --- Hill matrix ---------------------------------------------------------------


def test_hill_pendulum_M1_layout():
    p = PendulumParams(0.6, 2.0, 0.05)
    s = pendulum_system(p)
    H = build_hill_matrix(s, HillOptions(1))
    J0, J1 = s.matrix(0), s.matrix(1)
    I = np.eye(2)
    assert H.shape == (6, 6)
    # centre block is J0, corner blocks (h = +-2) vanish
    np.testing.assert_array_equal(H[2:4, 2:4], J0)
    np.testing.assert_array_equal(H[0:2, 4:6], 0)
    np.testing.assert_array_equal(H[4:6, 0:2], 0)
    # first block row carries +i M Omega, last -i M Omega
    np.testing.assert_array_equal(H[0:2, 0:2], J0 + 1j * 2.0 * I)
    np.testing.assert_array_equal(H[4:6, 4:6], J0 - 1j * 2.0 * I)
    np.testing.assert_array_equal(H[0:2, 2:4], J1)
    np.testing.assert_array_equal(H[2:4, 0:2], J1)


def test_hill_constant_system_shifts_eigenvalues():
    A = np.array([[0.0, 1.0], [-2.0, -0.3]])
    s = FourierMatrixSeries({0: A}, 1.7)
    M = 3
    H = build_hill_matrix(s, HillOptions(M))
    assert np.count_nonzero(H - np.diag(np.diag(H)) - np.kron(np.eye(2 * M + 1), A - np.diag(np.diag(A)))) == 0
    base = np.linalg.eigvals(A)
    expected = np.concatenate([base - 1j * a * 1.7 for a in range(-M, M + 1)])
    assert matched_distance(np.linalg.eigvals(H), expected) < 1e-12


def test_hill_random_N3_matches_kron_oracle():
    rng = np.random.default_rng(3)
    J0 = rng.normal(size=(3, 3))
    J1 = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    s = FourierMatrixSeries({0: J0, 1: J1, -1: J1.conj()}, 1.3)
    H = build_hill_matrix(s, HillOptions(2))
    assert H.shape == (15, 15)
    np.testing.assert_array_equal(H, hill_by_kron(s, 2))


@given(
    M=st.integers(1, 5),
    N=st.integers(1, 4),
    hmax=st.integers(0, 3),
    omega=st.floats(0.1, 10),
    seed=st.integers(0, 2**32 - 1),
)
def test_hill_matches_kron_oracle_property(M, N, hmax, omega, seed):
    rng = np.random.default_rng(seed)
    harm = {h: rng.normal(size=(N, N)) + 1j * rng.normal(size=(N, N)) for h in range(-hmax, hmax + 1)}
    s = FourierMatrixSeries(harm, omega)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", HarmonicTruncationWarning)
        H = build_hill_matrix(s, HillOptions(M))
    np.testing.assert_allclose(H, hill_by_kron(s, M), atol=0, rtol=0)


def test_hill_warns_on_harmonics_beyond_2M():
    s = FourierMatrixSeries({0: np.eye(1), 3: np.eye(1), -3: np.eye(1)}, 1.0)
    with pytest.warns(HarmonicTruncationWarning):
        build_hill_matrix(s, HillOptions(1))


# --- Floquet exponents ---------------------------------------------------------


def test_undamped_oscillator_exponents():
    spec = floquet_exponents(pendulum_system(PendulumParams(0.0, 3.0, 0.0)))
    assert len(spec) == 2
    assert matched_distance(spec.values, [1j, -1j]) < 1e-12
    assert not spec.boundary_degenerate


def test_quasi_periodic_point_is_underdamped():
    spec = floquet_exponents(pendulum_system(PendulumParams(0.1, 1.0 / 0.8, 0.001)))
    assert classify_spectrum(spec).tag is Periodicity.QUASI_PERIODIC
    assert spec.max_real == pytest.approx(-0.0005, abs=1e-6)


def test_exponent_harmonics_are_normalised():
    spec = floquet_exponents(pendulum_system(PendulumParams(0.5, 1.7, 0.0)), HillOptions(6))
    for e in spec:
        assert e.harmonics.shape == (13, 2)
        assert e.truncation == 6
        v = e.harmonics.ravel()
        assert np.linalg.norm(v) == pytest.approx(1.0, abs=1e-12)
        first = v[np.flatnonzero(np.abs(v) > 1e-8 * np.abs(v).max())[0]]
        assert first.imag == 0 and first.real > 0


def test_exponent_eigen_residual():
    s = pendulum_system(PendulumParams(0.5, 1.7, 0.01))
    opts = HillOptions(7)
    H = build_hill_matrix(s, opts)
    for e in floquet_exponents(s, opts):
        v = e.harmonics.ravel()
        assert np.linalg.norm(H @ v - e.value * v) < 1e-10


def test_spectrum_sorted_by_real_then_imag():
    spec = floquet_exponents(pendulum_system(PendulumParams(0.3, 1.1, 0.02)))
    v = spec.values
    keys = list(zip(-v.real, -v.imag))
    assert keys == sorted(keys)


@given(
    A=st.floats(0, 1),
    Omega=st.floats(0.5, 4),
    C=st.floats(0, 0.01),
)
def test_brillouin_count_and_conjugacy(A, Omega, C):
    spec = floquet_exponents(pendulum_system(PendulumParams(A, Omega, C)))
    vals = spec.values
    assert np.all(np.abs(vals.imag) < Omega / 2 + spec.tolerance)
    if spec.boundary_degenerate:
        assert 2 <= len(spec) <= 4
    else:
        assert len(spec) == 2
    # conjugate closure, allowing the zone-edge image s - i Omega
    for s in vals:
        if abs(s.imag) > 1e-8:
            gaps = [min(abs(np.conj(s) - t), abs(np.conj(s) - t - 1j * Omega), abs(np.conj(s) - t + 1j * Omega)) for t in vals]
            assert min(gaps) < 1e-8


def test_boundary_degenerate_point_is_flagged_and_deduplicated():
    # principal resonance of the undamped oscillator: exponents at Im = Omega/2
    spec = floquet_exponents(pendulum_system(PendulumParams(0.2, 2.0, 0.0)))
    assert spec.boundary_degenerate
    d = spec.distinct()
    assert len(d) == 2
    assert all(abs(abs(e.value.imag) - 1.0) < 1e-8 for e in d)
    assert classify_spectrum(spec).tag is Periodicity.PERIOD_DOUBLED


def test_winkler_spectrum_is_symmetric_under_negation():
    spec = floquet_exponents(winkler_system(WinklerParams(60.0, 0.3, 0.8)))
    vals = spec.values
    om = spec.frequency
    neg = folded(-vals, om)
    assert matched_distance(folded(vals, om), neg) < 1e-8


@pytest.mark.parametrize("A,Omega", [(0.3, 1.3), (0.8, 2.5), (0.05, 0.7)])
def test_truncation_convergence(A, Omega):
    s = pendulum_system(PendulumParams(A, Omega, 0.001))
    v7 = floquet_exponents(s, HillOptions(7)).distinct()
    v9 = floquet_exponents(s, HillOptions(9)).distinct()
    a = folded([e.value for e in v7], Omega)
    b = folded([e.value for e in v9], Omega)
    assert matched_distance(a, b) < 1e-8


def test_empty_zone_raises():
    # a frequency so large that every Hill eigenvalue falls outside the zone
    s = FourierMatrixSeries({0: np.array([[1e6j]])}, 1.0)
    with pytest.raises(NumericError, match="increase the truncation"):
        floquet_exponents(s, HillOptions(2))


# --- Monodromy oracle ----------------------------------------------------------


def test_monodromy_constant_diagonal():
    s = FourierMatrixSeries({0: np.diag([-1.0, -2.0])}, 1.0)
    spec = monodromy_exponents(s, 10_000)
    assert matched_distance(spec.values, [-1, -2]) < 1e-8
    assert spec.exponents[0].harmonics is None


def test_monodromy_damped_oscillator():
    spec = monodromy_exponents(pendulum_system(PendulumParams(0.0, 3.0, 0.2)))
    w = math.sqrt(1 - 0.01)
    assert matched_distance(spec.values, [-0.1 + 1j * w, -0.1 - 1j * w]) < 1e-8


def test_monodromy_principal_resonance_unstable():
    spec = monodromy_exponents(pendulum_system(PendulumParams(0.2, 2.0, 0.0)))
    assert spec.max_real > 0


def test_monodromy_flat_winkler_at_classical_load():
    lam = 0.7
    spec = monodromy_exponents(winkler_system(WinklerParams(8 * math.pi**2, 0.0, lam)))
    om = 2 * math.pi / lam
    assert np.all(np.abs(spec.values.real) < 1e-6)
    target = fold_imag(2 * math.pi, om)
    assert np.min(np.abs(np.abs(spec.values.imag) - abs(target))) < 1e-6


def test_monodromy_rejects_few_steps():
    with pytest.raises(ParameterError):
        monodromy_exponents(pendulum_system(PendulumParams(0, 1, 0)), 50)


@given(A=st.floats(0, 1), Omega=st.floats(0.5, 4), C=st.floats(0, 0.01))
def test_hill_matches_monodromy(A, Omega, C):
    s = pendulum_system(PendulumParams(A, Omega, C))
    hill = floquet_exponents(s).distinct()
    mono = monodromy_exponents(s)
    a = folded([e.value for e in hill], Omega)
    b = mono.values
    # zone-edge values may fold to either side
    d = max(
        min(abs(x - y), abs(x - y - 1j * Omega), abs(x - y + 1j * Omega)) for x in a for y in [b[np.argmin(np.abs(b - x))]]
    )
    assert d < 1e-6


def test_hill_matches_monodromy_winkler():
    rng = np.random.default_rng(11)
    for _ in range(4):
        w = WinklerParams(rng.uniform(0, 80), rng.uniform(0, 0.5), rng.uniform(0.4, 1.6))
        s = winkler_system(w)
        hill = np.array([e.value for e in floquet_exponents(s).distinct()])
        mono = monodromy_exponents(s).values
        om = s.frequency
        assert len(hill) == 4
        # compare multipliers, which are insensitive to the folding branch
        mu_h = np.exp(hill * s.period)
        mu_m = np.exp(mono * s.period)
        scale = np.abs(mu_m).max()
        assert matched_distance(mu_h, mu_m) / scale < 1e-6, (w, om)


# --- classification ------------------------------------------------------------


@pytest.mark.parametrize(
    "fraction,tag",
    [(0.0, Periodicity.PERIODIC), (0.5, Periodicity.PERIOD_DOUBLED), (0.43, Periodicity.QUASI_PERIODIC)],
)
def test_classify_fraction_examples(fraction, tag):
    c = classify_fraction(fraction)
    assert c.tag is tag
    assert c.locked_fraction == fraction
    assert c.locked == (tag is not Periodicity.QUASI_PERIODIC)


@given(st.floats(0, 0.5), st.floats(1e-8, 0.1))
def test_classify_fraction_rule(fraction, tol):
    c = classify_fraction(fraction, tol)
    assert (c.tag is Periodicity.PERIODIC) == (fraction <= tol)
    if fraction > tol:
        assert (c.tag is Periodicity.PERIOD_DOUBLED) == (abs(fraction - 0.5) <= tol)


@given(st.floats(-1e3, 1e3), st.floats(0.1, 20))
def test_fold_fraction_range_and_periodicity(im, omega):
    f = fold_fraction(im, omega)
    assert 0 <= f <= 0.5
    assert fold_fraction(-im, omega) == pytest.approx(f, abs=1e-9)
    assert fold_fraction(im + omega, omega) == pytest.approx(f, abs=1e-9)


@given(st.floats(-1e3, 1e3), st.floats(0.1, 20))
def test_fold_imag_into_zone(im, omega):
    g = fold_imag(im, omega)
    assert -omega / 2 - 1e-9 < g <= omega / 2 + 1e-9
    k = (im - g) / omega
    assert k == pytest.approx(round(k), abs=1e-6)


def test_periodicity_codes_roundtrip():
    for p in Periodicity:
        assert Periodicity.from_code(p.code) is p


def test_classify_spectrum_uses_leading_exponents():
    om = 2.0
    spec = FloquetSpectrum(
        (FloquetExponent(0.1 + 1j), FloquetExponent(0.1 - 1j), FloquetExponent(-0.3 + 0.4j)), om, None, 3
    )
    assert classify_spectrum(spec).tag is Periodicity.PERIOD_DOUBLED


# --- mode reconstruction -------------------------------------------------------


def test_reconstruct_single_harmonic():
    r = np.zeros((3, 1), dtype=complex)
    r[1, 0] = 1.0
    e = FloquetExponent(2j * math.pi, r)
    m = reconstruct_mode(e, 5.0, (0.0, 4.0), 32)
    np.testing.assert_allclose(m.values, np.exp(2j * math.pi * m.xi), atol=1e-12)
    np.testing.assert_allclose(m.real, np.cos(2 * math.pi * m.xi), atol=1e-12)
    assert np.allclose(np.diff(m.xi), m.spacing)


def test_reconstruct_guards():
    r = np.ones((3, 1))
    with pytest.raises(ParameterError):
        reconstruct_mode(FloquetExponent(0j, r), 1.0, (0, 1.0))  # shorter than a period
    with pytest.raises(ParameterError):
        reconstruct_mode(FloquetExponent(0j, r), 1.0, (0, 10.0), samples_per_period=4)
    with pytest.raises(ParameterError):
        reconstruct_mode(FloquetExponent(0j), 1.0, (0, 10.0))
    with pytest.raises(NumericError, match="normalise"):
        reconstruct_mode(FloquetExponent(1.0 + 0j, r), 1.0, (0, 1000.0))


def test_bounded_mode_for_imaginary_exponent():
    spec = floquet_exponents(pendulum_system(PendulumParams(0.1, 1.25, 0.0)))
    e = spec.exponents[0]
    assert abs(e.value.real) < 1e-10
    m = reconstruct_mode(e, 1.25, (0, 2000.0), 16)
    bound = np.abs(e.harmonics[:, 0]).sum()
    assert np.abs(m.values).max() <= bound * (1 + 1e-6)
