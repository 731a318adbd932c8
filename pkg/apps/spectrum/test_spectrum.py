import math

import mpmath
import numpy as np
import pytest

from apps.spectrum.enums import MomentFamily, SpectrumSource, StateClass
from apps.spectrum.exceptions import (
    BadAspectException,
    DegenerateSpectrumException,
    DimensionMismatchException,
    DivergentSeriesException,
    InvalidParamsException,
    TooFewModesException,
    ZeroStateException,
)
from apps.spectrum.services import (
    BoundService,
    GeneratorCalculus,
    ObservableService,
    SpectrumService,
)
from apps.spectrum.streams import derive_stream, derive_streams
from apps.spectrum.types import ConePoint
from conftest import unit


# ── espectro ──

def test_torus_spectrum_default_instance(torus_spectrum):
    np.testing.assert_allclose(torus_spectrum.mu, [1.0, 1 / 0.49, 1 + 1 / 0.49, 4.0], rtol=1e-15)
    assert torus_spectrum.mu[0] == 1.0
    assert torus_spectrum.N == 8
    assert torus_spectrum.source is SpectrumSource.TORUS
    assert torus_spectrum.torus.wavevectors == ((0, 1), (1, 0), (1, 1), (0, 2))
    np.testing.assert_array_equal(torus_spectrum.lam[::2], torus_spectrum.lam[1::2])


def test_torus_spectrum_sorts_wavevectors():
    s = SpectrumService.build_torus_spectrum(0.7, [(2, 0), (0, 2), (1, 0), (0, 1)])
    np.testing.assert_allclose(s.mu, [1.0, 2.0408163265306123, 4.0, 8.163265306122449], rtol=1e-14)
    assert s.torus.wavevectors == ((0, 1), (1, 0), (0, 2), (2, 0))


def test_torus_spectrum_rejects_ties():
    with pytest.raises(DegenerateSpectrumException):
        SpectrumService.build_torus_spectrum(1.0, [(0, 1), (1, 0), (1, 1), (0, 2)])


@pytest.mark.parametrize("aspect", [0.0, -0.3, 1.2, float("nan")])
def test_torus_spectrum_rejects_aspect(aspect):
    with pytest.raises(BadAspectException):
        SpectrumService.build_torus_spectrum(aspect, [(0, 1), (1, 0), (1, 1), (0, 2)])


def test_torus_spectrum_rejects_zero_and_repeated_wavevectors():
    with pytest.raises(DegenerateSpectrumException):
        SpectrumService.build_torus_spectrum(0.7, [(0, 0), (1, 0), (1, 1), (0, 2)])
    with pytest.raises(DegenerateSpectrumException):
        SpectrumService.build_torus_spectrum(0.7, [(0, 1), (0, 1), (1, 1), (0, 2)])


def test_torus_spectrum_needs_four_pairs():
    with pytest.raises(TooFewModesException):
        SpectrumService.build_torus_spectrum(0.7, [(0, 1), (1, 0), (1, 1)])


def test_random_torus_spectra_keep_the_ladder():
    gen = derive_stream(99, 0)
    built = 0
    for _ in range(200):
        aspect = float(gen.uniform(0.2, 1.0))
        ks = [tuple(int(c) for c in gen.integers(-3, 4, size=2)) for _ in range(5)]
        try:
            s = SpectrumService.build_torus_spectrum(aspect, ks)
        except DegenerateSpectrumException:
            continue
        built += 1
        assert s.mu[0] == 1.0
        assert np.all(np.diff(s.mu) > 0)
    assert built > 0


def test_explicit_spectrum(explicit_spectrum):
    assert explicit_spectrum.source is SpectrumSource.EXPLICIT
    assert explicit_spectrum.torus is None
    assert explicit_spectrum.n == 5
    with pytest.raises(DegenerateSpectrumException):
        SpectrumService.explicit_spectrum([1.0, 2.0, 2.0, 3.0])
    with pytest.raises(DegenerateSpectrumException):
        SpectrumService.explicit_spectrum([1.5, 2.0, 3.0, 4.0])


def test_spectrum_arrays_are_read_only(torus_spectrum):
    with pytest.raises(ValueError):
        torus_spectrum.mu[0] = 3.0


# ── parámetros ──

@pytest.mark.parametrize(
    "a, delta, kappa, eps, fragment",
    [
        (0.0, [0.0] * 4, 0.5, 0.5, "a must be"),
        (1.0, [0.1, 0.0, 0.0, 0.0], 0.5, 0.5, "delta must lie in (-1, 0]"),
        (1.0, [-1.0, 0.0, 0.0, 0.0], 0.5, 0.5, "delta must lie in (-1, 0]"),
        (1.0, [0.0] * 3, 0.5, 0.5, "one value per eigenvalue pair"),
        (1.0, [0.0] * 4, 0.0, 0.5, "kappa must lie in (0, 1]"),
        (1.0, [0.0] * 4, 0.5, 0.0, "eps must be > 0"),
    ],
)
def test_params_validation(torus_spectrum, a, delta, kappa, eps, fragment):
    with pytest.raises(InvalidParamsException) as exc:
        SpectrumService.make_params(a, delta, kappa, eps, torus_spectrum)
    assert fragment in str(exc.value.mensaje)


def test_params_expand_pairwise(hetero_params):
    np.testing.assert_array_equal(
        hetero_params.delta_modes, [0.0, 0.0, -0.3, -0.3, -0.5, -0.5, -0.7, -0.7]
    )
    np.testing.assert_allclose(hetero_params.mode_variances[2:4], [0.35, 0.35])
    assert hetero_params.with_updates(eps=0.1).eps == 0.1


# ── observables ──

def test_observables_examples(torus_spectrum):
    N = torus_spectrum.N
    obs = ObservableService.compute_observables(unit(N, 0), torus_spectrum)
    assert (obs.u, obs.v, obs.t_obs) == (1.0, 1.0, 1.0)
    obs = ObservableService.compute_observables(unit(N, N - 1), torus_spectrum)
    assert (obs.u, obs.v, obs.t_obs) == (1.0, 0.25, 4.0)
    obs = ObservableService.compute_observables(unit(N, 0, N - 1), torus_spectrum)
    assert (obs.u, obs.v, obs.t_obs) == (2.0, 1.25, 5.0)


def test_observables_dimension_mismatch(torus_spectrum):
    with pytest.raises(DimensionMismatchException):
        ObservableService.compute_observables(np.ones(5), torus_spectrum)


def test_observables_invariant_chain(torus_spectrum, random_states):
    lam_max = torus_spectrum.lam_max
    for x in random_states:
        obs = ObservableService.compute_observables(x, torus_spectrum)
        assert obs.v <= obs.u <= lam_max * obs.v
        assert obs.u <= obs.t_obs <= lam_max * obs.u
    u, v, t = ObservableService.observables_batch(random_states, torus_spectrum)
    obs = ObservableService.compute_observables(random_states[3], torus_spectrum)
    assert u[3] == pytest.approx(obs.u, rel=1e-14)
    assert v[3] == pytest.approx(obs.v, rel=1e-14)
    assert t[3] == pytest.approx(obs.t_obs, rel=1e-14)


def test_cone_point_membership():
    assert ConePoint(3.0, 3.0).in_cone(4.0)
    assert not ConePoint(3.0, 3.0).is_interior(4.0)
    assert ConePoint(2.0, 1.0).is_interior(4.0)
    assert not ConePoint(5.0, 1.0).in_cone(4.0)
    assert not ConePoint(0.5, 1.0).in_cone(4.0)
    assert ConePoint(2.0, 1.0).scaled(2.0) == ConePoint(4.0, 2.0)


# ── clasificación ──

def test_classify_singular_ray_is_untamed(torus_spectrum):
    x = unit(torus_spectrum.N, 0)
    assert ObservableService.classify_state(x, torus_spectrum, 0.5, 10.0, 1e-6) is StateClass.UNTAMED


def test_classify_ratio_threshold(torus_spectrum):
    x = unit(torus_spectrum.N, 0, torus_spectrum.N - 1)
    assert ObservableService.classify_state(x, torus_spectrum, 0.5, 10.0, 0.4) is StateClass.GOOD
    assert ObservableService.classify_state(x, torus_spectrum, 0.5, 10.0, 0.5) is StateClass.UNTAMED
    assert ObservableService.classify_state(x, torus_spectrum, 2.5, 10.0, 0.4) is StateClass.UNTAMED


def test_classify_zero_state(torus_spectrum):
    with pytest.raises(ZeroStateException):
        ObservableService.classify_state(np.zeros(torus_spectrum.N), torus_spectrum, 0.5, 10.0, 0.1)


def test_good_mask_matches_classify(torus_spectrum, random_states):
    u, v, _ = ObservableService.observables_batch(random_states, torus_spectrum)
    mask = ObservableService.good_mask(u, v, torus_spectrum, 1.0, 20.0, 0.1)
    for x, flag in zip(random_states, mask):
        expected = ObservableService.classify_state(x, torus_spectrum, 1.0, 20.0, 0.1) is StateClass.GOOD
        assert bool(flag) == expected


# ── presupuestos y cotas ──

def test_forcing_budgets(budgets, torus_spectrum, hetero_params):
    assert budgets.b0 == 8.0
    assert budgets.b0_prime == 1.0
    assert budgets.b1 == pytest.approx(2 * (1 + 1 / 0.49 + 1 + 1 / 0.49 + 4), rel=1e-14)
    assert budgets.b1 == pytest.approx(20.1632653, rel=1e-8)
    assert budgets.b1_prime == 4.0
    assert budgets.b_minus1 == pytest.approx(2 * (1 + 0.49 + 1 / (1 + 1 / 0.49) + 0.25), rel=1e-14)

    halved = BoundService.forcing_budgets(hetero_params.with_updates(delta=[-0.5] * 4), torus_spectrum)
    assert halved.b0 == pytest.approx(budgets.b0 / 2)
    assert halved.b1 == pytest.approx(budgets.b1 / 2)
    assert halved.b_minus1 == pytest.approx(budgets.b_minus1 / 2)


def test_effective_spectral_values(budgets):
    lam_f, lam_tilde = BoundService.effective_spectral_values(budgets)
    assert lam_f == pytest.approx(budgets.b1 / budgets.b0)
    assert lam_tilde == pytest.approx(budgets.b0 / budgets.b_minus1)
    assert lam_f >= lam_tilde


def test_phi_at_zero():
    assert BoundService.phi_bound(0.0, 8.0, 1.0) == 5.0
    for b, bp in [(3.0, 0.2), (20.0, 4.0)]:
        assert BoundService.phi_bound(0.0, b, bp) == 1.0 + b / 2


def test_phi_divergent():
    with pytest.raises(DivergentSeriesException):
        BoundService.phi_bound(1.0, 8.0, 1.0)
    with pytest.raises(DivergentSeriesException):
        BoundService.phi_bound(0.5, 8.0, 3.0)


def test_phi_matches_high_precision_sum():
    with mpmath.workdps(50):
        z, b, bp = mpmath.mpf("0.25"), mpmath.mpf(8), mpmath.mpf(1)
        total, prefix = mpmath.mpf(0), mpmath.mpf(1)
        for m in range(400):
            total += prefix * (1 + m * bp + b / 2)
            prefix *= z * (m * bp + b / 2) / (m + 1)
        oracle = float(total)
    assert BoundService.phi_bound(0.25, 8.0, 1.0) == pytest.approx(oracle, rel=1e-13)


def test_phi_monotone_in_z():
    values = [BoundService.phi_bound(z, 8.0, 1.0) for z in np.linspace(0.0, 0.9, 10)]
    assert all(a <= b for a, b in zip(values, values[1:]))


def test_power_moment_bounds(budgets):
    rows = BoundService.power_moment_bounds(budgets, 3, MomentFamily.U)
    half = budgets.b1 / 2
    assert rows[0] == (1, pytest.approx(half), pytest.approx(half * (budgets.b1_prime + half)))
    assert rows[1][1] == pytest.approx(half * (budgets.b1_prime + half))
    assert rows[2][2] == pytest.approx(
        half * (budgets.b1_prime + half) * (2 * budgets.b1_prime + half) * (3 * budgets.b1_prime + half)
    )
    v_rows = BoundService.power_moment_bounds(budgets, 1, MomentFamily.V)
    assert v_rows[0][1] == pytest.approx(budgets.b0 / 2)


# ── generador ──

def test_generator_on_linear_observables(torus_spectrum, hetero_params, random_states):
    budgets = BoundService.forcing_budgets(hetero_params, torus_spectrum)
    u, v, t = ObservableService.observables_batch(random_states, torus_spectrum)
    lg_u = GeneratorCalculus.generator_on_observables(random_states, 1, 0, hetero_params, torus_spectrum)
    lg_v = GeneratorCalculus.generator_on_observables(random_states, 0, 1, hetero_params, torus_spectrum)
    np.testing.assert_allclose(lg_u, budgets.b1 - 2 * t, rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(lg_v, budgets.b0 - 2 * u, rtol=1e-12, atol=1e-12)


def test_generator_matches_finite_differences(torus_spectrum, hetero_params):
    s, p = torus_spectrum, hetero_params
    x = derive_stream(5, 0).normal(size=s.N)
    i, j = 2, 1

    def g(y):
        sq = y * y
        return math.fsum(sq) ** i * math.fsum(sq / s.lam) ** j

    step = 1e-3
    fd = 0.0
    for ell in range(s.N):
        e = np.zeros(s.N)
        e[ell] = step
        d1 = (g(x + e) - g(x - e)) / (2 * step)
        d2 = (g(x + e) - 2 * g(x) + g(x - e)) / step ** 2
        fd += s.lam[ell] * (0.5 * p.a * (1 + p.delta_modes[ell]) * d2 - x[ell] * d1)
    value = GeneratorCalculus.generator_on_observables(x, i, j, p, s)[0]
    assert value == pytest.approx(fd, rel=1e-5, abs=1e-5)


# ── flujos aleatorios ──

def test_streams_are_reproducible_per_key():
    first = derive_stream(2024, 3, 1).standard_normal(8)
    again = derive_stream(2024, 3, 1).standard_normal(8)
    np.testing.assert_array_equal(first, again)


def test_streams_differ_across_keys_and_seeds():
    base = derive_stream(2024, 3).standard_normal(64)
    for other in (derive_stream(2024, 4), derive_stream(2025, 3), derive_stream(2024, 3, 0)):
        assert not np.array_equal(base, other.standard_normal(64))


def test_derive_streams_matches_indexed_streams():
    streams = derive_streams(7, 3, 11)
    assert len(streams) == 3
    for index, gen in enumerate(streams):
        assert gen.random() == derive_stream(7, 11, index).random()
