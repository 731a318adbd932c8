import math

import numpy as np
import pytest

from apps.effective.enums import BoundaryRay
from apps.effective.exceptions import NotPSDException
from apps.effective.services import EffectiveService, default_q_source
from apps.effective.types import EffectiveCoefficients
from apps.polytope.exceptions import OutsideConeException
from apps.polytope.services import ExactQSource, QService
from apps.simulation.enums import SimMode
from apps.simulation.services import SimulationService
from apps.simulation.types import SimConfig
from apps.spectrum.services import BoundService, SpectrumService
from apps.spectrum.streams import derive_stream
from apps.spectrum.types import ConePoint


class UniformQ:
    """q_ℓ = u/N on every mode: a nondegenerate stand-in for boundary tests."""

    def __init__(self, N):
        self.N = N

    def q(self, w):
        return np.full(self.N, w.u / self.N)

    def q_batch(self, u, v):
        u = np.atleast_1d(np.asarray(u, dtype=float))
        return np.repeat(u[:, None] / self.N, self.N, axis=1)


def batch_se(x, batches=32):
    usable = len(x) // batches * batches
    means = np.asarray(x[:usable]).reshape(batches, -1).mean(axis=1)
    return means.std(ddof=1) / math.sqrt(batches)


@pytest.fixture
def exact(torus_spectrum):
    return ExactQSource(torus_spectrum)


@pytest.fixture
def table(torus_spectrum):
    return QService.q_ray_table(torus_spectrum, QService.default_ratios(torus_spectrum, 257))


def interior_points(s, count, seed):
    gen = derive_stream(seed)
    ratios = gen.uniform(1.0, s.lam_max, count)
    ratios = np.clip(ratios, 1.0 + 1e-3, s.lam_max - 1e-3)
    scales = gen.uniform(0.2, 5.0, count)
    return [ConePoint(float(r * c), float(c)) for r, c in zip(ratios, scales)]


# ── Coeficientes ──

def test_lower_ray_coefficients_are_degenerate(torus_spectrum, params, exact):
    c = EffectiveService.effective_coefficients(ConePoint(1.0, 1.0), params, torus_spectrum, exact)
    assert c.a11 == pytest.approx(2.0)
    assert c.a12 == pytest.approx(2.0)
    assert c.a22 == pytest.approx(2.0)
    assert abs(c.determinant) <= 1e-12


def test_lower_ray_drifts(torus_spectrum, hetero_params, exact):
    budgets = BoundService.forcing_budgets(hetero_params, torus_spectrum)
    c = EffectiveService.effective_coefficients(ConePoint(2.5, 2.5), hetero_params, torus_spectrum, exact)
    assert c.drift_u == pytest.approx(budgets.b1 - 5.0, abs=1e-12)
    assert c.drift_v == pytest.approx(budgets.b0 - 5.0, abs=1e-12)


def test_upper_ray_coefficients_are_degenerate(torus_spectrum, params, exact):
    lam = torus_spectrum.lam_max
    c = EffectiveService.effective_coefficients(ConePoint(lam, 1.0), params, torus_spectrum, exact)
    assert abs(c.determinant) <= 1e-12 * c.a11 ** 2


def test_interior_determinant_is_positive(torus_spectrum, params, exact):
    for w in interior_points(torus_spectrum, 200, 41):
        c = EffectiveService.effective_coefficients(w, params, torus_spectrum, exact)
        assert c.determinant > 0


def test_energy_drift_depends_on_u_only(torus_spectrum, hetero_params, exact):
    b0 = BoundService.forcing_budgets(hetero_params, torus_spectrum).b0
    for w in interior_points(torus_spectrum, 50, 42):
        c = EffectiveService.effective_coefficients(w, hetero_params, torus_spectrum, exact)
        assert c.drift_v == pytest.approx(b0 - 2 * w.u, rel=1e-10, abs=1e-10)


def test_determinant_vanishes_towards_the_boundary(torus_spectrum, params, exact):
    def normalized(offset):
        c = EffectiveService.effective_coefficients(ConePoint(1.0 + offset, 1.0), params, torus_spectrum, exact)
        return c.determinant / c.a11 ** 2

    far, near = normalized(1e-2), normalized(1e-4)
    assert 0 < near <= 0.05 * far
    assert near <= 1e-3


def test_outside_cone_is_rejected(torus_spectrum, params, exact):
    with pytest.raises(OutsideConeException):
        EffectiveService.effective_coefficients(ConePoint(0.5, 1.0), params, torus_spectrum, exact)


# ── Factor de difusión ──

def test_diffusion_factor_of_half_identity_is_identity():
    c = EffectiveCoefficients(0.5, 0.0, 0.5, 0.0, 0.0, ConePoint(2.0, 1.0))
    np.testing.assert_array_equal(EffectiveService.diffusion_factor(c), np.eye(2))


def test_diffusion_factor_is_rank_one_on_the_boundary(torus_spectrum, params, exact):
    c = EffectiveService.effective_coefficients(ConePoint(3.0, 3.0), params, torus_spectrum, exact)
    F = EffectiveService.diffusion_factor(c)
    np.testing.assert_allclose(F[:, 1], 0.0, atol=1e-6)
    np.testing.assert_allclose(F @ F.T, 2 * c.matrix, rtol=1e-10, atol=1e-10)


def test_diffusion_factor_reproduces_twice_the_matrix():
    gen = derive_stream(43)
    for _ in range(100):
        L = np.tril(gen.normal(size=(2, 2)))
        A = L @ L.T
        c = EffectiveCoefficients(A[0, 0], A[0, 1], A[1, 1], 0.0, 0.0, ConePoint(2.0, 1.0))
        F = EffectiveService.diffusion_factor(c)
        assert F[0, 1] == 0.0
        np.testing.assert_allclose(F @ F.T, 2 * A, rtol=1e-13, atol=1e-14)


def test_indefinite_matrix_is_rejected():
    c = EffectiveCoefficients(1.0, 2.0, 1.0, 0.0, 0.0, ConePoint(2.0, 1.0))
    with pytest.raises(NotPSDException):
        EffectiveService.diffusion_factor(c)


# ── Paso en el cono ──

def test_zero_noise_step_follows_the_drift(torus_spectrum, params, table):
    w = ConePoint(4.0, 1.6)
    c = EffectiveService.effective_coefficients(w, params, torus_spectrum, table)
    result = EffectiveService.effective_step(w, 1e-4, params, torus_spectrum, table, derive_stream(0), xi=np.zeros(2))
    assert result.halvings == 0 and not result.reflected
    assert result.point.u == pytest.approx(w.u + c.drift_u * 1e-4, abs=1e-15)
    assert result.point.v == pytest.approx(w.v + c.drift_v * 1e-4, abs=1e-15)


def test_one_step_mean_of_gap(torus_spectrum, params, table):
    w, h, K = ConePoint(4.0, 1.6), 1e-4, 20_000
    c = EffectiveService.effective_coefficients(w, params, torus_spectrum, table)
    rng = derive_stream(44)
    gaps = np.empty(K)
    for k in range(K):
        step = EffectiveService.effective_step(w, h, params, torus_spectrum, table, rng)
        gaps[k] = (step.point.u - step.point.v) - (w.u - w.v)
    se = gaps.std(ddof=1) / math.sqrt(K)
    assert abs(gaps.mean() - (c.drift_u - c.drift_v) * h) <= 4 * se


def test_outward_push_is_reflected_across_the_lower_ray(torus_spectrum, params):
    q = UniformQ(torus_spectrum.N)
    w = ConePoint(1.0 + 1e-9, 1.0)
    result = EffectiveService.effective_step(w, 1.0, params, torus_spectrum, q, derive_stream(0), xi=np.array([-5.0, 5.0]))
    assert result.reflected
    assert result.ray is BoundaryRay.LOWER
    assert result.halvings == 12
    assert result.h_used == pytest.approx(2.0 ** -12)
    assert result.point.is_interior(torus_spectrum.lam_max)


def test_initial_point_sits_on_the_mid_ray(torus_spectrum, params):
    w = EffectiveService.initial_point(params, torus_spectrum)
    assert w.u == pytest.approx(4.0)
    assert w.ratio == pytest.approx((1 + torus_spectrum.lam_max) / 2)


# ── Corridas estacionarias ──

def test_stationary_means_match_forcing_budgets(torus_spectrum, params, table):
    cfg = SimConfig(h=0.01, t_end=100.0, burn_in=10.0, seed=45)
    rec = EffectiveService.simulate_effective(cfg, params, torus_spectrum, table).stationary()
    budgets = BoundService.forcing_budgets(params, torus_spectrum)
    assert abs(2 * rec.u.mean() - budgets.b0) <= 4 * 2 * batch_se(rec.u)
    assert abs(2 * rec.t_obs.mean() - budgets.b1) <= 4 * 2 * batch_se(rec.t_obs)
    assert np.all(rec.u > rec.v)
    assert np.all(rec.u < torus_spectrum.lam_max * rec.v)


def test_effective_runs_are_deterministic(torus_spectrum, params, table):
    cfg = SimConfig(h=0.01, t_end=1.0, burn_in=0.1, seed=46)
    a = EffectiveService.simulate_effective(cfg, params, torus_spectrum, table)
    b = EffectiveService.simulate_effective(cfg, params, torus_spectrum, table)
    np.testing.assert_array_equal(a.u, b.u)
    np.testing.assert_array_equal(a.flags, b.flags)
    assert len(a) == 101


def test_effective_mode_dispatch_uses_the_default_table(torus_spectrum, params, settings):
    settings.LAB_Q_GRID_SIZE = 65
    cfg = SimConfig(h=0.01, t_end=0.5, burn_in=0.1, seed=47, mode=SimMode.EFFECTIVE)
    system = SimulationService.assemble(torus_spectrum, params)
    rec = SimulationService.simulate_full(cfg, system)
    assert len(rec) == 51
    assert default_q_source(torus_spectrum).ratios.shape == (65,)


@pytest.mark.slow
def test_reflections_are_rare_at_small_steps(torus_spectrum, params, table):
    cfg = SimConfig(h=1e-3, t_end=200.0, burn_in=0.0, seed=48)
    rec = EffectiveService.simulate_effective(cfg, params, torus_spectrum, table)
    assert rec.stats.reflections / cfg.n_steps <= 1e-3


@pytest.mark.slow
def test_two_seeds_agree_on_stationary_mean(torus_spectrum, params, table):
    cfg = SimConfig(h=0.01, t_end=2000.0, burn_in=50.0)
    a = EffectiveService.simulate_effective(cfg.with_updates(seed=1), params, torus_spectrum, table).stationary()
    b = EffectiveService.simulate_effective(cfg.with_updates(seed=2), params, torus_spectrum, table).stationary()
    se = math.hypot(batch_se(a.u), batch_se(b.u))
    assert abs(a.u.mean() - b.u.mean()) <= 3 * se


# ── Exponentes de frontera ──

def test_admissible_exponents_on_the_reference_torus(torus_spectrum, params):
    exps = EffectiveService.admissible_exponents(params, torus_spectrum)
    mu = torus_spectrum.mu
    low, high = mu - 1, mu[-1] - mu
    alpha = (2 * low.sum() / (2 * low.max()) - 1) / 2 - 1e-9
    beta = (2 * high.sum() / (2 * high.max()) - 1) / 2 - 1e-9
    assert exps.alpha_max == pytest.approx(alpha, abs=1e-12)
    assert exps.beta_max == pytest.approx(beta, abs=1e-12)
    assert exps.alpha_max == pytest.approx(0.5136, abs=1e-4)
    assert exps.alpha_available and exps.beta_available


def test_exponents_without_certificate_are_not_available(torus_spectrum):
    nearly = -(1 - 1e-12)
    p = SpectrumService.make_params(1.0, [0.0, nearly, nearly, 0.0], 0.5, 0.5, torus_spectrum)
    exps = EffectiveService.admissible_exponents(p, torus_spectrum)
    assert not exps.alpha_available
    assert not exps.beta_available
    assert exps.as_dict() == {"alpha_max": "NotAvailable", "beta_max": "NotAvailable"}


# ── Generador efectivo ──

def test_effective_generator_on_the_lower_ray(torus_spectrum, params, exact):
    budgets = BoundService.forcing_budgets(params, torus_spectrum)
    assert EffectiveService.effective_generator(1.0, 1.0, 1, 0, params, torus_spectrum, exact)[0] == pytest.approx(budgets.b1 - 2)
    assert EffectiveService.effective_generator(1.0, 1.0, 0, 1, params, torus_spectrum, exact)[0] == pytest.approx(budgets.b0 - 2)


def test_effective_generator_matches_coefficients(torus_spectrum, hetero_params, exact):
    w = ConePoint(3.0, 1.2)
    c = EffectiveService.effective_coefficients(w, hetero_params, torus_spectrum, exact)
    g_uu = EffectiveService.effective_generator(w.u, w.v, 2, 0, hetero_params, torus_spectrum, exact)[0]
    g_uv = EffectiveService.effective_generator(w.u, w.v, 1, 1, hetero_params, torus_spectrum, exact)[0]
    assert g_uu == pytest.approx(2 * c.a11 + 2 * w.u * c.drift_u, rel=1e-10)
    assert g_uv == pytest.approx(2 * c.a12 + w.v * c.drift_u + w.u * c.drift_v, rel=1e-10)
