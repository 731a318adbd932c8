"""
apps.spectrum.services
----------------------
Spectral model construction and the scalar analytic functions shared by the
lab: observables, good/untamed classification, forcing budgets, the Φ series
behind the exponential moment bounds, and the forcing generator applied to
functions of (enstrophy, energy).
"""

import logging
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np
from django.utils.translation import gettext_lazy as _

from apps.spectrum.enums import MomentFamily, SpectrumSource, StateClass
from apps.spectrum.exceptions import (
    DegenerateSpectrumException,
    DivergentSeriesException,
    ZeroStateException,
)
from apps.spectrum.types import (
    ForcingBudgets,
    ModelParams,
    Observables,
    Spectrum,
    TorusSource,
)
from apps.spectrum.validators import SpectrumValidator

logger = logging.getLogger(__name__)

PHI_REL_TOL = 1e-16
PHI_MAX_TERMS = 1_000_000
EIGEN_TIE_RTOL = 1e-12


class SpectrumService:
    """
    Construcción del espectro y de los parámetros del modelo.
    """

    @staticmethod
    def build_torus_spectrum(aspect: float, wavevectors: Sequence[Sequence[int]]) -> Spectrum:
        """
        Build the normalized ladder from torus wavevectors.

        Raw eigenvalues are e = (k_x/aspect)² + k_y²; they are sorted and divided
        by the smallest one so that μ₁ = 1 exactly.

        Args:
            aspect (float): Torus aspect in (0, 1].
            wavevectors (Sequence): n integer pairs, nonzero and pairwise distinct.

        Returns:
            Spectrum: Torus-sourced spectrum with wavevectors stored in ladder order.

        Raises:
            BadAspectException: If aspect is outside (0, 1].
            DegenerateSpectrumException: If two raw eigenvalues coincide.
            TooFewModesException: If fewer than four wavevectors are given.
        """
        SpectrumValidator.validate_aspect(aspect)
        ks = [(int(k[0]), int(k[1])) for k in wavevectors]
        SpectrumValidator.validate_wavevectors(ks)

        raw = np.array([(kx / aspect) ** 2 + ky ** 2 for kx, ky in ks], dtype=float)
        order = np.argsort(raw, kind="stable")
        raw_sorted = raw[order]
        gaps = np.diff(raw_sorted)
        if np.any(gaps <= EIGEN_TIE_RTOL * raw_sorted[1:]):
            tie = int(np.argmin(gaps))
            logger.warning(
                f"Autovalores crudos coincidentes: {ks[order[tie]]} y {ks[order[tie + 1]]} "
                f"({raw_sorted[tie]})"
            )
            raise DegenerateSpectrumException(
                _("Raw eigenvalues of %(k1)s and %(k2)s coincide (%(e)s).") % {
                    'k1': ks[order[tie]], 'k2': ks[order[tie + 1]], 'e': raw_sorted[tie],
                }
            )

        mu = raw_sorted / raw_sorted[0]
        SpectrumValidator.validate_ladder(mu)
        torus = TorusSource(
            aspect=float(aspect),
            wavevectors=tuple(ks[i] for i in order),
            raw_eigenvalues=tuple(float(e) for e in raw_sorted),
        )
        logger.debug(f"Espectro de toro construido: μ={mu.tolist()}")
        return Spectrum(mu=mu, source=SpectrumSource.TORUS, torus=torus)

    @staticmethod
    def explicit_spectrum(mu: Sequence[float]) -> Spectrum:
        arr = np.asarray(mu, dtype=float)
        SpectrumValidator.validate_ladder(arr)
        return Spectrum(mu=arr, source=SpectrumSource.EXPLICIT)

    @staticmethod
    def make_params(a: float, delta: Sequence[float], kappa: float, eps: float, s: Spectrum) -> ModelParams:
        delta_arr = np.asarray(delta, dtype=float)
        SpectrumValidator.validate_params(a, delta_arr, kappa, eps, s.n)
        return ModelParams(a=float(a), delta=delta_arr, kappa=float(kappa), eps=float(eps))


class ObservableService:
    """
    Enstrophy u = |x|², energy v = |x|²₋₁ and T = Σ λ_ℓ x_ℓ², plus the
    good/untamed classification driven by the ratio u/v.
    """

    @staticmethod
    def compute_observables(x, s: Spectrum) -> Observables:
        """
        Compute (u, v, T) with correctly rounded sums so that v ≤ u ≤ T holds exactly.

        Raises:
            DimensionMismatchException: If len(x) != N.
        """
        arr = SpectrumValidator.validate_state(x, s)
        sq = arr * arr
        u = math.fsum(sq)
        v = math.fsum(sq / s.lam)
        t_obs = math.fsum(sq * s.lam)
        return Observables(u=u, v=v, t_obs=t_obs)

    @staticmethod
    def observables_batch(states: np.ndarray, s: Spectrum) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Vectorized (u, v, T) over a (K, N) array of states."""
        sq = np.square(np.asarray(states, dtype=float))
        return sq.sum(axis=-1), sq @ s.inv_lam, sq @ s.lam

    @staticmethod
    def good_mask(u, v, s: Spectrum, u_min: float, u_max: float, eta: float) -> np.ndarray:
        """
        Boolean mask of the good set for arrays of (u, v).

        Zero-energy entries are never good.
        """
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(v > 0, u / np.where(v > 0, v, 1.0), np.nan)
        dist = np.min(np.abs(ratio[..., None] - s.mu), axis=-1)
        return (v > 0) & (u >= u_min) & (u <= u_max) & (dist >= eta)

    @staticmethod
    def classify_state(x, s: Spectrum, u_min: float, u_max: float, eta: float) -> StateClass:
        """
        Classify x as Good (u within [u_min, u_max] and |u/v − λ_ℓ| ≥ eta for all ℓ) or Untamed.

        Raises:
            ZeroStateException: If x = 0.
        """
        obs = ObservableService.compute_observables(x, s)
        if obs.u == 0.0:
            raise ZeroStateException()
        good = bool(ObservableService.good_mask(obs.u, obs.v, s, u_min, u_max, eta))
        return StateClass.GOOD if good else StateClass.UNTAMED


class BoundService:
    """
    Forcing budgets and the moment bounds derived from the stationary identities.
    """

    @staticmethod
    def forcing_budgets(p: ModelParams, s: Spectrum) -> ForcingBudgets:
        w = p.a * (1.0 + p.delta_modes)
        return ForcingBudgets(
            b0=math.fsum(w),
            b0_prime=float(np.max(w)),
            b1=math.fsum(s.lam * w),
            b1_prime=float(np.max(s.lam * w)),
            b_minus1=math.fsum(w / s.lam),
        )

    @staticmethod
    def phi_bound(z: float, b: float, b_prime: float) -> float:
        """
        Evaluate Φ(z, b, b′) = Σ_m z^m/m! · Π_{p<m}(p·b′ + b/2) · (1 + m·b′ + b/2).

        The series is summed by term recurrence until a term drops below
        1e-16 times the running sum.

        Raises:
            DivergentSeriesException: If z·b′ ≥ 1 or the term cap is reached.
        """
        if z < 0 or b <= 0 or b_prime <= 0:
            raise DivergentSeriesException(_("Φ requires z ≥ 0 and b, b′ > 0."))
        if z * b_prime >= 1.0:
            logger.warning(f"Serie Φ divergente: z·b′ = {z * b_prime}")
            raise DivergentSeriesException()

        prefix = 1.0
        total = 0.0
        for m in range(PHI_MAX_TERMS):
            term = prefix * (1.0 + m * b_prime + 0.5 * b)
            total += term
            if term <= PHI_REL_TOL * total:
                return total
            prefix *= z * (m * b_prime + 0.5 * b) / (m + 1)
        logger.warning(f"Serie Φ sin converger tras {PHI_MAX_TERMS} términos (z={z}, b′={b_prime})")
        raise DivergentSeriesException(_("Φ did not converge within the term cap."))

    @staticmethod
    def power_moment_bounds(budgets: ForcingBudgets, m_max: int, family: MomentFamily) -> List[Tuple[int, float, float]]:
        """
        Product bounds on stationary power moments.

        For the U family: E[U^m] ≤ Π_{p<m}(p·B₁′ + B₁/2) and E[T·U^m] ≤ Π_{p≤m}(…).
        For the V family the same products use (B₀, B₀′) and bound E[V^m], E[U·V^m].

        Returns:
            List of (m, bound_plain, bound_weighted) for m = 1..m_max.
        """
        if family is MomentFamily.U:
            b, b_prime = budgets.b1, budgets.b1_prime
        else:
            b, b_prime = budgets.b0, budgets.b0_prime
        rows = []
        product = 1.0
        for m in range(1, m_max + 1):
            product *= (m - 1) * b_prime + 0.5 * b
            rows.append((m, product, product * (m * b_prime + 0.5 * b)))
        return rows

    @staticmethod
    def effective_spectral_values(budgets: ForcingBudgets) -> Tuple[float, float]:
        """Return (B₁/B₀, B₀/B₋₁); the first is never smaller than the second."""
        return budgets.b1 / budgets.b0, budgets.b0 / budgets.b_minus1


class GeneratorCalculus:
    """
    Forcing generator applied to g = u^i·v^j.

    With S₁ = Σλ(1+δ)x², S₀ = Σ(1+δ)x², S₋₁ = Σ(1+δ)x²/λ the generator reads
    B₁ψ_u + B₀ψ_v + 2aS₁ψ_uu + 4aS₀ψ_uv + 2aS₋₁ψ_vv − 2Tψ_u − 2Uψ_v.
    The effective generator is the same expression with x² replaced by q(u, v).
    """

    @staticmethod
    def weighted_sums(squares: np.ndarray, p: ModelParams, s: Spectrum) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        w = 1.0 + p.delta_modes
        return squares @ (s.lam * w), squares @ w, squares @ (w / s.lam)

    @staticmethod
    def apply_monomial(
        i: int,
        j: int,
        u: np.ndarray,
        v: np.ndarray,
        t_obs: np.ndarray,
        sums: Tuple[np.ndarray, np.ndarray, np.ndarray],
        p: ModelParams,
        budgets: ForcingBudgets,
    ) -> np.ndarray:
        s1, s0, sm1 = sums
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        zero = np.zeros_like(u)

        def mono(c: float, pu: int, pv: int) -> np.ndarray:
            if c == 0:
                return zero
            return c * u ** pu * v ** pv

        psi_u = mono(i, i - 1, j)
        psi_v = mono(j, i, j - 1)
        psi_uu = mono(i * (i - 1), i - 2, j)
        psi_uv = mono(i * j, i - 1, j - 1)
        psi_vv = mono(j * (j - 1), i, j - 2)
        return (
            budgets.b1 * psi_u
            + budgets.b0 * psi_v
            + 2.0 * p.a * s1 * psi_uu
            + 4.0 * p.a * s0 * psi_uv
            + 2.0 * p.a * sm1 * psi_vv
            - 2.0 * t_obs * psi_u
            - 2.0 * u * psi_v
        )

    @staticmethod
    def generator_on_observables(
        states: np.ndarray, i: int, j: int, p: ModelParams, s: Spectrum, budgets: Optional[ForcingBudgets] = None
    ) -> np.ndarray:
        """
        Evaluate L̃g at each row of `states` for g(x) = |x|^{2i}·|x|_{-1}^{2j}.

        Args:
            states (np.ndarray): (K, N) or (N,) states.
            i (int): Power of the enstrophy.
            j (int): Power of the energy.

        Returns:
            np.ndarray: Generator values, one per state.
        """
        budgets = budgets or BoundService.forcing_budgets(p, s)
        squares = np.square(np.atleast_2d(np.asarray(states, dtype=float)))
        u, v, t_obs = squares.sum(axis=-1), squares @ s.inv_lam, squares @ s.lam
        sums = GeneratorCalculus.weighted_sums(squares, p, s)
        return GeneratorCalculus.apply_monomial(i, j, u, v, t_obs, sums, p, budgets)
