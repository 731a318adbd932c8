"""
apps.polytope.services
----------------------
Fiber geometry over a cone point (u, v): the sector polytope of pair radii,
its exact volume and centroid, uniform samplers, the lift back to states and
the averaged coefficients q_ℓ(u, v) with their ray table.

q_{2i−1} = q_{2i} = E[s_i]/2 since the angle average of cos² is ½; s₁ and s₂
are affine in σ, so their means follow from the centroid.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from typing import List, Optional

import numpy as np
from django.conf import settings
from scipy.spatial import ConvexHull, QhullError

from apps.polytope.enums import QMethod, SamplerKind
from apps.polytope.exceptions import (
    DegeneratePolytopeException,
    DimensionTooHighException,
    NegativeRadialException,
)
from apps.polytope.types import QRayTable, QValues, SectorPolytope
from apps.polytope.validators import PolytopeValidator
from apps.spectrum.streams import derive_stream
from apps.spectrum.types import ConePoint, Spectrum

logger = logging.getLogger(__name__)

BOUNDARY_RTOL = 1e-12
RADIAL_TOL = 1e-12
PILOT_DRAWS = 4096
MIN_ACCEPTANCE = 1e-3
BURN_IN_PER_DIM = 64
DEFAULT_MC_SAMPLES = 200_000


@dataclass(frozen=True)
class SigmaDraws:
    sigmas: np.ndarray
    sampler: SamplerKind
    acceptance: float


class PolytopeService:
    """
    Construcción del politopo sectorial, vértices, volumen/centroide y muestreo.
    """

    @staticmethod
    def sector_index(u: float, v: float, s: Spectrum) -> int:
        """One-based i₀ ∈ [2, n] with μ_{i₀−1}·v < u ≤ μ_{i₀}·v."""
        r = u / v if v > 0 else 1.0
        return int(np.clip(np.searchsorted(s.mu, r, side="left") + 1, 2, s.n))

    @staticmethod
    def build_polytope(w: ConePoint, s: Spectrum) -> SectorPolytope:
        """
        Inequality representation of the polytope over w.

        Within 1e-12·u of u = v the set is the point σ = 0; within the same
        tolerance of u = λ_N·v it is the point (0, …, 0, u).

        Raises:
            OutsideConeException: If w is not in the cone.
        """
        PolytopeValidator.validate_cone_point(w, s)
        u, v = float(w.u), float(w.v)
        tol = BOUNDARY_RTOL * u
        d = s.n - 2
        point = None
        if u - v <= tol:
            point = np.zeros(d)
        elif s.lam_max * v - u <= tol:
            point = np.zeros(d)
            point[-1] = u
        return SectorPolytope(u=u, v=v, mu=s.mu, sector=PolytopeService.sector_index(u, v, s), point=point)

    @staticmethod
    def vertices(p: SectorPolytope) -> np.ndarray:
        """
        Enumerate vertices by solving every d-subset of the d + 2 constraints
        and keeping the feasible, distinct solutions.
        """
        if p.degenerate:
            return p.point[None, :].copy()
        A, b = p.halfspaces
        d = p.dim
        scale = max(1.0, p.u)
        found: List[np.ndarray] = []
        for rows in itertools.combinations(range(A.shape[0]), d):
            sub = A[list(rows)]
            if abs(np.linalg.det(sub)) < 1e-14:
                continue
            sigma = np.linalg.solve(sub, b[list(rows)])
            if np.all(A @ sigma <= b + 1e-10 * scale):
                sigma = np.maximum(sigma, 0.0)
                if not any(np.max(np.abs(sigma - other)) <= 1e-9 * scale for other in found):
                    found.append(sigma)
        return np.array(found).reshape(-1, d)

    @staticmethod
    def volume_centroid(p: SectorPolytope):
        """
        Exact (n−2)-volume and centroid.

        The hull facets are coned from the vertex mean; volume and centroid are
        accumulated over the resulting simplices.

        Returns:
            tuple: (volume, centroid) with centroid of length n−2.

        Raises:
            DegeneratePolytopeException: On boundary points or flat polytopes.
            DimensionTooHighException: If n − 2 > 8.
        """
        if p.degenerate:
            raise DegeneratePolytopeException()
        PolytopeValidator.validate_exact_dim(p.dim)
        verts = PolytopeService.vertices(p)
        d = p.dim
        if verts.shape[0] < d + 1:
            logger.warning(f"Politopo con {verts.shape[0]} vértices en dimensión {d}")
            raise DegeneratePolytopeException()
        try:
            hull = ConvexHull(verts)
        except QhullError as exc:
            logger.warning(f"Qhull falló sobre el politopo en ({p.u}, {p.v}): {exc}")
            raise DegeneratePolytopeException()

        apex = verts.mean(axis=0)
        facets = verts[hull.simplices]
        volumes = np.abs(np.linalg.det(facets - apex)) / math.factorial(d)
        centroids = (apex + facets.sum(axis=1)) / (d + 1)
        volume = float(volumes.sum())
        if not volume > 0:
            raise DegeneratePolytopeException()
        centroid = volumes @ centroids / volume
        return volume, centroid

    @staticmethod
    def _hit_and_run(p: SectorPolytope, rng: np.random.Generator, count: int) -> np.ndarray:
        A, b = p.halfspaces
        d = p.dim
        sigma = PolytopeService.vertices(p).mean(axis=0)
        burn_in, thin = BURN_IN_PER_DIM * d, d
        out = np.empty((count, d))
        total = burn_in + count * thin
        for step in range(total):
            direction = rng.normal(size=d)
            direction /= np.linalg.norm(direction)
            slack = b - A @ sigma
            rate = A @ direction
            with np.errstate(divide="ignore", invalid="ignore"):
                bounds = slack / rate
            hi = np.min(bounds[rate > 0], initial=np.inf)
            lo = np.max(bounds[rate < 0], initial=-np.inf)
            shrink = 1e-12 * (hi - lo)
            sigma = sigma + rng.uniform(lo + shrink, hi - shrink) * direction
            if step >= burn_in and (step - burn_in) % thin == thin - 1:
                out[(step - burn_in) // thin] = sigma
        return out

    @staticmethod
    def sample_sigmas(p: SectorPolytope, rng: np.random.Generator, count: int) -> SigmaDraws:
        """
        Uniform draws on the polytope.

        Rejection from the bounding box unless the pilot acceptance falls below
        1e-3; then a hit-and-run chain with burn-in 64·dim and thinning dim.

        Raises:
            DegeneratePolytopeException: On boundary points.
        """
        if p.degenerate:
            raise DegeneratePolytopeException()
        A, b = p.halfspaces
        box = p.box_bounds
        d = p.dim

        pilot = rng.uniform(size=(PILOT_DRAWS, d)) * box
        inside = np.all(pilot @ A.T <= b, axis=1)
        acceptance = float(inside.mean())
        if acceptance < MIN_ACCEPTANCE:
            logger.info(f"Aceptación {acceptance:.2e} < {MIN_ACCEPTANCE}: muestreo hit-and-run")
            return SigmaDraws(PolytopeService._hit_and_run(p, rng, count), SamplerKind.HIT_AND_RUN, acceptance)

        kept = [pilot[inside]]
        have = kept[0].shape[0]
        drawn = PILOT_DRAWS
        while have < count:
            batch = max(1024, int(1.2 * (count - have) / max(acceptance, MIN_ACCEPTANCE)))
            cand = rng.uniform(size=(batch, d)) * box
            hits = cand[np.all(cand @ A.T <= b, axis=1)]
            kept.append(hits)
            have += hits.shape[0]
            drawn += batch
            acceptance = have / drawn
        return SigmaDraws(np.vstack(kept)[:count], SamplerKind.REJECTION, acceptance)

    @staticmethod
    def sample_sigma(p: SectorPolytope, rng: np.random.Generator) -> np.ndarray:
        return PolytopeService.sample_sigmas(p, rng, 1).sigmas[0]


class LiftService:

    @staticmethod
    def lift_sample(sigma, angles, w: ConePoint, s: Spectrum) -> np.ndarray:
        """
        Map (σ, θ) to the state x_{2i} = √s_i·cos θ_i, x_{2i+1} = √s_i·sin θ_i.

        Raises:
            NegativeRadialException: If a radius falls below −1e-12·u.
        """
        p = PolytopeService.build_polytope(w, s)
        radii = p.radial(np.asarray(sigma, dtype=float))
        floor = -RADIAL_TOL * max(p.u, 1e-300)
        if np.any(radii < floor):
            logger.warning(f"Radio negativo al levantar σ: {radii}")
            raise NegativeRadialException()
        root = np.sqrt(np.maximum(radii, 0.0))
        angles = np.asarray(angles, dtype=float)
        x = np.empty(s.N)
        x[0::2] = root * np.cos(angles)
        x[1::2] = root * np.sin(angles)
        return x


class QService:
    """
    Coeficientes promediados q_ℓ(u, v) y su tabla de rayos.
    """

    @staticmethod
    def boundary_q(p: SectorPolytope, s: Spectrum) -> np.ndarray:
        q = np.zeros(s.N)
        if p.point[-1] > 0:
            q[-2:] = p.u / 2.0
        else:
            q[:2] = p.u / 2.0
        return q

    @staticmethod
    def q_values(
        w: ConePoint,
        s: Spectrum,
        method: QMethod = QMethod.EXACT,
        samples: int = DEFAULT_MC_SAMPLES,
        rng: Optional[np.random.Generator] = None,
    ) -> QValues:
        """
        q_ℓ(u, v) by the exact centroid or by Monte-Carlo over the polytope.

        Boundary points return the closed forms: u/2 on the first pair at u = v,
        u/2 on the last pair at u = λ_N·v. The exact path falls back to
        Monte-Carlo above dimension 8.

        Raises:
            OutsideConeException: If w is not in the cone.
        """
        p = PolytopeService.build_polytope(w, s)
        if p.degenerate:
            zeros = np.zeros(s.N) if method is QMethod.MONTE_CARLO else None
            return QValues(q=QService.boundary_q(p, s), volume=0.0, method=method, std_errors=zeros)

        if method is QMethod.EXACT:
            try:
                volume, centroid = PolytopeService.volume_centroid(p)
                radii = p.radial(centroid)
                return QValues(q=np.repeat(radii / 2.0, 2), volume=volume, method=QMethod.EXACT)
            except DimensionTooHighException:
                pass

        rng = rng if rng is not None else derive_stream(0)
        draws = PolytopeService.sample_sigmas(p, rng, samples)
        radii = p.radial(draws.sigmas)
        mean = radii.mean(axis=0)
        se = radii.std(axis=0, ddof=1) / math.sqrt(samples) / 2.0
        if draws.sampler is SamplerKind.REJECTION:
            volume = float(np.prod(p.box_bounds) * draws.acceptance)
        else:
            volume = float("nan")
        return QValues(
            q=np.repeat(mean / 2.0, 2),
            volume=volume,
            method=QMethod.MONTE_CARLO,
            std_errors=np.repeat(se, 2),
            samples=samples,
            sampler=draws.sampler,
        )

    @staticmethod
    def default_ratios(s: Spectrum, size: Optional[int] = None) -> np.ndarray:
        size = size or settings.LAB_Q_GRID_SIZE
        grid = np.linspace(1.0, s.lam_max, size)
        grid[-1] = s.lam_max
        return grid

    @staticmethod
    def q_ray_table(
        s: Spectrum,
        ratios=None,
        method: QMethod = QMethod.EXACT,
        samples: int = DEFAULT_MC_SAMPLES,
        seed: int = 0,
    ) -> QRayTable:
        """
        Tabulate q(r, 1) over a sorted ratio grid in [1, λ_N].

        Monte-Carlo rows draw from the stream (seed, row).

        Raises:
            RatioOutOfRangeException: If the grid is unsorted or leaves [1, λ_N].
        """
        grid = QService.default_ratios(s) if ratios is None else np.asarray(ratios, dtype=float)
        PolytopeValidator.validate_ratio_grid(grid, s)
        rows, volumes, sectors, errors = [], [], [], []
        for index, r in enumerate(grid):
            w = ConePoint(float(r), 1.0)
            values = QService.q_values(w, s, method, samples, derive_stream(seed, index))
            rows.append(values.q)
            volumes.append(values.volume)
            sectors.append(PolytopeService.sector_index(w.u, w.v, s))
            errors.append(values.std_errors if values.std_errors is not None else np.zeros(s.N))
        logger.info(f"Tabla de rayos q: {len(grid)} cocientes, método {method.name}")
        return QRayTable(
            ratios=grid,
            sectors=np.array(sectors),
            rows=np.array(rows),
            volumes=np.array(volumes),
            method=method,
            std_errors=np.array(errors) if method is QMethod.MONTE_CARLO else None,
        )


class ExactQSource:
    """q evaluated directly from the polytope at every call."""

    def __init__(self, s: Spectrum):
        self.spectrum = s

    def q(self, w: ConePoint) -> np.ndarray:
        return np.array(QService.q_values(w, self.spectrum).q)

    def q_batch(self, u, v) -> np.ndarray:
        u = np.atleast_1d(np.asarray(u, dtype=float))
        v = np.atleast_1d(np.asarray(v, dtype=float))
        return np.array([self.q(ConePoint(float(a), float(b))) for a, b in zip(u, v)])
