"""
apps.fields.services
--------------------
Quadratic Galerkin drift b(x) through the triad tensor, the stirring family
{T_J, R_i}, the projected full-rank diagnostic and the Itô correction of the
stirring noise.

Mode convention: wavevector i of the ladder owns indices 2i (cosine) and
2i+1 (sine); eigenfunctions are L²-normalized on the torus
(R / 2π·aspect Z) × (R / 2π Z).
"""

import itertools
import logging
import math
from typing import Tuple

import numpy as np
from scipy import linalg

from apps.fields.enums import ModeKind, TriadSource
from apps.fields.types import (
    FastOperator,
    ModeLabel,
    QuadraticTerms,
    StirringFamily,
    StirringRank,
    TriadTensor,
)
from apps.fields.validators import FieldValidator
from apps.spectrum.exceptions import ZeroStateException
from apps.spectrum.streams import derive_stream
from apps.spectrum.types import Spectrum
from apps.spectrum.validators import SpectrumValidator

logger = logging.getLogger(__name__)

# Exponential-basis coefficients (c₊, c₋) of g(θ) = c₊e^{iθ} + c₋e^{−iθ}.
_VALUE_COEFS = {ModeKind.COS: (0.5, 0.5), ModeKind.SIN: (-0.5j, 0.5j)}
_DERIVATIVE_COEFS = {ModeKind.COS: (0.5j, -0.5j), ModeKind.SIN: (0.5, 0.5)}
_SIGNS = (1, -1)


def mode_basis(s: Spectrum) -> Tuple[ModeLabel, ...]:
    FieldValidator.validate_torus_source(s)
    labels = []
    for i, k in enumerate(s.torus.wavevectors):
        labels.append(ModeLabel(2 * i, k, ModeKind.COS))
        labels.append(ModeLabel(2 * i + 1, k, ModeKind.SIN))
    return tuple(labels)


def _stirring_coefficients(f: StirringFamily, s: Spectrum):
    k, l, m = f.triples[:, 0], f.triples[:, 1], f.triples[:, 2]
    inv = s.inv_lam
    return k, l, m, inv[k] - inv[l], inv[l] - inv[m], inv[m] - inv[k]


class TriadService:
    """
    Construcción y evaluación del tensor de tríadas t_{a,b,c}.
    """

    @staticmethod
    def galerkin_value(la: ModeLabel, lb: ModeLabel, lc: ModeLabel, aspect: float) -> float:
        """
        Analytic t_{a,b,c} = ½·∫ det(∇φ_a, ∇φ_b)·φ_c over the torus.

        Only sign choices with s_a·k_a + s_b·k_b + s_c·k_c = 0 contribute; each
        contributes the product of the exponential-basis coefficients times the
        torus area.
        """
        Ka = (la.wavevector[0] / aspect, la.wavevector[1])
        Kb = (lb.wavevector[0] / aspect, lb.wavevector[1])
        cross = Ka[0] * Kb[1] - Ka[1] * Kb[0]
        if cross == 0.0:
            return 0.0

        da, db = _DERIVATIVE_COEFS[la.kind], _DERIVATIVE_COEFS[lb.kind]
        vc = _VALUE_COEFS[lc.kind]
        resonant = 0j
        for ia, sa in enumerate(_SIGNS):
            for ib, sb in enumerate(_SIGNS):
                for ic, sc in enumerate(_SIGNS):
                    kx = sa * la.wavevector[0] + sb * lb.wavevector[0] + sc * lc.wavevector[0]
                    ky = sa * la.wavevector[1] + sb * lb.wavevector[1] + sc * lc.wavevector[1]
                    if kx == 0 and ky == 0:
                        resonant += da[ia] * db[ib] * vc[ic]
        if resonant == 0:
            return 0.0

        area = 4.0 * math.pi ** 2 * aspect
        norm = math.sqrt(2.0 / area)
        return 0.5 * norm ** 3 * cross * area * resonant.real

    @staticmethod
    def _from_canonical(canonical, N: int, source: TriadSource, basis=None) -> TriadTensor:
        """
        Expand canonical triples p < q < r with value T = t_{p,q,r} into the a < b
        storage: (p,q,r,T), (q,r,p,T) and (p,r,q,−T).
        """
        rows = []
        for p, q, r, value in canonical:
            rows.extend([(p, q, r, value), (q, r, p, value), (p, r, q, -value)])
        rows.sort()
        if rows:
            a, b, c, t = (np.array(col) for col in zip(*rows))
        else:
            a = b = c = np.zeros(0, dtype=np.int64)
            t = np.zeros(0)
        return TriadTensor(a=a, b=b, c=c, t=t, N=N, source=source, mode_basis=basis)

    @staticmethod
    def galerkin_triads(s: Spectrum) -> TriadTensor:
        """
        Nonzero Galerkin triad coefficients over the retained torus modes.

        Raises:
            NotTorusSourcedException: If the spectrum has no wavevectors.
        """
        basis = mode_basis(s)
        aspect = s.torus.aspect
        canonical = []
        for p, q, r in itertools.combinations(range(s.N), 3):
            value = TriadService.galerkin_value(basis[p], basis[q], basis[r], aspect)
            if value != 0.0:
                canonical.append((p, q, r, value))
        logger.debug(f"Tensor de Galerkin: {len(canonical)} tríadas canónicas sobre N={s.N}")
        return TriadService._from_canonical(canonical, s.N, TriadSource.GALERKIN, basis)

    @staticmethod
    def synthetic_triads(seed: int, density: float, magnitude: float, s: Spectrum) -> TriadTensor:
        """
        Random tensor over triples with three distinct eigenvalue pairs.

        Two draws are consumed per canonical triple whether or not it is kept, so
        the selected support depends only on (seed, density) and the values scale
        linearly with `magnitude`.
        """
        FieldValidator.validate_synthetic(density, magnitude)
        gen = derive_stream(seed, 0x7A1AD)
        canonical = []
        for p, q, r in itertools.combinations(range(s.N), 3):
            if len({p // 2, q // 2, r // 2}) < 3:
                continue
            keep, value = gen.random(), gen.uniform(-1.0, 1.0)
            if keep < density:
                canonical.append((p, q, r, magnitude * value))
        return TriadService._from_canonical(canonical, s.N, TriadSource.SYNTHETIC)

    @staticmethod
    def drift_weights(t: TriadTensor, s: Spectrum) -> np.ndarray:
        """2·(1/λ_a − 1/λ_b)·t for each stored a < b entry."""
        inv = s.inv_lam
        return 2.0 * (inv[t.a] - inv[t.b]) * t.t

    @staticmethod
    def eval_drift(t: TriadTensor, x, s: Spectrum) -> np.ndarray:
        """
        b(x)_c = Σ_{a,b} x_a·x_b·(1/λ_a − 1/λ_b)·t_{a,b,c}.

        Raises:
            DimensionMismatchException: If len(x) != N.
        """
        x = SpectrumValidator.validate_state(x, s)
        w = TriadService.drift_weights(t, s)
        return np.bincount(t.c, weights=w * x[t.a] * x[t.b], minlength=s.N)

    @staticmethod
    def eval_drift_batch(t: TriadTensor, states: np.ndarray, s: Spectrum) -> np.ndarray:
        states = np.atleast_2d(SpectrumValidator.validate_state(states, s))
        scatter = np.zeros((t.size, s.N))
        scatter[np.arange(t.size), t.c] = TriadService.drift_weights(t, s)
        return (states[:, t.a] * states[:, t.b]) @ scatter


class StirringService:
    """
    Familia de agitación {T_J, R_i}: enumeración, evaluación, rango mínimo
    proyectado y corrección de Itô.
    """

    @staticmethod
    def enumerate_stirring(s: Spectrum) -> StirringFamily:
        triples = [
            (k, l, m)
            for k, l, m in itertools.combinations(range(s.N), 3)
            if k // 2 < l // 2 < m // 2
        ]
        return StirringFamily(triples=np.array(triples, dtype=np.int64).reshape(-1, 3), n_rotations=s.n)

    @staticmethod
    def eval_stirring(f: StirringFamily, m: int, x, s: Spectrum) -> np.ndarray:
        """
        Z_m(x) with m zero-based: T_J for m < |J|, otherwise the rotation R_{m−|J|}.

        Raises:
            IndexOutOfRangeException: If m ∉ [0, M).
        """
        FieldValidator.validate_field_index(f, m)
        x = SpectrumValidator.validate_state(x, s)
        out = np.zeros(s.N)
        if m < f.n_triples:
            k, l, mm = (int(i) for i in f.triples[m])
            inv = s.inv_lam
            out[mm] = x[k] * x[l] * (inv[k] - inv[l])
            out[k] = x[l] * x[mm] * (inv[l] - inv[mm])
            out[l] = x[mm] * x[k] * (inv[mm] - inv[k])
        else:
            i = m - f.n_triples
            out[2 * i] = x[2 * i + 1]
            out[2 * i + 1] = -x[2 * i]
        return out

    @staticmethod
    def fields_matrix(f: StirringFamily, x, s: Spectrum) -> np.ndarray:
        """All fields at x as an (M, N) array, row m = Z_m(x)."""
        x = SpectrumValidator.validate_state(x, s)
        k, l, m, ckl, clm, cmk = _stirring_coefficients(f, s)
        Z = np.zeros((f.M, s.N))
        rows = np.arange(f.n_triples)
        Z[rows, m] = ckl * x[k] * x[l]
        Z[rows, k] = clm * x[l] * x[m]
        Z[rows, l] = cmk * x[m] * x[k]
        pairs = np.arange(f.n_rotations)
        Z[f.n_triples + pairs, 2 * pairs] = x[2 * pairs + 1]
        Z[f.n_triples + pairs, 2 * pairs + 1] = -x[2 * pairs]
        return Z

    @staticmethod
    def stirring_min_rank(f: StirringFamily, x, s: Spectrum) -> StirringRank:
        """
        Minimum over unit z ⟂ x, Λ⁻¹x of Σ_J ⟨T_J(x), z⟩²/|x|⁴ + Σ_i ⟨R_i(x), z⟩²/|x|².

        When x and Λ⁻¹x are colinear the complement is (N−1)-dimensional; the
        value is reported over that space and flagged as degenerate.

        Raises:
            ZeroStateException: If x = 0.
        """
        x = SpectrumValidator.validate_state(x, s)
        norm2 = math.fsum(x * x)
        if norm2 == 0.0:
            raise ZeroStateException()
        Z = StirringService.fields_matrix(f, x, s)
        rows = np.vstack([Z[: f.n_triples] / norm2, Z[f.n_triples:] / math.sqrt(norm2)])
        gram = rows.T @ rows
        basis = linalg.null_space(np.vstack([x, x * s.inv_lam]))
        dim = basis.shape[1]
        value = float(linalg.eigvalsh(basis.T @ gram @ basis, subset_by_index=[0, 0])[0])
        degenerate = dim == s.N - 1
        if degenerate:
            logger.debug("Complemento degenerado: x y Λ⁻¹x colineales")
        return StirringRank(value=max(value, 0.0), complement_dim=dim, degenerate=degenerate)

    @staticmethod
    def ito_correction(f: StirringFamily, x, kappa: float, eps: float, s: Spectrum) -> np.ndarray:
        """
        (κ/2ε)·Σ_m DZ_m(x)·Z_m(x), from the analytic Jacobians of the fields.

        Each rotation contributes −x on its own block.
        """
        x = SpectrumValidator.validate_state(x, s)
        k, l, m, ckl, clm, cmk = _stirring_coefficients(f, s)
        tm = ckl * x[k] * x[l]
        tk = clm * x[l] * x[m]
        tl = cmk * x[m] * x[k]
        N = s.N
        out = (
            np.bincount(m, weights=ckl * (x[l] * tk + x[k] * tl), minlength=N)
            + np.bincount(k, weights=clm * (x[m] * tl + x[l] * tm), minlength=N)
            + np.bincount(l, weights=cmk * (x[k] * tm + x[m] * tk), minlength=N)
        )
        return 0.5 * kappa / eps * (out - x)

    @staticmethod
    def fast_operator(t: TriadTensor, f: StirringFamily, s: Spectrum) -> FastOperator:
        """
        Fuse the triad drift and the stirring triples into one weighted quadratic form.
        """
        k, l, m, ckl, clm, cmk = _stirring_coefficients(f, s)
        owners = np.arange(1, f.n_triples + 1)
        terms = QuadraticTerms(
            a=np.concatenate([t.a, k, l, m]),
            b=np.concatenate([t.b, l, m, k]),
            c=np.concatenate([t.c, m, k, l]),
            coef=np.concatenate([TriadService.drift_weights(t, s), ckl, clm, cmk]),
            owner=np.concatenate([np.zeros(t.size, dtype=np.int64), owners, owners, owners]),
            n_owners=f.n_triples + 1,
        )
        return FastOperator(quadratic=terms, n_triples=f.n_triples, n_rotations=f.n_rotations)
