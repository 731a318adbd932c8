"""
Fixtures compartidas por las pruebas del laboratorio.
El sistema de referencia es el toro delgado de aspecto 0.7 con n = 4 pares.
"""

import numpy as np
import pytest

from apps.spectrum.services import BoundService, SpectrumService
from apps.spectrum.streams import derive_stream

TORUS_ASPECT = 0.7
TORUS_WAVEVECTORS = [(0, 1), (1, 0), (1, 1), (0, 2)]


@pytest.fixture
def torus_spectrum():
    return SpectrumService.build_torus_spectrum(TORUS_ASPECT, TORUS_WAVEVECTORS)


@pytest.fixture
def explicit_spectrum():
    return SpectrumService.explicit_spectrum([1.0, 1.7, 2.9, 4.2, 5.5])


@pytest.fixture
def params(torus_spectrum):
    return SpectrumService.make_params(1.0, [0.0] * torus_spectrum.n, 0.5, 0.5, torus_spectrum)


@pytest.fixture
def hetero_params(torus_spectrum):
    return SpectrumService.make_params(1.0, [0.0, -0.3, -0.5, -0.7], 0.5, 0.5, torus_spectrum)


@pytest.fixture
def budgets(params, torus_spectrum):
    return BoundService.forcing_budgets(params, torus_spectrum)


@pytest.fixture
def rng():
    return derive_stream(12345, 0)


@pytest.fixture
def random_states(torus_spectrum):
    gen = derive_stream(777, 1)
    return gen.normal(size=(200, torus_spectrum.N)) * gen.uniform(0.1, 3.0, size=(200, 1))


@pytest.fixture
def lab_output(tmp_path, settings):
    settings.LAB_OUTPUT_DIR = tmp_path
    return tmp_path


def unit(N: int, *indices: int) -> np.ndarray:
    x = np.zeros(N)
    for i in indices:
        x[i] = 1.0
    return x
