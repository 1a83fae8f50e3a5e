"""Test de Welch para comparar algoritmos."""
import numpy as np
import pytest

from coteach.exceptions import ConfigError
from coteach.services.stats import is_significant, welch_t_test


def test_corrimiento_claro_es_significativo(rng):
    a = rng.normal(0.0, 0.1, size=30)
    b = rng.permutation(a) + 1.0
    p = welch_t_test(a, b)
    assert p < 1e-6
    assert is_significant(p)


def test_misma_muestra_no_es_significativa(rng):
    a = rng.normal(size=10)
    assert welch_t_test(a, a.copy()) == pytest.approx(1.0)


def test_grupos_constantes():
    assert welch_t_test([0.5, 0.5], [0.5, 0.5, 0.5]) == 1.0
    assert welch_t_test([0.0, 0.0], [0.77, 0.77]) == 0.0


def test_pocas_muestras():
    with pytest.raises(ConfigError):
        welch_t_test([1.0], [1.0, 2.0])


def test_umbral_estricto():
    assert not is_significant(0.05)
    assert is_significant(0.049, 0.05)
    assert not is_significant(np.float64(0.2))
