import io
import json
import math

import numpy as np
import pytest

from chaoscum.chaos import ChaosExpansion, multiply
from chaoscum.errors import ShapeMismatchError
from chaoscum.montecarlo import EstimatorResult, dump_jsonl, estimate_cumulants, evaluate, hermite, sample
from chaoscum.symtensor import SymTensor, norm, sym_contract
from conftest import random_expansion, random_tensor

I = ChaosExpansion.from_kernel


def test_hermite_examples():
    x = np.linspace(-3, 3, 13)
    np.testing.assert_allclose(hermite(0, x), 1.0)
    np.testing.assert_allclose(hermite(2, x), x**2 - 1, atol=1e-14)
    np.testing.assert_allclose(hermite(3, x), x**3 - 3 * x, atol=1e-13)
    assert hermite(4, 2.0) == 2.0**4 - 6 * 2.0**2 + 3
    with pytest.raises(ValueError):
        hermite(-1, 0.0)


def test_hermite_matches_numpy():
    x = np.linspace(-2, 2, 9)
    for q in range(8):
        np.testing.assert_allclose(hermite(q, x), np.polynomial.hermite_e.hermeval(x, [0] * q + [1]), atol=1e-10)


def test_evaluate_examples():
    x = np.array([0.7, -1.3])
    e1, e2 = SymTensor.basis(0, 2), SymTensor.basis(1, 2)
    assert evaluate(I(e1), x) == 0.7
    assert evaluate(I(sym_contract(e1, e1, 0)), x) == pytest.approx(0.7**2 - 1, rel=1e-14)
    assert evaluate(I(sym_contract(e1, e2, 0)), x) == pytest.approx(0.7 * -1.3, rel=1e-14)
    assert evaluate(ChaosExpansion.const(2.5, 2), x) == 2.5
    with pytest.raises(ShapeMismatchError):
        evaluate(I(e1), np.zeros(3))


def test_evaluate_batch_matches_single(rng):
    F = random_expansion(rng, 3, [1, 2, 3])
    xs = rng.standard_normal((20, 3))
    np.testing.assert_allclose(evaluate(F, xs), [evaluate(F, x) for x in xs], rtol=1e-13)


def test_pointwise_multiply(rng):
    for _ in range(10):
        F = random_expansion(rng, 3, [1, 2])
        G = random_expansion(rng, 3, [1, 3])
        xs = rng.standard_normal((50, 3))
        np.testing.assert_allclose(evaluate(multiply(F, G), xs), evaluate(F, xs) * evaluate(G, xs), rtol=1e-9, atol=1e-9)


def _mean_and_se(v):
    return v.mean(), v.std(ddof=1) / math.sqrt(len(v))


@pytest.mark.parametrize("q,d", [(1, 4), (2, 3), (3, 2), (3, 4)])
def test_isometry(q, d):
    rng = np.random.default_rng(1000 + 10 * q + d)
    f = random_tensor(rng, q, d)
    vals = sample(I(f), 10**6, rng)
    mean, se = _mean_and_se(vals**2)
    assert abs(mean - math.factorial(q) * norm(f) ** 2) <= 3 * se


@pytest.mark.parametrize("p,q", [(1, 2), (2, 3), (1, 3)])
def test_orthogonality(p, q):
    rng = np.random.default_rng(2000 + 10 * p + q)
    f, g = random_tensor(rng, p, 3), random_tensor(rng, q, 3)
    xs = rng.standard_normal((10**6, 3))
    mean, se = _mean_and_se(evaluate(I(f), xs) * evaluate(I(g), xs))
    assert abs(mean) <= 3 * se


def test_estimate_examples():
    res = estimate_cumulants(I(SymTensor.basis(0, 1)), 2, 10**5, seed=7)
    assert [r.s for r in res] == [1, 2]
    assert abs(res[1].z_score(1.0)) <= 3
    f = random_tensor(np.random.default_rng(3), 2, 3)
    res = estimate_cumulants(I(f), 2, 2 * 10**5, seed=8)
    assert abs(res[1].z_score(2 * norm(f) ** 2)) <= 3
    assert all(r.stderr >= 0 and r.N == 2 * 10**5 and r.seed == 8 for r in res)


def test_estimate_rejects_small_inputs():
    F = I(SymTensor.basis(0, 1))
    with pytest.raises(ValueError):
        estimate_cumulants(F, 2, 999, seed=0)
    with pytest.raises(ValueError):
        estimate_cumulants(F, 1, 10**4, seed=0)


def test_reproducible():
    F = I(SymTensor(2, 2, [1.0, 0.5, -0.25]))
    a = estimate_cumulants(F, 4, 20_000, seed=5)
    b = estimate_cumulants(F, 4, 20_000, seed=5)
    c = estimate_cumulants(F, 4, 20_000, seed=6)
    assert a == b
    assert a != c


def test_jsonl():
    res = [EstimatorResult(3, 7.9, 0.1, 10**6, 12345), EstimatorResult(4, 47.0, 1.5, 10**6, 12345)]
    buf = io.StringIO()
    dump_jsonl(res, buf)
    lines = buf.getvalue().splitlines()
    assert len(lines) == 2
    assert json.loads(lines[0]) == {"s": 3, "estimate": 7.9, "stderr": 0.1, "N": 10**6, "seed": 12345}
    assert res[0].z_score(8.0) == pytest.approx(-1.0)
