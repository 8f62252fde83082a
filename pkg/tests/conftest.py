import itertools
import math

import numpy as np
import pytest

from chaoscum.chaos import ChaosExpansion
from chaoscum.symtensor import SymTensor


def random_tensor(rng, q, d, scale=1.0):
    return SymTensor(q, d, rng.uniform(-scale, scale, math.comb(d + q - 1, q)))


def random_expansion(rng, d, orders, constant=True):
    ks = {q: random_tensor(rng, q, d) for q in orders}
    return ChaosExpansion(d, float(rng.uniform(-1, 1)) if constant else 0.0, ks)


def close(a, b, rtol, atol=1e-12):
    return abs(a - b) <= max(rtol * max(abs(a), abs(b)), atol)


def dense_symmetrize(arr):
    n = arr.ndim
    if n == 0:
        return arr
    return sum(np.transpose(arr, p) for p in itertools.permutations(range(n))) / math.factorial(n)


def gaussian_moment(k):
    """E[X^k] for X ~ N(0, 1): (k-1)!! for even k, 0 otherwise."""
    if k % 2:
        return 0
    return math.prod(range(k - 1, 0, -2))


def expect_poly_of_gaussian(coeffs):
    """E[p(X)] for p(x) = sum coeffs[k] x^k, using exact Gaussian moments."""
    return sum(c * gaussian_moment(k) for k, c in enumerate(coeffs))


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
