import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.polynomial import polynomial as P

from chaoscum.chaos import (
    ChaosExpansion,
    allclose,
    covariance,
    cumulant_via_gamma,
    cumulants_to_moments,
    expectation,
    gamma,
    gamma_pair,
    moments,
    moments_to_cumulants,
    multiply,
    poly_eval,
)
from chaoscum.errors import OrderCapError, ShapeMismatchError
from chaoscum.symtensor import SymTensor, inner_product, norm, sym_contract
from conftest import close, expect_poly_of_gaussian, random_expansion, random_tensor

I = ChaosExpansion.from_kernel


def unit(i, d):
    return SymTensor.basis(i, d)


# multiply ------------------------------------------------------------------


def test_square_of_first_chaos():
    e = unit(0, 2)
    got = multiply(I(e), I(e))
    assert got.constant == 1.0
    np.testing.assert_allclose(got.kernel(2).values, sym_contract(e, e, 0).values)
    assert got.kernel(1).is_zero()


def test_product_of_orthogonal_first_chaos():
    e, f = unit(0, 2), unit(1, 2)
    got = multiply(I(e), I(f))
    assert got.constant == 0.0
    assert got.kernel(2)[(0, 1)] == 0.5


def test_product_of_second_chaos(rng):
    f, g = random_tensor(rng, 2, 3), random_tensor(rng, 2, 3)
    got = multiply(I(f), I(g))
    # r = 0, 1, 2 terms with r! C(2,r)^2 = 1, 4, 2
    expected = ChaosExpansion(3, 2 * inner_product(f, g), {4: sym_contract(f, g, 0), 2: 4 * sym_contract(f, g, 1)})
    assert allclose(got, expected, rtol=1e-13)


def test_multiply_dim_mismatch(rng):
    with pytest.raises(ShapeMismatchError):
        multiply(I(random_tensor(rng, 1, 2)), I(random_tensor(rng, 1, 3)))


def test_multiply_order_cap(rng):
    F = I(random_tensor(rng, 3, 2))
    with pytest.raises(OrderCapError):
        multiply(F, F, order_cap=5)
    with pytest.raises(OrderCapError):
        moments(F, 4, order_cap=10)


def test_multiply_commutative_associative(rng):
    for _ in range(5):
        A = random_expansion(rng, 2, [1, 2])
        B = random_expansion(rng, 2, [1, 3])
        C = random_expansion(rng, 2, [2])
        assert allclose(multiply(A, B), multiply(B, A), rtol=1e-12)
        assert allclose(multiply(multiply(A, B), C), multiply(A, multiply(B, C)), rtol=1e-12)


# expectation ------------------------------------------------------------------


def test_expectation_examples(rng):
    assert expectation(I(random_tensor(rng, 3, 2))) == 0.0
    assert expectation(ChaosExpansion.const(3.0, 2)) == 3.0
    for q in (1, 2, 3):
        f = random_tensor(rng, q, 3)
        assert expectation(multiply(I(f), I(f))) == pytest.approx(math.factorial(q) * norm(f) ** 2, rel=1e-12)


# gamma ------------------------------------------------------------------------


def test_gamma_pair_first_chaos():
    h = SymTensor(1, 3, np.array([0.6, 0.0, 0.8]))
    got = gamma_pair(I(h), I(h))
    assert got.constant == pytest.approx(1.0, rel=1e-15)
    assert not got.kernels


@pytest.mark.parametrize("q", [2, 3, 4])
def test_gamma1_single_chaos(q, rng):
    f = random_tensor(rng, q, 2)
    terms = {}
    for r in range(1, q + 1):
        c = q * math.factorial(r - 1) * math.comb(q - 1, r - 1) ** 2
        terms[2 * q - 2 * r] = sym_contract(f, f, r) * c
    const = terms.pop(0).values[0]
    assert allclose(gamma_pair(I(f), I(f)), ChaosExpansion(2, const, terms), rtol=1e-12)


def test_gamma_pair_expectation_is_covariance(rng):
    for _ in range(10):
        F = random_expansion(rng, 3, [1, 2, 3])
        G = random_expansion(rng, 3, [1, 2])
        brute = expectation(multiply(F, G)) - expectation(F) * expectation(G)
        assert close(expectation(gamma_pair(F, G)), brute, 1e-10)
        assert close(covariance(F, G), brute, 1e-10)


def test_gamma_examples(rng):
    F = random_expansion(rng, 2, [1, 2])
    assert gamma(F, 0) is F
    # Gamma_1(I_1(h)) = ||h||^2 = 1; a constant has zero derivative, so Gamma_j = 0 for j >= 2
    h = unit(1, 3)
    g1 = gamma(I(h), 1)
    assert g1.constant == 1.0 and not g1.kernels
    for j in range(2, 5):
        g = gamma(I(h), j)
        assert g.constant == 0.0 and not g.kernels
    for q in (2, 3):
        F = I(random_tensor(rng, q, 2))
        for s in range(1, 5):
            assert close(expectation(gamma(F, s)), expectation(multiply(F, gamma(F, s - 1))), 1e-10)


def test_cumulant_via_gamma_examples(rng):
    F = random_expansion(rng, 2, [1, 2])
    assert cumulant_via_gamma(F, 1) == F.constant
    f = random_tensor(rng, 3, 3)
    assert cumulant_via_gamma(I(f), 2) == pytest.approx(6 * norm(f) ** 2, rel=1e-12)
    # F = X^2 - 1: kappa_3 = E[(X^2 - 1)^3] (F is centered)
    cube = P.polypow([-1, 0, 1], 3)
    assert expect_poly_of_gaussian(cube) == 8
    assert cumulant_via_gamma(I(SymTensor(2, 1, [1.0])), 3) == pytest.approx(8.0, rel=1e-14)


# moments ----------------------------------------------------------------------


def test_moments_examples():
    assert moments(I(unit(0, 1)), 4) == pytest.approx([0, 1, 0, 3], abs=1e-14)
    assert moments(ChaosExpansion.const(1.5, 2), 4) == pytest.approx([1.5, 1.5**2, 1.5**3, 1.5**4])
    var = expect_poly_of_gaussian(P.polypow([-1, 0, 1], 2))
    assert var == 2
    assert moments(I(SymTensor(2, 1, [1.0])), 2)[1] == pytest.approx(var, rel=1e-14)


def test_moments_match_gaussian_polynomial():
    # F = X^2 - 1 with d = 1: every moment is a Gaussian polynomial expectation
    got = moments(I(SymTensor(2, 1, [1.0])), 6)
    expected = [expect_poly_of_gaussian(P.polypow([-1, 0, 1], k)) for k in range(1, 7)]
    np.testing.assert_allclose(got, expected, rtol=1e-13)


# moment <-> cumulant ----------------------------------------------------------


def test_conversion_examples(rng):
    assert moments_to_cumulants([0, 1, 0, 3]) == pytest.approx([0, 1, 0, 0], abs=1e-15)
    for _ in range(10):
        mu = rng.normal(size=3)
        k3 = mu[2] - 3 * mu[1] * mu[0] + 2 * mu[0] ** 3
        assert moments_to_cumulants(mu)[2] == pytest.approx(k3, rel=1e-12, abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-3, 3, allow_nan=False), min_size=1, max_size=8))
def test_conversion_round_trip(mu):
    back = cumulants_to_moments(moments_to_cumulants(mu))
    scale = max(1.0, max(abs(x) for x in mu)) ** len(mu)
    np.testing.assert_allclose(back, mu, rtol=1e-9, atol=1e-9 * scale)


# identities -------------------------------------------------------------------


def test_covariance_identity(rng):
    for _ in range(10):
        F = random_expansion(rng, 2, [1, 2, 3])
        G = random_expansion(rng, 2, [2, 3])
        lhs = expectation(multiply(F, G))
        rhs = expectation(F) * expectation(G) + expectation(gamma_pair(F, G))
        assert close(lhs, rhs, 1e-10)


@pytest.mark.parametrize("p", [2, 3])
def test_power_identity(p, rng):
    for _ in range(5):
        F = random_expansion(rng, 2, [1, 2])
        G = random_expansion(rng, 2, [1, 2, 3])
        Fp = poly_eval(F, [0] * p + [1])
        Fp1 = poly_eval(F, [0] * (p - 1) + [1])
        lhs = expectation(multiply(Fp, G))
        rhs = expectation(Fp) * expectation(G) + p * expectation(multiply(Fp1, gamma_pair(F, G)))
        assert close(lhs, rhs, 1e-10)


def barbour_sides(F, coeffs):
    deg = len(coeffs) - 1
    lhs = expectation(multiply(F, poly_eval(F, coeffs)))
    kappas = [cumulant_via_gamma(F, s + 1) for s in range(deg + 1)]
    rhs = 0.0
    der = np.array(coeffs, dtype=float)
    for s in range(deg + 1):
        rhs += kappas[s] / math.factorial(s) * expectation(poly_eval(F, der))
        der = P.polyder(der) if len(der) > 1 else np.array([0.0])
    return lhs, rhs


def test_polynomial_moment_expansion(rng):
    for _ in range(10):
        F = random_expansion(rng, 2, [1, 2])
        lhs, rhs = barbour_sides(F, rng.uniform(-1, 1, 4))
        assert close(lhs, rhs, 1e-9)


@pytest.mark.parametrize("q,d", [(1, 2), (2, 2), (2, 3), (3, 2), (3, 3)])
def test_gamma_cumulants_match_moment_route(q, d, rng):
    F = I(random_tensor(rng, q, d))
    via_moments = moments_to_cumulants(moments(F, 6))
    for s in range(1, 7):
        assert close(cumulant_via_gamma(F, s), via_moments[s - 1], 1e-9)


def test_gamma_cumulants_match_moment_route_mixed(rng):
    F = random_expansion(rng, 2, [1, 2])
    via_moments = moments_to_cumulants(moments(F, 5))
    for s in range(1, 6):
        assert close(cumulant_via_gamma(F, s), via_moments[s - 1], 1e-9)
