"""Finite Wiener-Ito chaos expansions and the Gamma-operator algebra.

A :class:`ChaosExpansion` represents F = f_0 + sum_q I_q(f_q) with finitely
many symmetric kernels over R^d.  Products use the multiplication formula

    I_p(f) I_q(g) = sum_r r! C(p,r) C(q,r) I_{p+q-2r}(f ~(x)_r g),

and the carre-du-champ type pairing <DF, -DL^{-1}G> is evaluated in closed
form on kernels, so the Malliavin derivative is never materialized.
"""
from __future__ import annotations

import math

import numpy as np

from .errors import OrderCapError, ShapeMismatchError
from .symtensor import SymTensor, inner_product, sym_contract

__all__ = [
    "DEFAULT_ORDER_CAP",
    "ChaosExpansion",
    "multiply",
    "expectation",
    "gamma_pair",
    "gamma",
    "cumulant_via_gamma",
    "cumulants_via_gamma",
    "moments",
    "poly_eval",
    "moments_to_cumulants",
    "cumulants_to_moments",
    "random_expansion",
    "covariance",
    "allclose",
]

DEFAULT_ORDER_CAP = 64


class ChaosExpansion:
    """F = constant + sum_q I_q(kernels[q]) over R^dim."""

    __slots__ = ("dim", "constant", "kernels")

    def __init__(self, dim, constant=0.0, kernels=None):
        self.dim = int(dim)
        self.constant = float(constant)
        ks = {}
        for q, f in (kernels or {}).items():
            if q < 1 or f.order != q:
                raise ShapeMismatchError("kernel order", q, f.order)
            if f.dim != self.dim:
                raise ShapeMismatchError("dim", self.dim, f.dim)
            ks[int(q)] = f
        self.kernels = dict(sorted(ks.items()))

    @classmethod
    def from_kernel(cls, f):
        """I_q(f); an order-0 tensor gives the constant expansion."""
        if f.order == 0:
            return cls(f.dim, f.values[0])
        return cls(f.dim, 0.0, {f.order: f})

    @classmethod
    def const(cls, c, dim):
        return cls(dim, c)

    @property
    def max_order(self):
        return max(self.kernels, default=0)

    def kernel(self, q):
        """The projection onto the q-th chaos, as a kernel (zero if absent)."""
        if q == 0:
            return SymTensor.scalar(self.constant, self.dim)
        return self.kernels.get(q, SymTensor.zeros(q, self.dim))

    def terms(self):
        """(order, kernel) pairs including the constant as an order-0 tensor."""
        yield 0, SymTensor.scalar(self.constant, self.dim)
        yield from self.kernels.items()

    def __add__(self, other):
        if isinstance(other, (int, float)):
            return ChaosExpansion(self.dim, self.constant + other, self.kernels)
        if not isinstance(other, ChaosExpansion):
            return NotImplemented
        if other.dim != self.dim:
            raise ShapeMismatchError("dim", self.dim, other.dim)
        ks = dict(self.kernels)
        for q, g in other.kernels.items():
            ks[q] = ks[q] + g if q in ks else g
        return ChaosExpansion(self.dim, self.constant + other.constant, ks)

    __radd__ = __add__

    def __mul__(self, other):
        if isinstance(other, ChaosExpansion):
            return multiply(self, other)
        c = float(other)
        return ChaosExpansion(self.dim, self.constant * c, {q: f * c for q, f in self.kernels.items()})

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        return self + (-other)

    def __repr__(self):
        return f"ChaosExpansion(dim={self.dim}, constant={self.constant!r}, orders={list(self.kernels)})"


def _accumulate(dim, pieces):
    """Sum (order, tensor) pieces into an expansion, in the order given."""
    acc = {}
    for n, t in pieces:
        acc[n] = acc[n] + t if n in acc else t
    const = acc.pop(0).values[0] if 0 in acc else 0.0
    return ChaosExpansion(dim, const, acc)


def _check(F, G):
    if F.dim != G.dim:
        raise ShapeMismatchError("dim", F.dim, G.dim)


def multiply(F, G, order_cap=DEFAULT_ORDER_CAP):
    """The product FG as a chaos expansion."""
    _check(F, G)
    top = F.max_order + G.max_order
    if top > order_cap:
        raise OrderCapError(top, order_cap)
    pieces = []
    for p, f in F.terms():
        for q, g in G.terms():
            for r in range(min(p, q) + 1):
                c = math.factorial(r) * math.comb(p, r) * math.comb(q, r)
                pieces.append((p + q - 2 * r, sym_contract(f, g, r) * c))
    return _accumulate(F.dim, pieces)


def expectation(F):
    return F.constant


def gamma_pair(F, G):
    """The chaos expansion of <DF, -DL^{-1}G>_H.

    For kernels f_p of F and g_q of G this contributes
    sum_{r=1}^{p^q} p (r-1)! C(p-1,r-1) C(q-1,r-1) I_{p+q-2r}(f_p ~(x)_r g_q).
    Constants of F and G drop out.
    """
    _check(F, G)
    pieces = []
    for p, f in F.kernels.items():
        for q, g in G.kernels.items():
            for r in range(1, min(p, q) + 1):
                c = p * math.factorial(r - 1) * math.comb(p - 1, r - 1) * math.comb(q - 1, r - 1)
                pieces.append((p + q - 2 * r, sym_contract(f, g, r) * c))
    return _accumulate(F.dim, pieces)


def gamma(F, j):
    """Gamma_j(F): Gamma_0 = F, Gamma_{j+1} = <DF, -DL^{-1} Gamma_j(F)>."""
    if j < 0:
        raise ValueError(f"j must be >= 0, got {j}")
    out = F
    for _ in range(j):
        out = gamma_pair(F, out)
    return out


def cumulant_via_gamma(F, s):
    """kappa_s(F) = (s-1)! E[Gamma_{s-1}(F)]."""
    if s < 1:
        raise ValueError(f"s must be >= 1, got {s}")
    return math.factorial(s - 1) * expectation(gamma(F, s - 1))


def cumulants_via_gamma(F, s_max):
    """kappa_1..kappa_{s_max}, sharing the Gamma iteration."""
    out = []
    g = F
    for s in range(1, s_max + 1):
        if s > 1:
            g = gamma_pair(F, g)
        out.append(math.factorial(s - 1) * expectation(g))
    return out


def moments(F, m, order_cap=DEFAULT_ORDER_CAP):
    """Raw moments E[F^k], k = 1..m, by repeated multiplication."""
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if m * F.max_order > order_cap:
        raise OrderCapError(m * F.max_order, order_cap)
    out = []
    power = F
    for k in range(1, m + 1):
        if k > 1:
            power = multiply(power, F, order_cap)
        out.append(expectation(power))
    return out


def poly_eval(F, coeffs, order_cap=DEFAULT_ORDER_CAP):
    """sum_k coeffs[k] F^k as a chaos expansion (Horner)."""
    coeffs = list(coeffs)
    out = ChaosExpansion.const(coeffs[-1] if coeffs else 0.0, F.dim)
    for c in reversed(coeffs[:-1]):
        out = multiply(out, F, order_cap) + c
    return out


def moments_to_cumulants(mu):
    """Invert E X^{m+1} = sum_s C(m,s) kappa_{s+1} E X^{m-s} for the cumulants.

    ``mu[k-1]`` is E X^k; returns kappa_1..kappa_len(mu).
    """
    mu = [1.0] + [float(x) for x in mu]
    kappa = [0.0]
    for m in range(len(mu) - 1):
        k = mu[m + 1] - sum(math.comb(m, s) * kappa[s + 1] * mu[m - s] for s in range(m))
        kappa.append(k)
    return kappa[1:]


def cumulants_to_moments(kappa):
    """Moments E X^1..E X^len(kappa) from cumulants via the same recursion."""
    kappa = [0.0] + [float(x) for x in kappa]
    mu = [1.0]
    for m in range(len(kappa) - 1):
        mu.append(sum(math.comb(m, s) * kappa[s + 1] * mu[m - s] for s in range(m + 1)))
    return mu[1:]


def random_expansion(rng, dim, orders, constant=True, scale=1.0):
    """Expansion with i.i.d. uniform[-scale, scale] coefficients; for tests and demos."""
    ks = {}
    for q in orders:
        n = math.comb(dim + q - 1, q)
        ks[q] = SymTensor(q, dim, rng.uniform(-scale, scale, n))
    c = float(rng.uniform(-scale, scale)) if constant else 0.0
    return ChaosExpansion(dim, c, ks)


def covariance(F, G):
    """Cov(F, G) = sum_q q! <f_q, g_q>."""
    _check(F, G)
    return sum(
        math.factorial(q) * inner_product(f, G.kernels[q]) for q, f in F.kernels.items() if q in G.kernels
    )


def allclose(F, G, rtol=1e-10, atol=1e-12):
    """Kernel-by-kernel closeness of two expansions (absent kernels count as zero)."""
    if F.dim != G.dim:
        return False
    if not np.isclose(F.constant, G.constant, rtol=rtol, atol=atol):
        return False
    for q in set(F.kernels) | set(G.kernels):
        if not np.allclose(F.kernel(q).values, G.kernel(q).values, rtol=rtol, atol=atol):
            return False
    return True
