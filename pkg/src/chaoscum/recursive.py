"""Closed-form cumulants of a single multiple integral F = I_q(f).

For s >= 3,

    kappa_s(F) = q! (s-1)! sum_rs c_q(rs) <(...((f ~(x)_{r_1} f) ~(x)_{r_2} f)...) ~(x)_{r_{s-2}} f, f>,

where rs = (r_1, ..., r_{s-2}) ranges over the admissible contraction
vectors produced by :func:`enumerate_rvectors` and c_q is an exact integer.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from .chaos import ChaosExpansion
from .errors import InadmissiblePrefixError
from .symtensor import contract, inner_product, norm, sym_contract

__all__ = [
    "RVector",
    "is_admissible",
    "enumerate_rvectors",
    "cq",
    "kappa_recursive",
    "cumulants_recursive",
    "gamma_expansion_chaos",
    "kappa4_contraction_form",
    "kappa4_nunugio_form",
]


@dataclass(frozen=True)
class RVector:
    q: int
    s: int
    rs: tuple

    def __post_init__(self):
        if not is_admissible(self.q, self.s, self.rs):
            raise ValueError(f"{self.rs} is not admissible for q={self.q}, s={self.s}")


def is_admissible(q, s, rs):
    """Check conditions (i)-(iv) literally, with no pruning shortcuts."""
    rs = tuple(rs)
    if len(rs) != s - 2:
        return False
    if any(not 1 <= r <= q for r in rs):  # (i)
        return False
    if 2 * sum(rs) != (s - 2) * q:  # (ii)
        return False
    if rs and rs[0] >= q:  # (iii), first term
        return False
    for k in range(1, s - 2):  # (iii): r_1 + ... + r_k < (k+1) q / 2
        if 2 * sum(rs[:k]) >= (k + 1) * q:
            return False
    for k in range(2, s - 1):  # (iv): r_k <= k q - 2 (r_1 + ... + r_{k-1})
        if rs[k - 1] > k * q - 2 * sum(rs[: k - 1]):
            return False
    return True


def enumerate_rvectors(q, s):
    """All admissible (r_1, ..., r_{s-2}) in lexicographic order.

    Depth-first: at depth k the running order of the iterated contraction is
    n = (k+1) q - 2 (r_1 + ... + r_k); r_{k+1} may not exceed min(q, n), the
    partial sum must stay below (k+2) q / 2 except at the last slot, and the
    remaining slots must be able to reach the target sum (s-2) q / 2.
    """
    if q < 2 or s < 3:
        raise ValueError(f"need q >= 2 and s >= 3, got q={q}, s={s}")
    if (s * q) % 2:
        return []
    slots = s - 2
    target = slots * q // 2
    out = []

    def walk(prefix, total):
        k = len(prefix)
        if k == slots:
            if total == target:
                out.append(tuple(prefix))
            return
        n = (k + 1) * q - 2 * total
        left = slots - k - 1
        for r in range(1, min(q, n) + 1):
            t = total + r
            if k + 1 < slots and 2 * t >= (k + 2) * q:
                break
            if t + left > target or t + left * q < target:
                continue
            prefix.append(r)
            walk(prefix, t)
            prefix.pop()

    walk([], 0)
    return out


@lru_cache(maxsize=None)
def _cq(q, rs):
    r = rs[-1]
    if len(rs) == 1:
        return q * math.factorial(r - 1) * math.comb(q - 1, r - 1) ** 2
    a = len(rs)
    top = a * q - 2 * sum(rs[:-1]) - 1
    if top < 0:
        raise InadmissiblePrefixError(q, rs)
    return q * math.factorial(r - 1) * math.comb(top, r - 1) * math.comb(q - 1, r - 1) * _cq(q, rs[:-1])


def cq(q, rs):
    """The exact integer constant c_q(r_1, ..., r_a)."""
    rs = tuple(int(r) for r in rs)
    if not rs or any(not 1 <= r <= q for r in rs):
        raise ValueError(f"need a nonempty prefix with entries in 1..{q}, got {rs}")
    return _cq(q, rs)


def _iterated(f, rs, cache):
    """(...((f ~(x)_{r_1} f) ~(x)_{r_2} f)...) ~(x)_{r_k} f, memoized by prefix."""
    if rs in cache:
        return cache[rs]
    base = f if len(rs) == 1 else _iterated(f, rs[:-1], cache)
    out = sym_contract(base, f, rs[-1])
    cache[rs] = out
    return out


def kappa_recursive(f, s):
    """kappa_s(I_q(f)) via the contraction formula."""
    q = f.order
    if q < 2:
        raise ValueError(f"kernel order must be >= 2, got {q}")
    if s < 1:
        raise ValueError(f"s must be >= 1, got {s}")
    if s == 1 or (s * q) % 2:
        return 0.0
    if s == 2:
        return math.factorial(q) * inner_product(f, f)
    cache = {}
    total = 0.0
    for rs in enumerate_rvectors(q, s):
        total += float(cq(q, rs)) * inner_product(_iterated(f, rs, cache), f)
    return math.factorial(q) * math.factorial(s - 1) * total


def cumulants_recursive(f, s_max):
    return [kappa_recursive(f, s) for s in range(1, s_max + 1)]


def gamma_expansion_chaos(f, s):
    """Gamma_{s-1}(I_q(f)) written out as a sum of multiple integrals.

    Sums over r_1..r_{s-1} with r_k <= min(q, k q - 2(r_1+...+r_{k-1})),
    partial sums r_1+...+r_k < (k+1) q / 2 for k <= s-2, and coefficient
    c_q(r_1, ..., r_{s-1}) on I_{sq - 2 sum r}(iterated contraction).
    """
    q = f.order
    if q < 2 or s < 2:
        raise ValueError(f"need q >= 2 and s >= 2, got q={q}, s={s}")
    slots = s - 1
    cache = {}
    acc = {}

    def walk(prefix, total):
        k = len(prefix)
        if k == slots:
            rs = tuple(prefix)
            n = s * q - 2 * total
            t = _iterated(f, rs, cache) * float(cq(q, rs))
            acc[n] = acc[n] + t if n in acc else t
            return
        if k and 2 * total >= (k + 1) * q:
            return
        cap = q if k == 0 else min(q, (k + 1) * q - 2 * total)
        for r in range(1, cap + 1):
            prefix.append(r)
            walk(prefix, total + r)
            prefix.pop()

    walk([], 0)
    const = acc.pop(0).values[0] if 0 in acc else 0.0
    return ChaosExpansion(f.dim, const, acc)


def kappa4_contraction_form(f):
    """kappa_4 = (3/q) sum_{r=1}^{q-1} r r!^2 C(q,r)^4 (2q-2r)! ||f ~(x)_r f||^2."""
    q = f.order
    total = 0.0
    for r in range(1, q):
        c = r * math.factorial(r) ** 2 * math.comb(q, r) ** 4 * math.factorial(2 * q - 2 * r)
        total += float(c) * norm(sym_contract(f, f, r)) ** 2
    return 3.0 * total / q


def kappa4_nunugio_form(f):
    """kappa_4 from both plain and symmetrized contraction norms."""
    q = f.order
    total = 0.0
    for r in range(1, q):
        c = math.factorial(q) ** 4 / (math.factorial(r) ** 2 * math.factorial(q - r) ** 2)
        plain = contract(f, f, r).norm() ** 2
        sym = norm(sym_contract(f, f, r)) ** 2
        total += c * (plain + math.comb(2 * q - 2 * r, q - r) * sym)
    return total
