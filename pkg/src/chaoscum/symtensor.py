"""Symmetric tensors over R^d stored on sorted multi-indices.

A symmetric tensor f of order q is determined by its values on
non-decreasing index tuples alpha = (i_1 <= ... <= i_q).  Those tuples are
enumerated in the lexicographic order of
``itertools.combinations_with_replacement(range(d), q)`` and the values live
in a flat float array aligned with that enumeration.  Indices are 0-based in
the Python API (the JSON kernel format is 1-based, see :mod:`chaoscum.io`).

Contractions and symmetrizations are driven by cached index plans, so each
(d, p, q, r) combination pays the Python bookkeeping cost only once and the
numerical work is plain numpy.
"""
from __future__ import annotations

import itertools
import math
from collections import Counter
from functools import lru_cache

import numpy as np

from .errors import ContractionOrderError, ShapeMismatchError

__all__ = [
    "SymTensor",
    "BlockTensor",
    "multisets",
    "multiplicity",
    "inner_product",
    "contract",
    "symmetrize",
    "sym_contract",
    "norm",
    "scale",
    "add",
]


# ---------------------------------------------------------------------------
# index tables


@lru_cache(maxsize=None)
def multisets(d, n):
    """Sorted index tuples of length n over range(d), as an (M, n) int array."""
    rows = list(itertools.combinations_with_replacement(range(d), n))
    out = np.array(rows, dtype=np.intp).reshape(len(rows), n)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=None)
def _rank(d, n):
    return {alpha: k for k, alpha in enumerate(map(tuple, multisets(d, n).tolist()))}


def _count_arrangements(alpha):
    # n! / prod(m_c!) computed exactly
    out = math.factorial(len(alpha))
    for m in Counter(alpha).values():
        out //= math.factorial(m)
    return out


@lru_cache(maxsize=None)
def multiplicity(d, n):
    """Number of ordered tuples that sort to each multi-index (float array)."""
    out = np.array([float(_count_arrangements(a)) for a in map(tuple, multisets(d, n).tolist())])
    out.setflags(write=False)
    return out


def _lookup(d, rows):
    """Positions of already-sorted index rows in the table of their length."""
    n = rows.shape[-1]
    if n == 0:
        return np.zeros(rows.shape[:-1], dtype=np.intp)
    rank = _rank(d, n)
    flat = rows.reshape(-1, n)
    pos = np.fromiter((rank[t] for t in map(tuple, flat.tolist())), dtype=np.intp, count=len(flat))
    return pos.reshape(rows.shape[:-1])


@lru_cache(maxsize=None)
def _contract_plan(d, p, q, r):
    """Index plan for (f (x)_r g)(alpha; beta) = sum_kappa mult(kappa) f(alpha+kappa) g(beta+kappa)."""
    a_rows = multisets(d, p - r)
    b_rows = multisets(d, q - r)
    k_rows = multisets(d, r)

    def merged(rows):
        both = np.concatenate(
            [
                np.broadcast_to(rows[:, None, :], (len(rows), len(k_rows), rows.shape[1])),
                np.broadcast_to(k_rows[None, :, :], (len(rows), len(k_rows), r)),
            ],
            axis=2,
        )
        return _lookup(d, np.sort(both, axis=2))

    fa = merged(a_rows)
    gb = merged(b_rows)
    return fa, gb, multiplicity(d, r)


@lru_cache(maxsize=None)
def _symmetrize_plan(d, a, b):
    """Target position and interleaving weight N_alpha N_beta / N_gamma per (alpha, beta)."""
    a_rows = multisets(d, a)
    b_rows = multisets(d, b)
    both = np.concatenate(
        [
            np.broadcast_to(a_rows[:, None, :], (len(a_rows), len(b_rows), a)),
            np.broadcast_to(b_rows[None, :, :], (len(a_rows), len(b_rows), b)),
        ],
        axis=2,
    )
    pos = _lookup(d, np.sort(both, axis=2))
    weight = np.outer(multiplicity(d, a), multiplicity(d, b)) / multiplicity(d, a + b)[pos]
    return pos, weight


# ---------------------------------------------------------------------------
# tensor types


class SymTensor:
    """Symmetric tensor of order ``order`` over R^``dim``.

    ``values[k]`` is f(alpha_k) where alpha_k is row k of ``multisets(dim, order)``.
    Instances are treated as immutable.
    """

    __slots__ = ("order", "dim", "values")

    def __init__(self, order, dim, values=None):
        if order < 0 or dim < 1:
            raise ValueError(f"need order >= 0 and dim >= 1, got order={order}, dim={dim}")
        size = math.comb(dim + order - 1, order)
        if values is None:
            values = np.zeros(size)
        values = np.array(values, dtype=float).reshape(-1)
        if values.shape != (size,):
            raise ShapeMismatchError("coefficient count", size, values.shape[0])
        values.setflags(write=False)
        self.order = int(order)
        self.dim = int(dim)
        self.values = values

    # constructors -------------------------------------------------------

    @classmethod
    def zeros(cls, order, dim):
        return cls(order, dim)

    @classmethod
    def scalar(cls, c, dim):
        return cls(0, dim, [c])

    @classmethod
    def basis(cls, i, dim):
        """The order-1 basis vector e_i (0-based)."""
        v = np.zeros(dim)
        v[i] = 1.0
        return cls(1, dim, v)

    @classmethod
    def from_dict(cls, order, dim, coeffs):
        """Build from ``{sorted index tuple: value}``; missing entries are zero."""
        rank = _rank(dim, order)
        values = np.zeros(len(rank))
        for idx, val in coeffs.items():
            idx = tuple(idx)
            if list(idx) != sorted(idx):
                raise ValueError(f"index {idx} is not sorted")
            if idx not in rank:
                raise ValueError(f"index {idx} out of range for order={order}, dim={dim}")
            values[rank[idx]] = val
        return cls(order, dim, values)

    @classmethod
    def from_dense(cls, arr):
        """Symmetrize a dense (d,)*q array and store it."""
        arr = np.asarray(arr, dtype=float)
        q = arr.ndim
        d = arr.shape[0] if q else 1
        if q and any(n != d for n in arr.shape):
            raise ShapeMismatchError("axis length", d, arr.shape)
        if q:
            arr = sum(np.transpose(arr, perm) for perm in itertools.permutations(range(q))) / math.factorial(q)
        rows = multisets(d, q)
        return cls(q, d, arr[tuple(rows.T)] if q else [float(arr)])

    @classmethod
    def from_matrix(cls, a):
        """Order-2 tensor from a symmetric matrix."""
        a = np.asarray(a, dtype=float)
        if not np.allclose(a, a.T):
            raise ValueError("matrix is not symmetric")
        return cls.from_dense(a)

    # views -------------------------------------------------------------

    @property
    def coeffs(self):
        """``{sorted index tuple: value}`` for every stored entry."""
        return dict(zip(map(tuple, multisets(self.dim, self.order).tolist()), self.values.tolist()))

    def __getitem__(self, idx):
        idx = tuple(sorted(idx))
        return float(self.values[_rank(self.dim, self.order)[idx]])

    def to_dense(self):
        """Full (d,)*q array; for small tensors and tests."""
        q, d = self.order, self.dim
        if q == 0:
            return np.array(self.values[0])
        out = np.empty((d,) * q)
        rank = _rank(d, q)
        for full in itertools.product(range(d), repeat=q):
            out[full] = self.values[rank[tuple(sorted(full))]]
        return out

    def is_zero(self):
        return not np.any(self.values)

    def __repr__(self):
        return f"SymTensor(order={self.order}, dim={self.dim}, nnz={np.count_nonzero(self.values)})"

    # arithmetic --------------------------------------------------------

    def _check_same(self, other):
        if not isinstance(other, SymTensor):
            return NotImplemented
        if self.order != other.order:
            raise ShapeMismatchError("order", self.order, other.order)
        if self.dim != other.dim:
            raise ShapeMismatchError("dim", self.dim, other.dim)
        return True

    def __add__(self, other):
        if self._check_same(other) is NotImplemented:
            return NotImplemented
        return SymTensor(self.order, self.dim, self.values + other.values)

    def __sub__(self, other):
        if self._check_same(other) is NotImplemented:
            return NotImplemented
        return SymTensor(self.order, self.dim, self.values - other.values)

    def __mul__(self, c):
        if isinstance(c, SymTensor):
            return NotImplemented
        return SymTensor(self.order, self.dim, self.values * float(c))

    __rmul__ = __mul__

    def __truediv__(self, c):
        return SymTensor(self.order, self.dim, self.values / float(c))

    def __neg__(self):
        return SymTensor(self.order, self.dim, -self.values)

    def __eq__(self, other):
        if not isinstance(other, SymTensor):
            return NotImplemented
        return self.order == other.order and self.dim == other.dim and np.array_equal(self.values, other.values)

    __hash__ = None


class BlockTensor:
    """Tensor symmetric within two index blocks, e.g. the output of :func:`contract`.

    ``values[i, j]`` is t(alpha_i; beta_j) with alpha_i, beta_j sorted
    multi-indices of orders ``block_orders[0]`` and ``block_orders[1]``.
    """

    __slots__ = ("block_orders", "dim", "values")

    def __init__(self, block_orders, dim, values):
        a, b = (int(x) for x in block_orders)
        values = np.array(values, dtype=float)
        shape = (math.comb(dim + a - 1, a), math.comb(dim + b - 1, b))
        if values.shape != shape:
            raise ShapeMismatchError("block shape", shape, values.shape)
        values.setflags(write=False)
        self.block_orders = (a, b)
        self.dim = int(dim)
        self.values = values

    @classmethod
    def from_symmetric(cls, f, split):
        """View a symmetric tensor as a block tensor with first block of order ``split``."""
        a, b = split, f.order - split
        pos, _ = _symmetrize_plan(f.dim, a, b)
        return cls((a, b), f.dim, f.values[pos])

    @property
    def order(self):
        return sum(self.block_orders)

    def _weights(self):
        a, b = self.block_orders
        return np.outer(multiplicity(self.dim, a), multiplicity(self.dim, b))

    def to_dense(self):
        a, b = self.block_orders
        d = self.dim
        if a + b == 0:
            return np.array(self.values[0, 0])
        out = np.empty((d,) * (a + b))
        ra, rb = _rank(d, a), _rank(d, b)
        for full in itertools.product(range(d), repeat=a + b):
            out[full] = self.values[ra[tuple(sorted(full[:a]))], rb[tuple(sorted(full[a:]))]]
        return out

    def norm(self):
        return math.sqrt(float(np.sum(self._weights() * self.values**2)))

    def inner(self, h):
        """<t, h> in H^{(x) n} against a symmetric tensor h of the same total order."""
        if h.order != self.order:
            raise ShapeMismatchError("order", self.order, h.order)
        if h.dim != self.dim:
            raise ShapeMismatchError("dim", self.dim, h.dim)
        pos, _ = _symmetrize_plan(self.dim, *self.block_orders)
        return float(np.sum(self._weights() * self.values * h.values[pos]))

    def __repr__(self):
        return f"BlockTensor(block_orders={self.block_orders}, dim={self.dim})"


# ---------------------------------------------------------------------------
# operations


def _check_dim(f, g):
    if f.dim != g.dim:
        raise ShapeMismatchError("dim", f.dim, g.dim)


def inner_product(f, g):
    """<f, g> summed over all d^q index tuples."""
    _check_dim(f, g)
    if f.order != g.order:
        raise ShapeMismatchError("order", f.order, g.order)
    return float(np.dot(multiplicity(f.dim, f.order) * f.values, g.values))


def contract(f, g, r):
    """The (non-symmetric) contraction f (x)_r g as a :class:`BlockTensor`."""
    _check_dim(f, g)
    p, q = f.order, g.order
    if not 0 <= r <= min(p, q):
        raise ContractionOrderError(r, p, q)
    fa, gb, wk = _contract_plan(f.dim, p, q, r)
    values = (f.values[fa] * wk) @ g.values[gb].T
    return BlockTensor((p - r, q - r), f.dim, values)


def symmetrize(t):
    """Average a block tensor over all permutations of its indices.

    Each (alpha, beta) entry is spread onto the merged multiset gamma with
    weight N_alpha N_beta / N_gamma, the share of gamma's arrangements whose
    first block sorts to alpha.
    """
    if isinstance(t, SymTensor):
        return t
    a, b = t.block_orders
    pos, weight = _symmetrize_plan(t.dim, a, b)
    size = math.comb(t.dim + a + b - 1, a + b)
    values = np.bincount(pos.ravel(), weights=(weight * t.values).ravel(), minlength=size)
    return SymTensor(a + b, t.dim, values)


def sym_contract(f, g, r):
    """f ~(x)_r g: the symmetrized contraction."""
    return symmetrize(contract(f, g, r))


def norm(f):
    return math.sqrt(max(inner_product(f, f), 0.0))


def scale(f, c):
    return f * c


def add(f, g):
    return f + g
