"""Monte Carlo evaluation of chaos expansions on Gaussian samples.

With X(e_k) = x_k i.i.d. N(0, 1), a symmetric basis element indexed by the
sorted multi-index alpha (coordinate counts m_1..m_d) satisfies

    I_q(sym(e_alpha)) = prod_k He_{m_k}(x_k),

with He the monic (probabilists') Hermite polynomials.  A kernel f then
evaluates to sum_alpha f(alpha) mult(alpha) prod_k He_{m_k}(x_k).
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .chaos import moments_to_cumulants
from .errors import ShapeMismatchError
from .symtensor import multiplicity, multisets

__all__ = [
    "GENERATOR",
    "EstimatorResult",
    "hermite",
    "evaluate",
    "sample",
    "estimate_cumulants",
    "dump_jsonl",
]

GENERATOR = "numpy.random.PCG64"
N_BATCHES = 50
_CHUNK = 1 << 16


@dataclass(frozen=True)
class EstimatorResult:
    s: int
    estimate: float
    stderr: float
    N: int
    seed: int

    def z_score(self, exact):
        if self.stderr == 0:
            return 0.0 if self.estimate == exact else math.inf
        return (self.estimate - exact) / self.stderr

    def to_json(self):
        return json.dumps(asdict(self))


def hermite(q, x):
    """Monic Hermite polynomial He_q at x (scalar or array)."""
    if q < 0:
        raise ValueError(f"q must be >= 0, got {q}")
    x = np.asarray(x, dtype=float)
    prev, cur = np.ones_like(x), x
    if q == 0:
        return prev if prev.ndim else float(prev)
    for k in range(1, q):
        prev, cur = cur, x * cur - k * prev
    return cur if cur.ndim else float(cur)


def _hermite_table(x, top):
    """H[..., k, m] = He_m(x[..., k]) for m = 0..top."""
    out = np.empty(x.shape + (top + 1,))
    out[..., 0] = 1.0
    if top >= 1:
        out[..., 1] = x
    for m in range(1, top):
        out[..., m + 1] = x * out[..., m] - m * out[..., m - 1]
    return out


def _counts(d, q):
    rows = multisets(d, q)
    c = np.zeros((len(rows), d), dtype=np.intp)
    for k in range(d):
        c[:, k] = (rows == k).sum(axis=1)
    return c


def evaluate(F, xs):
    """Value of F at the Gaussian sample(s) ``xs`` of shape (d,) or (N, d)."""
    xs = np.asarray(xs, dtype=float)
    single = xs.ndim == 1
    xs = np.atleast_2d(xs)
    if xs.shape[1] != F.dim:
        raise ShapeMismatchError("dim", F.dim, xs.shape[1])
    out = np.full(len(xs), F.constant)
    if F.kernels:
        table = _hermite_table(xs, F.max_order)
        cols = np.arange(F.dim)
        for q, f in F.kernels.items():
            coef = f.values * multiplicity(F.dim, q)
            counts = _counts(F.dim, q)
            # (N, n_alpha): product over coordinates of He_{m_k}(x_k)
            basis = np.prod(table[:, cols[None, :], counts], axis=2)
            out += basis @ coef
    return float(out[0]) if single else out


def sample(F, n, rng):
    """Evaluate F on n fresh standard normal samples from ``rng``, in chunks."""
    out = np.empty(n)
    for start in range(0, n, _CHUNK):
        stop = min(n, start + _CHUNK)
        out[start:stop] = evaluate(F, rng.standard_normal((stop - start, F.dim)))
    return out


def estimate_cumulants(F, s_max, N, seed, n_batches=N_BATCHES):
    """Sample cumulants kappa_1..kappa_{s_max} with batch-means standard errors.

    The N draws are split into ``n_batches`` batches, each drawn from its own
    sub-stream spawned from ``seed``, so the result does not depend on how
    batches are scheduled.  Point estimates come from the pooled raw moments;
    the standard error is the spread of per-batch cumulant estimates over
    sqrt(n_batches).
    """
    if N < 1000:
        raise ValueError(f"need N >= 1000, got {N}")
    if s_max < 2:
        raise ValueError(f"need s_max >= 2, got {s_max}")
    sizes = [len(a) for a in np.array_split(np.empty(N), n_batches)]
    streams = np.random.SeedSequence(seed).spawn(n_batches)
    raw = np.empty((n_batches, s_max))
    for b, (size, ss) in enumerate(zip(sizes, streams)):
        vals = sample(F, size, np.random.Generator(np.random.PCG64(ss)))
        p = np.ones_like(vals)
        for k in range(s_max):
            p = p * vals
            raw[b, k] = p.mean()
    w = np.array(sizes, dtype=float) / N
    pooled = moments_to_cumulants(w @ raw)
    per_batch = np.array([moments_to_cumulants(row) for row in raw])
    se = per_batch.std(axis=0, ddof=1) / math.sqrt(n_batches)
    return [
        EstimatorResult(s=s, estimate=float(pooled[s - 1]), stderr=float(se[s - 1]), N=int(N), seed=int(seed))
        for s in range(1, s_max + 1)
    ]


def dump_jsonl(results, stream):
    for r in results:
        stream.write(r.to_json() + "\n")
