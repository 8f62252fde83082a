"""Diagram (graph) formula for cumulants of I_q(f), plus a Wick-matching moment oracle.

K(s, q) is the set of connected, loopless multigraphs on the labeled
vertices 1..s in which every vertex has degree q.  Then

    kappa_s(I_q(f)) = sum_{gamma in K(s,q)} w(gamma) * contraction(f, gamma),

where w(gamma) counts the leg-level perfect matchings (each vertex owns q
legs, no leg paired with a leg of its own vertex) that project onto gamma.
"""
from __future__ import annotations

import itertools
import math
import string
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ShapeMismatchError

__all__ = [
    "Multigraph",
    "enumerate_K",
    "leg_matchings",
    "matching_counts",
    "weight",
    "weight_bruteforce",
    "graph_contraction",
    "graph_contraction_bruteforce",
    "kappa_diagram",
    "moment_via_matchings",
    "format_graph",
]

BRUTEFORCE_LIMIT = 10**6


@dataclass(frozen=True)
class Multigraph:
    """Multigraph on vertices 1..s; ``edges`` is a sorted tuple of ((i, j), k) with i < j."""

    s: int
    q: int
    edges: tuple

    @classmethod
    def from_edges(cls, s, q, pairs):
        """Build from an iterable of vertex pairs, repeated pairs adding multiplicity."""
        c = Counter(tuple(sorted(p)) for p in pairs)
        return cls(s, q, tuple(sorted(c.items())))

    @property
    def n_edges(self):
        return sum(k for _, k in self.edges)

    def degrees(self):
        deg = [0] * (self.s + 1)
        for (i, j), k in self.edges:
            deg[i] += k
            deg[j] += k
        return deg[1:]

    def is_connected(self):
        parent = list(range(self.s + 1))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for (i, j), _ in self.edges:
            parent[find(i)] = find(j)
        return len({find(v) for v in range(1, self.s + 1)}) == 1

    def is_valid(self):
        """Loopless, q-regular and connected, i.e. a member of K(s, q)."""
        return (
            all(i != j and k >= 1 for (i, j), k in self.edges)
            and all(deg == self.q for deg in self.degrees())
            and self.is_connected()
        )

    def __str__(self):
        return format_graph(self)


def format_graph(g):
    return " ".join(f"{i}-{j}:{k}" for (i, j), k in g.edges)


def enumerate_K(s, q):
    """All members of K(s, q), ordered by their sorted edge lists.

    Backtracks over vertex pairs (i, j) in lexicographic order, assigning
    each a multiplicity no larger than the remaining degree of either end;
    vertex i must be saturated before the search moves past its last pair.
    Connectivity is checked on complete assignments.
    """
    if s < 2 or q < 2:
        raise ValueError(f"need s >= 2 and q >= 2, got s={s}, q={q}")
    if (s * q) % 2:
        return []
    pairs = list(itertools.combinations(range(1, s + 1), 2))
    # vertex i has no pairs left once the search passes its last pair (i, s)
    closes = {idx: i for idx, (i, j) in enumerate(pairs) if j == s}
    remaining = [q] * (s + 1)
    chosen = []
    out = []

    def walk(idx):
        if idx == len(pairs):
            if all(r == 0 for r in remaining[1:]):
                g = Multigraph(s, q, tuple(chosen))
                if g.is_connected():
                    out.append(g)
            return
        i, j = pairs[idx]
        top = min(remaining[i], remaining[j], q - 1 if s > 2 else q)
        for k in range(top, -1, -1):
            if idx in closes and remaining[i] - k:
                continue
            remaining[i] -= k
            remaining[j] -= k
            if k:
                chosen.append(((i, j), k))
            walk(idx + 1)
            if k:
                chosen.pop()
            remaining[i] += k
            remaining[j] += k

    walk(0)
    out.sort(key=lambda g: g.edges)
    return out


def leg_matchings(s, q):
    """Yield every loopless perfect matching of the legs (vertex, slot), vertex in 1..s."""
    legs = [(v, p) for v in range(1, s + 1) for p in range(q)]

    def rec(free):
        if not free:
            yield ()
            return
        a, rest = free[0], free[1:]
        for n, b in enumerate(rest):
            if b[0] == a[0]:
                continue
            for tail in rec(rest[:n] + rest[n + 1 :]):
                yield ((a, b),) + tail

    if (s * q) % 2:
        return
    yield from rec(tuple(legs))


@lru_cache(maxsize=None)
def matching_counts(s, q):
    """Counter {multigraph: number of leg matchings projecting onto it} (connected or not)."""
    c = Counter()
    for m in leg_matchings(s, q):
        c[Multigraph.from_edges(s, q, ((a[0], b[0]) for a, b in m))] += 1
    return c


def weight(g):
    """w(gamma) = (q!)^s / prod_e k_e!."""
    out = math.factorial(g.q) ** g.s
    for _, k in g.edges:
        out //= math.factorial(k)
    return out


def weight_bruteforce(g):
    """w(gamma) by listing leg matchings; sq <= 12 or so."""
    return matching_counts(g.s, g.q)[g]


def _edge_labels(g):
    """Per-vertex lists of slot labels: an edge of multiplicity k owns k labels."""
    per_vertex = [[] for _ in range(g.s)]
    label = 0
    for (i, j), k in g.edges:
        for _ in range(k):
            per_vertex[i - 1].append(label)
            per_vertex[j - 1].append(label)
            label += 1
    return per_vertex, label


def graph_contraction(f, g):
    """Full sum of f_gamma over all index assignments to the edge slots.

    Contracts the s copies of f pairwise, always choosing the pair whose
    merged tensor has the fewest open indices.
    """
    if f.order != g.q:
        raise ShapeMismatchError("kernel order vs degree", f.order, g.q)
    per_vertex, n_labels = _edge_labels(g)
    if n_labels > len(string.ascii_letters):
        raise ValueError(f"too many edge slots ({n_labels})")
    dense = f.to_dense()
    letters = string.ascii_letters
    nodes = [(dense, tuple(labels)) for labels in per_vertex]
    while len(nodes) > 1:
        best = None
        for a, b in itertools.combinations(range(len(nodes)), 2):
            la, lb = set(nodes[a][1]), set(nodes[b][1])
            shared = la & lb
            key = (not shared, len(la ^ lb), a, b)
            if best is None or key < best[0]:
                best = (key, a, b)
        _, a, b = best
        (ta, la), (tb, lb) = nodes[a], nodes[b]
        out_labels = tuple(x for x in la if x not in lb) + tuple(x for x in lb if x not in la)
        spec = "{},{}->{}".format(
            "".join(letters[x] for x in la),
            "".join(letters[x] for x in lb),
            "".join(letters[x] for x in out_labels),
        )
        merged = np.einsum(spec, ta, tb)
        nodes = [n for k, n in enumerate(nodes) if k not in (a, b)] + [(merged, out_labels)]
    return float(nodes[0][0])


def graph_contraction_bruteforce(f, g):
    """Explicit sum over all d^{sq/2} slot assignments; oracle for small cases."""
    if f.order != g.q:
        raise ShapeMismatchError("kernel order vs degree", f.order, g.q)
    per_vertex, n_labels = _edge_labels(g)
    if f.dim**n_labels > BRUTEFORCE_LIMIT:
        raise ValueError(f"brute force needs {f.dim}^{n_labels} terms")
    dense = f.to_dense()
    total = 0.0
    for assign in itertools.product(range(f.dim), repeat=n_labels):
        term = 1.0
        for labels in per_vertex:
            term *= dense[tuple(assign[x] for x in labels)]
        total += term
    return total


def kappa_diagram(f, s):
    """kappa_s(I_q(f)) as a weighted sum over K(s, q); 0 when sq is odd."""
    q = f.order
    if (s * q) % 2:
        return 0.0
    return sum(weight(g) * graph_contraction(f, g) for g in enumerate_K(s, q))


def moment_via_matchings(f, m, max_legs=12):
    """E[I_q(f)^m] as a sum over all loopless leg matchings (Wick / diagram formula)."""
    q = f.order
    if (m * q) % 2 or m < 2:
        return 0.0
    if m * q > max_legs:
        raise ValueError(f"{m * q} legs exceeds max_legs={max_legs}")
    counts = matching_counts(m, q)
    return sum(n * graph_contraction(f, g) for g, n in sorted(counts.items(), key=lambda kv: kv[0].edges))
