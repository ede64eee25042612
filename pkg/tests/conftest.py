"""Shared oracles for the test suite.

These implement each quantity by the most direct route available
(explicit double sums, scipy expm, exhaustive enumeration) so the
library code is always checked against an independent computation.
"""

import numpy as np

from siplab.graphs import Graph


def symmetric_dirichlet_oracle(graph: Graph, phi) -> float:
    """(1 / 2|alpha|) sum_{x,y} c_xy alpha_x alpha_y (phi(x) - phi(y))^2."""
    a = graph.site_weights
    total = 0.0
    for x in range(graph.n):
        for y in range(graph.n):
            total += graph.edge_weights[x, y] * a[x] * a[y] * (phi[x] - phi[y]) ** 2
    return total / (2.0 * a.sum())


def sip_dirichlet_oracle(gen, f) -> float:
    """(1/2) sum over ordered state pairs of mu(eta) rate(eta -> eta')
    (f(eta) - f(eta'))^2, straight from the rate matrix."""
    mu = gen.measure.probabilities
    m = gen.matrix
    total = 0.0
    for s in range(gen.space.size):
        for t in range(gen.space.size):
            if s == t:
                continue
            total += mu[s] * m[s, t] * (f[s] - f[t]) ** 2
    return 0.5 * total


def hausdorff_gap(values_a, values_b) -> float:
    """Largest distance from any point of either set to the other set."""
    a = np.asarray(sorted(values_a), dtype=float)
    b = np.asarray(sorted(values_b), dtype=float)
    d_ab = max(float(np.abs(b - x).min()) for x in a)
    d_ba = max(float(np.abs(a - x).min()) for x in b)
    return max(d_ab, d_ba)
