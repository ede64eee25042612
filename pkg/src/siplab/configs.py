"""Enumeration and measure theory of k-particle occupation configurations.

A configuration is a vector of n nonnegative occupation numbers summing
to k (a weak composition of k into n parts).  The space is ordered
lexicographically; rank and unrank are computed combinatorially from
binomial counts, without table lookups, and agree with the enumerated
list order.

The attached probability law weights a configuration eta by the product
over sites of Gamma(alpha_x + eta_x) / (Gamma(alpha_x) eta_x!), with the
gamma ratios evaluated as rising factorials in log space.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, logsumexp

from .errors import InputError, StateCapError
from .graphs import Graph

DEFAULT_STATE_CAP = 20_000


def state_cap() -> int:
    """Active configuration-space cap; SIPLAB_STATE_CAP overrides the default."""
    raw = os.environ.get("SIPLAB_STATE_CAP")
    if raw is None:
        return DEFAULT_STATE_CAP
    try:
        cap = int(raw)
    except ValueError as exc:
        raise InputError(f"SIPLAB_STATE_CAP must be an integer, got {raw!r}") from exc
    if cap <= 0:
        raise InputError("SIPLAB_STATE_CAP must be positive")
    return cap


def space_size(n: int, k: int) -> int:
    return math.comb(n + k - 1, n - 1)


def rank_composition(eta) -> int:
    """Lexicographic rank of a weak composition among those with equal sum."""
    eta = list(eta)
    n = len(eta)
    rem = sum(eta)
    r = 0
    for i in range(n - 1):
        parts = n - i - 1
        for v in range(eta[i]):
            r += math.comb(rem - v + parts - 1, parts - 1)
        rem -= eta[i]
    return r


def unrank_composition(r: int, n: int, k: int) -> tuple:
    eta = [0] * n
    rem = k
    for i in range(n - 1):
        parts = n - i - 1
        v = 0
        while True:
            count = math.comb(rem - v + parts - 1, parts - 1)
            if r < count:
                break
            r -= count
            v += 1
        eta[i] = v
        rem -= v
    eta[n - 1] = rem
    return tuple(eta)


@dataclass(frozen=True)
class ConfigSpace:
    """All occupation vectors with n sites and k particles, in lex order."""

    n: int
    k: int
    occupations: np.ndarray

    @property
    def size(self) -> int:
        return self.occupations.shape[0]

    def rank(self, eta) -> int:
        return rank_composition(eta)

    def unrank(self, r: int) -> tuple:
        return unrank_composition(r, self.n, self.k)


def _compositions(n: int, k: int):
    """Yield weak compositions of k into n parts in ascending lex order."""
    if n == 1:
        yield (k,)
        return
    for first in range(k + 1):
        for rest in _compositions(n - 1, k - first):
            yield (first,) + rest


def enumerate_configs(n: int, k: int, cap: int | None = None) -> ConfigSpace:
    if n < 1 or k < 0:
        raise InputError(f"need n >= 1 and k >= 0, got n={n}, k={k}")
    size = space_size(n, k)
    limit = state_cap() if cap is None else cap
    if size > limit:
        raise StateCapError(f"configuration space with n={n}, k={k} has {size} "
                            f"states, exceeding the cap of {limit}")
    occ = np.array(list(_compositions(n, k)), dtype=np.int64).reshape(size, n)
    occ.setflags(write=False)
    return ConfigSpace(n, k, occ)


@dataclass(frozen=True)
class SipMeasure:
    """Reversible probability law of the k-particle inclusion dynamics."""

    space: ConfigSpace
    alpha: np.ndarray
    probabilities: np.ndarray
    log_normalization: float


def log_rising(base: float, count: int) -> float:
    """log of base (base+1) ... (base+count-1); empty product is 0."""
    return float(sum(math.log(base + j) for j in range(count)))


def sip_measure(graph: Graph, space: ConfigSpace) -> SipMeasure:
    if graph.n != space.n:
        raise InputError(f"graph has {graph.n} sites, space has {space.n}")
    alpha = graph.site_weights
    k = space.k
    # rising-factorial table: table[x, m] = log alpha_x (alpha_x+1)...(alpha_x+m-1)
    table = np.zeros((space.n, k + 1))
    for x in range(space.n):
        table[x, 1:] = np.cumsum(np.log(alpha[x] + np.arange(k)))
    occ = space.occupations
    logw = table[np.arange(space.n)[None, :], occ].sum(axis=1)
    logw -= gammaln(occ + 1.0).sum(axis=1)
    log_z = float(logsumexp(logw))
    closed = log_rising(graph.alpha_total, k) - gammaln(k + 1.0)
    if abs(log_z - closed) > 1e-10 * max(1.0, abs(closed)):
        raise InputError(f"normalization mismatch: summed {log_z:.15g}, "
                         f"closed form {closed:.15g}")
    probs = np.exp(logw - log_z)
    probs /= probs.sum()
    probs.setflags(write=False)
    return SipMeasure(space, alpha, probs, log_z)


def inner_product(mu: SipMeasure, f, g) -> float:
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    if f.shape != (mu.space.size,) or g.shape != (mu.space.size,):
        raise InputError(f"functions must have length {mu.space.size}")
    return float(mu.probabilities @ (f * g))


def mean(mu: SipMeasure, f) -> float:
    return inner_product(mu, f, np.ones(mu.space.size))


def variance(mu: SipMeasure, f) -> float:
    m = mean(mu, f)
    return inner_product(mu, f, f) - m * m
