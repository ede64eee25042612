"""Finite weighted graphs and the single-particle random walk on them.

A graph is a vertex set {0, .., n-1} with symmetric nonnegative edge
rates c[x, y] and strictly positive site weights alpha[x].  The walk
jumps from x to y at rate c[x, y] * alpha[y], which makes it reversible
with respect to the probability vector alpha / sum(alpha).

Spectra are computed by symmetrizing the negative generator with the
square root of the reversible measure and running a dense symmetric
eigensolve, so eigenvalues are real by construction and eigenfunctions
come back orthonormal in the weighted L2 inner product.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg

from .errors import EigensolverError, InputError

# Identity residuals are checked at 1e-10 and eigenvalue equalities at
# 1e-9, both scaled by the size of the matrix entries involved.
RESIDUAL_RTOL = 1e-10
EIGENVALUE_RTOL = 1e-9


def residual_tol(scale: float, rtol: float = RESIDUAL_RTOL) -> float:
    return rtol * max(1.0, float(scale))


def _count_components(weights: np.ndarray) -> int:
    """Union-find over the positive-weight edges."""
    n = weights.shape[0]
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for x in range(n):
        for y in range(x + 1, n):
            if weights[x, y] > 0.0:
                rx, ry = find(x), find(y)
                if rx != ry:
                    parent[rx] = ry
    return len({find(x) for x in range(n)})


@dataclass(frozen=True)
class Graph:
    """Immutable weighted graph with site weights.

    edge_weights must be symmetric with zero diagonal and nonnegative
    entries; site_weights must be strictly positive.  Connectivity of
    the positive-weight edge set is computed once and recorded.
    """

    n: int
    edge_weights: np.ndarray
    site_weights: np.ndarray

    def __post_init__(self):
        if self.n < 2:
            raise InputError(f"graph needs at least 2 vertices, got n={self.n}")
        w = np.asarray(self.edge_weights, dtype=float)
        a = np.asarray(self.site_weights, dtype=float)
        if w.shape != (self.n, self.n):
            raise InputError(f"edge_weights must be {self.n}x{self.n}, got {w.shape}")
        if a.shape != (self.n,):
            raise InputError(f"site_weights must have length {self.n}, got {a.shape}")
        if not np.array_equal(w, w.T):
            raise InputError("edge_weights must be symmetric")
        if np.any(np.diag(w) != 0.0):
            raise InputError("edge_weights must have zero diagonal")
        if np.any(w < 0.0):
            raise InputError("edge_weights must be nonnegative")
        if np.any(a <= 0.0) or not np.all(np.isfinite(a)):
            raise InputError("site_weights must be strictly positive and finite")
        w.setflags(write=False)
        a.setflags(write=False)
        object.__setattr__(self, "edge_weights", w)
        object.__setattr__(self, "site_weights", a)
        object.__setattr__(self, "components", _count_components(w))

    @property
    def connected(self) -> bool:
        return self.components == 1

    @property
    def alpha_total(self) -> float:
        return float(self.site_weights.sum())

    @property
    def alpha_min(self) -> float:
        return float(self.site_weights.min())

    def with_site_weights(self, alpha) -> "Graph":
        """Same edges, different site weights (used for shifted walks)."""
        return replace(self, site_weights=np.asarray(alpha, dtype=float))


def graph_from_edges(n: int, edges, alpha) -> Graph:
    """Build a graph from an undirected edge list [(x, y, c), ...].

    Listing the same unordered pair twice is an error, as is a self loop.
    """
    w = np.zeros((n, n))
    seen = set()
    for item in edges:
        if len(item) != 3:
            raise InputError(f"edge entry must be [x, y, c], got {item!r}")
        x, y, c = int(item[0]), int(item[1]), float(item[2])
        if not (0 <= x < n and 0 <= y < n):
            raise InputError(f"edge ({x},{y}) out of range for n={n}")
        if x == y:
            raise InputError(f"self loop at vertex {x} not allowed")
        key = (min(x, y), max(x, y))
        if key in seen:
            raise InputError(f"duplicate edge pair {key}")
        seen.add(key)
        w[x, y] = c
        w[y, x] = c
    return Graph(n, w, np.asarray(alpha, dtype=float))


def graph_from_dict(data: dict) -> Graph:
    try:
        n = int(data["n"])
        edges = data["edges"]
        alpha = data["alpha"]
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"graph object needs 'n', 'edges', 'alpha': {exc}") from exc
    return graph_from_edges(n, edges, alpha)


def load_graph(path) -> Graph:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read graph file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON in {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise InputError(f"graph file {path} must hold a JSON object")
    return graph_from_dict(data)


def complete_graph(n: int, alpha=None) -> Graph:
    """Complete graph with the mean-field normalization c = 1/n."""
    w = np.full((n, n), 1.0 / n)
    np.fill_diagonal(w, 0.0)
    a = np.ones(n) if alpha is None else alpha
    return Graph(n, w, np.asarray(a, dtype=float))


def path_graph(n: int, alpha=None) -> Graph:
    w = np.zeros((n, n))
    for x in range(n - 1):
        w[x, x + 1] = w[x + 1, x] = 1.0
    a = np.ones(n) if alpha is None else alpha
    return Graph(n, w, np.asarray(a, dtype=float))


def cycle_graph(n: int, alpha=None) -> Graph:
    if n < 3:
        raise InputError("cycle preset needs n >= 3")
    w = np.zeros((n, n))
    for x in range(n):
        y = (x + 1) % n
        w[x, y] = w[y, x] = 1.0
    a = np.ones(n) if alpha is None else alpha
    return Graph(n, w, np.asarray(a, dtype=float))


_PRESETS = {"complete": complete_graph, "path": path_graph, "cycle": cycle_graph}
_PRESET_RE = re.compile(r"^(complete|path|cycle)\((\d+)\)$")


def graph_from_preset(spec: str, alpha=None) -> Graph:
    """Expand a preset string like 'complete(4)' or 'path(3)'."""
    m = _PRESET_RE.match(spec.strip())
    if not m:
        raise InputError(f"{spec!r} is neither an existing graph file nor a preset; "
                         f"presets are name(n) with name in {sorted(_PRESETS)}")
    name, n = m.group(1), int(m.group(2))
    return _PRESETS[name](n, alpha)


def random_connected_graph(n: int, rng: np.random.Generator, extra_edge_prob: float = 0.5,
                           weight_range=(0.2, 2.0), alpha_range=(0.5, 2.0)) -> Graph:
    """Random spanning tree plus extra edges; weights uniform in the ranges."""
    w = np.zeros((n, n))
    order = rng.permutation(n)
    for i in range(1, n):
        x = order[i]
        y = order[rng.integers(0, i)]
        w[x, y] = w[y, x] = rng.uniform(*weight_range)
    for x in range(n):
        for y in range(x + 1, n):
            if w[x, y] == 0.0 and rng.random() < extra_edge_prob:
                w[x, y] = w[y, x] = rng.uniform(*weight_range)
    alpha = rng.uniform(*alpha_range, size=n)
    return Graph(n, w, alpha)


@dataclass(frozen=True)
class RwGenerator:
    """Rate matrix of the single-particle walk with its reversible law."""

    graph: Graph
    matrix: np.ndarray
    stationary: np.ndarray


def build_rw_generator(graph: Graph) -> RwGenerator:
    """Assemble the walk generator: off-diagonal (x, y) entry c[x,y] * alpha[y]."""
    a = graph.site_weights
    m = graph.edge_weights * a[None, :]
    np.fill_diagonal(m, 0.0)
    np.fill_diagonal(m, -m.sum(axis=1))
    m.setflags(write=False)
    stationary = a / a.sum()
    stationary.setflags(write=False)
    return RwGenerator(graph, m, stationary)


def detailed_balance_residual(matrix: np.ndarray, measure: np.ndarray) -> float:
    """max |m(x) Q(x,y) - m(y) Q(y,x)| over all pairs."""
    flux = measure[:, None] * matrix
    return float(np.abs(flux - flux.T).max())


@dataclass(frozen=True)
class Spectrum:
    """Ascending eigenvalues of a negative reversible generator.

    eigenfunctions, when requested, are columns orthonormal in the L2
    inner product of `measure`; residual records the worst eigenpair
    defect of the symmetrized solve.
    """

    eigenvalues: np.ndarray
    eigenfunctions: np.ndarray | None
    measure: np.ndarray
    residual: float

    @property
    def gap(self) -> float:
        return float(self.eigenvalues[1])

    def zero_multiplicity(self, tol: float | None = None) -> int:
        if tol is None:
            tol = EIGENVALUE_RTOL * max(1.0, float(np.abs(self.eigenvalues).max()))
        return int(np.sum(np.abs(self.eigenvalues) <= tol))


def reversible_spectrum(rate_matrix: np.ndarray, measure: np.ndarray,
                        want_vectors: bool = True) -> Spectrum:
    """Eigendecompose -Q for a rate matrix Q reversible w.r.t. `measure`.

    The similarity transform D^(1/2) (-Q) D^(-1/2) with D = diag(measure)
    is symmetric exactly when detailed balance holds; that is checked
    before the solve rather than silently averaged away.
    """
    neg = -np.asarray(rate_matrix, dtype=float)
    scale = max(1.0, float(np.abs(neg).max()))
    d = np.sqrt(measure)
    sym = neg * (d[:, None] / d[None, :])
    asym = float(np.abs(sym - sym.T).max())
    if asym > residual_tol(scale, 1e-8):
        raise InputError(f"generator is not reversible for the given measure "
                         f"(symmetrization defect {asym:.3e})")
    sym = 0.5 * (sym + sym.T)
    try:
        if want_vectors:
            vals, vecs = scipy.linalg.eigh(sym)
        else:
            vals = scipy.linalg.eigvalsh(sym)
            vecs = None
    except scipy.linalg.LinAlgError as exc:
        raise EigensolverError(f"symmetric eigensolve failed: {exc}") from exc
    if vecs is not None:
        defect = float(np.abs(sym @ vecs - vecs * vals[None, :]).max())
    else:
        defect = asym
    if defect > residual_tol(scale, 1e-8):
        raise EigensolverError(f"eigensolve residual {defect:.3e} exceeds "
                               f"tolerance at scale {scale:.3e}")
    funcs = None
    if vecs is not None:
        funcs = vecs / d[:, None]
        funcs.setflags(write=False)
    vals.setflags(write=False)
    return Spectrum(vals, funcs, np.asarray(measure, dtype=float), defect)


def rw_spectrum(gen: RwGenerator, want_vectors: bool = True) -> Spectrum:
    return reversible_spectrum(gen.matrix, gen.stationary, want_vectors)


def rw_gap(graph: Graph) -> float:
    return rw_spectrum(build_rw_generator(graph), want_vectors=False).gap


def rw_dirichlet_form(gen: RwGenerator, phi) -> float:
    """(1/|alpha|) sum_{x,y} alpha_x alpha_y c_xy phi(x) (phi(x) - phi(y))."""
    phi = np.asarray(phi, dtype=float)
    a = gen.graph.site_weights
    if phi.shape != a.shape:
        raise InputError(f"phi must have length {a.size}, got shape {phi.shape}")
    weights = np.outer(a, a) * gen.graph.edge_weights
    diff = phi[:, None] - phi[None, :]
    return float((weights * phi[:, None] * diff).sum() / a.sum())


def rw_variance(gen: RwGenerator, phi) -> float:
    phi = np.asarray(phi, dtype=float)
    mean = float(gen.stationary @ phi)
    return float(gen.stationary @ (phi * phi)) - mean * mean
