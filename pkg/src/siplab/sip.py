"""The k-particle inclusion process: generator, spectra, gap comparisons.

A particle at x jumps to y at rate c[x, y] * (alpha[y] + eta[y]), so the
total jump rate out of eta along (x, y) is eta[x] * c[x, y] *
(alpha[y] + eta[y]).  The chain is reversible for the gamma-product law
from `configs.sip_measure`; reversibility is verified at assembly time.

The gap report machine-checks the sandwich

    (1 ^ alpha_min) * gap_rw  <=  gap_k  <=  gap_rw       for 2 <= k <= K,

with equality when alpha_min >= 1, together with monotonicity of gap_k
in k.  The total-variation table checks the classical semigroup bounds

    exp(-gap t)  <=  sup_eta 2 ||law_t(eta) - mu||_TV
                 <=  (min mu)^(-1/2) exp(-gap t).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .configs import ConfigSpace, SipMeasure, enumerate_configs, sip_measure
from .errors import InputError, VerificationError
from .graphs import (Graph, Spectrum, build_rw_generator, detailed_balance_residual,
                     residual_tol, reversible_spectrum, rw_spectrum)


@dataclass(frozen=True)
class SipGenerator:
    graph: Graph
    space: ConfigSpace
    matrix: np.ndarray
    measure: SipMeasure


def build_sip_generator(graph: Graph, k: int, cap: int | None = None) -> SipGenerator:
    if k < 1:
        raise InputError(f"need k >= 1 particles, got {k}")
    space = enumerate_configs(graph.n, k, cap)
    mu = sip_measure(graph, space)
    n = graph.n
    c = graph.edge_weights
    alpha = graph.site_weights
    size = space.size
    m = np.zeros((size, size))
    for s in range(size):
        eta = space.occupations[s]
        for x in range(n):
            if eta[x] == 0:
                continue
            for y in range(n):
                if c[x, y] == 0.0 or y == x:
                    continue
                rate = eta[x] * c[x, y] * (alpha[y] + eta[y])
                target = list(eta)
                target[x] -= 1
                target[y] += 1
                m[s, space.rank(target)] += rate
    np.fill_diagonal(m, -m.sum(axis=1))
    scale = float(np.abs(m).max()) if size > 1 else 1.0
    defect = detailed_balance_residual(m, mu.probabilities)
    if defect > residual_tol(scale):
        raise VerificationError(f"assembled rate matrix breaks detailed balance "
                                f"(residual {defect:.3e} at scale {scale:.3e})")
    m.setflags(write=False)
    return SipGenerator(graph, space, m, mu)


def sip_spectrum(gen: SipGenerator, want_vectors: bool = True) -> Spectrum:
    return reversible_spectrum(gen.matrix, gen.measure.probabilities, want_vectors)


def sip_gap(graph: Graph, k: int, cap: int | None = None) -> float:
    return sip_spectrum(build_sip_generator(graph, k, cap), want_vectors=False).gap


def sip_dirichlet_form(gen: SipGenerator, f) -> float:
    """Quadratic form <f, -L f> under the reversible law."""
    f = np.asarray(f, dtype=float)
    if f.shape != (gen.space.size,):
        raise InputError(f"f must have length {gen.space.size}, got {f.shape}")
    return float(gen.measure.probabilities @ (f * (-gen.matrix @ f)))


def spectrum_included(small: np.ndarray, large: np.ndarray, rtol: float = 1e-8) -> bool:
    """Greedy sorted pairing: every value of `small` matched in `large`,
    with multiplicity, within rtol * (1 + |value|)."""
    small = np.sort(np.asarray(small, dtype=float))
    large = np.sort(np.asarray(large, dtype=float))
    used = np.zeros(large.size, dtype=bool)
    j = 0
    for s in small:
        tol = rtol * (1.0 + abs(s))
        while j < large.size and (used[j] or large[j] < s - tol):
            j += 1
        if j >= large.size or large[j] > s + tol:
            return False
        used[j] = True
        j += 1
    return True


@dataclass(frozen=True)
class GapReport:
    """Spectral gaps of the interacting system against the single walk."""

    gap_rw: float
    gaps: dict
    gap_sip: float
    alpha_min: float
    lower_bound: float
    ratios: dict
    equality_expected: bool
    failures: tuple
    tolerance: float

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return {
            "gap_rw": self.gap_rw,
            "gap_k": {str(k): v for k, v in sorted(self.gaps.items())},
            "gap_sip": self.gap_sip,
            "alpha_min": self.alpha_min,
            "lower_bound": self.lower_bound,
            "ratio_k": {str(k): v for k, v in sorted(self.ratios.items())},
            "equality_check": "applies" if self.equality_expected else "not-applicable",
            "pass": self.passed,
            "failures": list(self.failures),
            "tolerance": self.tolerance,
            "note": "gap_sip is the minimum over the computed particle numbers only; "
                    "the sandwich bounds hold for every k",
        }


def gap_sandwich_report(graph: Graph, k_max: int, tol: float = 1e-8,
                        strict: bool = True, cap: int | None = None) -> GapReport:
    """Compute gap_k for 2 <= k <= k_max and check the two-sided bounds."""
    if k_max < 2:
        raise InputError(f"need k_max >= 2, got {k_max}")
    gap_rw = rw_spectrum(build_rw_generator(graph), want_vectors=False).gap
    a_min = graph.alpha_min
    lower = min(1.0, a_min) * gap_rw
    gaps = {}
    failures = []
    previous = gap_rw
    for k in range(2, k_max + 1):
        gap_k = sip_gap(graph, k, cap)
        gaps[k] = gap_k
        if gap_k < lower - tol:
            failures.append(f"k={k}: gap_k={gap_k:.12g} below lower bound {lower:.12g}")
        if gap_k > gap_rw + tol:
            failures.append(f"k={k}: gap_k={gap_k:.12g} above gap_rw={gap_rw:.12g}")
        if a_min >= 1.0 and abs(gap_k - gap_rw) > tol:
            failures.append(f"k={k}: expected equality, |gap_k - gap_rw|="
                            f"{abs(gap_k - gap_rw):.3e}")
        if gap_k > previous + tol:
            failures.append(f"k={k}: gap_k={gap_k:.12g} exceeds gap at k-1={previous:.12g}")
        previous = gap_k
    # ratios are meaningless on disconnected graphs, where both gaps vanish
    ratio_floor = tol * max(1.0, abs(gap_rw))
    report = GapReport(
        gap_rw=gap_rw,
        gaps=gaps,
        gap_sip=min(gaps.values()),
        alpha_min=a_min,
        lower_bound=lower,
        ratios={k: (v / gap_rw if gap_rw > ratio_floor else float("nan"))
                for k, v in gaps.items()},
        equality_expected=a_min >= 1.0,
        failures=tuple(failures),
        tolerance=tol,
    )
    if strict and not report.passed:
        raise VerificationError("gap sandwich violated: " + "; ".join(failures))
    return report


def transition_matrix(gen: SipGenerator, t: float, spec: Spectrum | None = None) -> np.ndarray:
    """exp(t L) from the symmetric eigendecomposition; rows are laws at time t."""
    if t < 0:
        raise InputError("time must be nonnegative")
    if spec is None:
        spec = sip_spectrum(gen)
    if spec.eigenfunctions is None:
        raise InputError("transition_matrix needs a spectrum with eigenfunctions")
    d = np.sqrt(gen.measure.probabilities)
    vecs = spec.eigenfunctions * d[:, None]
    decay = np.exp(-t * spec.eigenvalues)
    p = (vecs * decay[None, :]) @ vecs.T
    return (p / d[:, None]) * d[None, :]


@dataclass(frozen=True)
class TvRow:
    t: float
    value: float
    lower: float
    upper: float
    passed: bool

    def to_dict(self) -> dict:
        return {"t": self.t, "tv_sup": self.value, "lower": self.lower,
                "upper": self.upper, "pass": self.passed}


@dataclass(frozen=True)
class TvTable:
    rows: tuple
    gap: float
    min_mass: float

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)


def tv_sandwich(gen: SipGenerator, times, slack: float = 1e-8,
                strict: bool = True) -> TvTable:
    """Exact worst-start total variation distance against its two bounds.

    value(t) = sup over starting states of the L1 distance between the
    time-t law and the reversible law (that is twice the TV distance).
    """
    spec = sip_spectrum(gen)
    mu = gen.measure.probabilities
    gap = spec.gap
    min_mass = float(mu.min())
    rows = []
    for t in sorted(float(t) for t in times):
        p = transition_matrix(gen, t, spec)
        value = float(np.abs(p - mu[None, :]).sum(axis=1).max())
        lower = float(np.exp(-gap * t))
        upper = float(min_mass ** -0.5 * np.exp(-gap * t))
        ok = (value >= lower - slack) and (value <= upper + slack)
        rows.append(TvRow(t, value, lower, upper, ok))
    table = TvTable(tuple(rows), gap, min_mass)
    if strict and not table.passed:
        bad = [r for r in rows if not r.passed]
        raise VerificationError("total-variation sandwich violated at t="
                                + ", ".join(f"{r.t:g}" for r in bad))
    return table
