import math

import numpy as np
import pytest

from conftest import hausdorff_gap
from siplab.bep import (HomogPolynomial, apply_bep_generator, basis_monomial, bep_gap_report,
                        bep_matrix, poly_lift, simplex_measure)
from siplab.configs import enumerate_configs
from siplab.errors import InputError
from siplab.graphs import (Graph, build_rw_generator, complete_graph, path_graph,
                           random_connected_graph, rw_spectrum)
from siplab.sip import build_sip_generator


def test_polynomial_validation():
    with pytest.raises(InputError):
        HomogPolynomial(2, 2, {(1, 0): 1.0})  # degree mismatch
    with pytest.raises(InputError):
        HomogPolynomial(2, 1, {(1, 0, 0): 1.0})  # wrong variable count
    p = HomogPolynomial(2, 2, {(2, 0): 0.0, (1, 1): 2.0})
    assert (2, 0) not in p.coeffs  # zero coefficients pruned


def test_poly_lift_indicator_and_constant():
    space = enumerate_configs(2, 3)
    f = np.zeros(space.size)
    f[space.rank((2, 1))] = 5.0
    p = poly_lift(f, space)
    assert p.coeffs == {(2, 1): 5.0 / (2 * 1)}
    space1 = enumerate_configs(3, 1)
    p1 = poly_lift(np.ones(space1.size), space1)
    assert p1.coeffs == {(1, 0, 0): 1.0, (0, 1, 0): 1.0, (0, 0, 1): 1.0}


def test_poly_lift_linear_and_injective():
    rng = np.random.default_rng(0)
    space = enumerate_configs(3, 2)
    f, g = rng.standard_normal((2, space.size))
    p_sum = poly_lift(f + 2.0 * g, space)
    manual = {}
    for expo, coeff in poly_lift(f, space).coeffs.items():
        manual[expo] = manual.get(expo, 0.0) + coeff
    for expo, coeff in poly_lift(g, space).coeffs.items():
        manual[expo] = manual.get(expo, 0.0) + 2.0 * coeff
    for expo, coeff in p_sum.coeffs.items():
        assert coeff == pytest.approx(manual[expo], rel=1e-12)
    # vector round trip certifies injectivity on the monomial basis
    np.testing.assert_allclose(poly_lift(f, space).to_vector(space) *
                               [math.prod(math.factorial(int(e)) for e in occ)
                                for occ in space.occupations], f, atol=1e-12)


def test_generator_kills_constants():
    g = path_graph(3)
    p = HomogPolynomial(3, 0, {(0, 0, 0): 4.2})
    assert apply_bep_generator(p, g).coeffs == {}


def test_generator_slow_mode_two_sites_by_hand():
    # on two sites the slow walk mode is degree one, and symbolic
    # differentiation by hand gives G(psi_1 z1 + psi_2 z2) =
    # -c (a1 + a2) (psi_1 z1 + psi_2 z2); the second-order term drops out
    for a1, a2, c in [(1.0, 1.0, 1.0), (2.0, 0.5, 0.7)]:
        g = Graph(2, np.array([[0.0, c], [c, 0.0]]), np.array([a1, a2]))
        spec = rw_spectrum(build_rw_generator(g))
        psi = spec.eigenfunctions[:, 1]
        p = HomogPolynomial(2, 1, {(1, 0): psi[0], (0, 1): psi[1]})
        image = apply_bep_generator(p, g)
        lam = c * (a1 + a2)
        assert spec.gap == pytest.approx(lam, rel=1e-12)
        for expo, coeff in image.coeffs.items():
            assert coeff == pytest.approx(-lam * p.coeffs[expo], rel=1e-10)


def test_generator_matches_particles_small_and_random():
    built = bep_matrix(path_graph(2), 2)
    np.testing.assert_array_equal(built.sip_matrix,
                                  [[-2.0, 2.0, 0.0], [2.0, -4.0, 2.0], [0.0, 2.0, -2.0]])
    assert built.check.passed and built.check.residual <= 1e-12
    rng = np.random.default_rng(1)
    g = random_connected_graph(3, rng)
    for k in (1, 2, 3):
        assert bep_matrix(g, k).check.passed


def test_generator_level_one_is_walk():
    rng = np.random.default_rng(2)
    g = random_connected_graph(4, rng)
    built = bep_matrix(g, 1)
    walk = build_rw_generator(g).matrix
    relabel = [built.space.rank(tuple(int(y == x) for y in range(g.n)))
               for x in range(g.n)]
    np.testing.assert_allclose(built.matrix[np.ix_(relabel, relabel)], walk, atol=1e-12)


def test_intertwining_on_random_functions():
    # applying the diffusion generator to a lifted function agrees with
    # lifting the particle generator's action, coefficient by coefficient
    rng = np.random.default_rng(3)
    g = random_connected_graph(3, rng)
    k = 3
    gen = build_sip_generator(g, k)
    space = gen.space
    for _ in range(10):
        f = rng.standard_normal(space.size)
        image = apply_bep_generator(poly_lift(f, space), g)
        expected = poly_lift(gen.matrix @ f, space)
        keys = set(image.coeffs) | set(expected.coeffs)
        for expo in keys:
            assert image.coeffs.get(expo, 0.0) == pytest.approx(
                expected.coeffs.get(expo, 0.0), abs=1e-10)


def test_generator_is_linear():
    rng = np.random.default_rng(7)
    g = random_connected_graph(3, rng)
    space = enumerate_configs(3, 2)
    f, h = rng.standard_normal((2, space.size))
    combined = apply_bep_generator(poly_lift(3.0 * f - 0.5 * h, space), g)
    part_f = apply_bep_generator(poly_lift(f, space), g)
    part_h = apply_bep_generator(poly_lift(h, space), g)
    for expo in set(combined.coeffs) | set(part_f.coeffs) | set(part_h.coeffs):
        assert combined.coeffs.get(expo, 0.0) == pytest.approx(
            3.0 * part_f.coeffs.get(expo, 0.0) - 0.5 * part_h.coeffs.get(expo, 0.0),
            abs=1e-12)


def test_degree_preserved_on_random_monomials():
    rng = np.random.default_rng(4)
    count = 0
    while count < 500:
        n = int(rng.integers(2, 5))
        k = int(rng.integers(1, 6))
        g = random_connected_graph(n, rng)
        space = enumerate_configs(n, k)
        p = basis_monomial(space, int(rng.integers(0, space.size)))
        image = apply_bep_generator(p, g)
        assert image.degree == k
        for expo in image.coeffs:
            assert sum(expo) == k
        count += 1


def test_gap_report_complete_graph_union_formula():
    rng = np.random.default_rng(5)
    alpha = rng.uniform(0.3, 3.0, size=3)
    g = complete_graph(3, alpha)
    report = bep_gap_report(g, 3)
    assert report.passed
    total = g.alpha_total
    expected = sorted({l * (total + l - 1) / 3.0 for l in range(4)})
    assert hausdorff_gap(np.unique(np.round(report.spectrum, 9)), expected) <= 1e-8


def test_gap_report_equality_unit_alpha_path():
    report = bep_gap_report(path_graph(4), 4)
    assert report.passed
    assert report.gap_bep == pytest.approx(report.gap_rw, abs=1e-8)


def test_walk_gap_always_in_truncated_spectrum():
    rng = np.random.default_rng(6)
    g = random_connected_graph(3, rng, alpha_range=(0.3, 0.8))
    for degree in (1, 2, 3):
        report = bep_gap_report(g, degree)
        assert np.abs(report.spectrum - report.gap_rw).min() <= 1e-8 * (1 + report.gap_rw)


def test_simplex_measure_log_normalization():
    g = path_graph(3, alpha=[0.5, 1.5, 2.0])
    sm = simplex_measure(g)
    assert np.isfinite(sm.log_beta)
    assert sm.log_beta == pytest.approx(
        math.lgamma(0.5) + math.lgamma(1.5) + math.lgamma(2.0) - math.lgamma(4.0))


def test_serialization_sorted():
    p = HomogPolynomial(2, 2, {(2, 0): 1.0, (0, 2): -1.0})
    dumped = p.to_json_list()
    assert dumped == [{"exponents": [0, 2], "coeff": -1.0},
                      {"exponents": [2, 0], "coeff": 1.0}]
