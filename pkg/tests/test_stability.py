import math

import numpy as np
import pytest

from spindicke.model import ModelParams, critical_kappa, derive_couplings
from spindicke.stability import (DIVERGENT, OSCILLATORY, bec_eigenvalues,
                                 bec_matrix, closed_boundaries,
                                 closed_determinant, closed_eigenvalues_analytic,
                                 closed_matrix, eigenvalues_numeric,
                                 landscape_sweep, open_determinant_roots,
                                 open_matrix)


def multiset_distance(a, b):
    """Greedy nearest-match distance between two eigenvalue multisets."""
    rem = list(b)
    worst = 0.0
    for x in a:
        j = int(np.argmin([abs(x - y) for y in rem]))
        worst = max(worst, abs(x - rem[j]))
        rem.pop(j)
    return worst


def random_params(rng, kappa_max=0.0):
    return ModelParams(
        omega=rng.uniform(0.3, 4.0), omega0=rng.uniform(-8, 8), q=rng.uniform(-10, 10),
        lambda_plus=rng.uniform(0, 2), lambda_minus=rng.uniform(0, 2),
        kappa=rng.uniform(0, kappa_max) if kappa_max else 0.0)


# ---------------------------------------------------------------------------
# 2x2 single-coupling limit

def test_bec_matrix_entries():
    assert np.array_equal(bec_matrix(0.0, 0.0, 1.0), 1j * np.array([[0, 0], [-2, 0]]))
    assert np.array_equal(bec_matrix(1.0, 2.0, 1.0), 1j * np.array([[1, 2], [0, 1]]))


def test_bec_eigenvalues_against_matrix():
    rng = np.random.default_rng(0)
    for _ in range(300):
        w0, q, lam = rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(0.1, 3)
        report = eigenvalues_numeric(bec_matrix(w0, q, lam))
        analytic = np.array(bec_eigenvalues(w0, q, lam))
        assert multiset_distance(analytic, report.eigenvalues) < 1e-9 * (
            1 + abs(analytic).max())


def test_bec_eigenvalue_examples():
    am, ap = bec_eigenvalues(0.0, 3.0, 1.0)
    assert math.isclose(abs(am + 1j * math.sqrt(3)), 0, abs_tol=1e-12)
    assert math.isclose(abs(ap - 1j * math.sqrt(3)), 0, abs_tol=1e-12)
    # inside the unstable window the pair is {+1, -1}
    am, ap = bec_eigenvalues(0.0, 1.0, 1.0)
    assert sorted([am.real, ap.real]) == [-1.0, 1.0]
    assert am.imag == ap.imag == 0.0
    # degenerate boundary q = 2 Lambda
    am, ap = bec_eigenvalues(0.7, 2.0, 1.0)
    assert am == ap == 0.7j


def test_bec_instability_window():
    rng = np.random.default_rng(1)
    for _ in range(300):
        lam = rng.uniform(0.05, 3)
        q = rng.uniform(-3 * lam, 5 * lam)
        am, ap = bec_eigenvalues(rng.uniform(-2, 2), q, lam)
        assert am.real * ap.real <= 1e-30
        inside = 0 < q < 2 * lam
        assert (abs(am.real) > 1e-12 or abs(ap.real) > 1e-12) == inside


# ---------------------------------------------------------------------------
# closed 4x4 system

def test_closed_matrix_zero_case():
    p = ModelParams(1.0, 0.0, 0.0, 0.0, 0.0, 0.0)
    assert np.array_equal(closed_matrix(p), np.zeros((4, 4)))


def test_closed_matrix_entries():
    p = ModelParams.from_deltas(1.0, 0.0, omega0=5.0, q=2.0)
    m = closed_matrix(p)
    assert m[2, 0] == -2j          # i (q - 4(D+ + D-)) = i (2 - 4)
    assert m[2, 1] == -4j          # -4i (D+ - D-)
    assert m[0, 0] == 5j and m[0, 2] == 2j


def test_closed_determinant_examples():
    p = ModelParams.from_deltas(1.0, 0.5, omega0=2.0, q=0.0)
    assert closed_determinant(p) == 2.0**4
    p = ModelParams.from_deltas(1.0, 0.0, omega0=5.0, q=5.0)
    assert closed_determinant(p) == 0.0


def test_closed_determinant_matches_numeric():
    rng = np.random.default_rng(2)
    for _ in range(300):
        p = random_params(rng)
        expected = closed_determinant(p)
        numeric = np.linalg.det(closed_matrix(p))
        scale = 1 + abs(expected)
        assert abs(numeric - expected) < 1e-10 * scale


def test_closed_eigenvalues_example():
    p = ModelParams.from_deltas(1.0, 0.0, omega0=0.0, q=2.0)
    r = closed_eigenvalues_analytic(p)
    expected = [2j, -2j, math.sqrt(12), -math.sqrt(12)]
    assert multiset_distance(expected, r.eigenvalues) < 1e-12
    assert r.label == DIVERGENT
    assert math.isclose(r.max_re, math.sqrt(12), rel_tol=1e-12)


def test_closed_eigenvalues_free_evolution():
    p = ModelParams(1.0, 1.3, 0.4, 0.0, 0.0, 0.0)
    r = closed_eigenvalues_analytic(p)
    expected = [1j * (1.3 + 0.4), -1j * (1.3 + 0.4), 1j * (1.3 - 0.4), -1j * (1.3 - 0.4)]
    assert multiset_distance(expected, r.eigenvalues) < 1e-12
    assert np.all(r.eigenvalues.real == 0)
    assert r.label == OSCILLATORY


def test_closed_divergent_sample_point():
    p = ModelParams.from_deltas(1.0, 0.0, omega0=5.0, q=-4.0)
    assert closed_eigenvalues_analytic(p).max_re > 0


def test_closed_spectrum_negation_symmetric():
    rng = np.random.default_rng(3)
    for _ in range(200):
        p = random_params(rng)
        eig = closed_eigenvalues_analytic(p).eigenvalues
        assert multiset_distance(eig, -eig) < 1e-10 * (1 + abs(eig).max())


def test_closed_boundaries_values():
    b = closed_boundaries(1.0, 0.0, 5.0)
    r41 = math.sqrt(41)
    expected = sorted([-5.0, 4 - r41, 0.0, 100 / 29, 5.0, 4 + r41])
    assert np.allclose(b.all_roots, expected, atol=1e-10)
    assert len(b.determinant_roots) == 4 and len(b.nested_sqrt_roots) == 2


def test_closed_boundaries_omega0_zero():
    b = closed_boundaries(1.0, 0.0, 0.0)
    assert sorted(b.determinant_roots) == [0.0, 0.0, 0.0, 8.0]
    assert b.nested_sqrt_roots == (0.0, 0.0)


def test_closed_boundaries_degenerate_nested_root():
    b = closed_boundaries(1.0, 1.0, 0.0)
    assert b.nested_sqrt_roots == (0.0,)


def test_boundary_roots_zero_the_determinant():
    rng = np.random.default_rng(4)
    for _ in range(100):
        dm = rng.uniform(0, 1.5)
        dp = dm + rng.uniform(0, 1.5)
        w0 = rng.uniform(-4, 4)
        scale = 1 + max(dp, abs(w0)) ** 4
        for root in closed_boundaries(dp, dm, w0).determinant_roots:
            p = ModelParams.from_deltas(dp, dm, omega0=w0, q=float(root))
            assert abs(closed_determinant(p)) < 1e-9 * scale


# ---------------------------------------------------------------------------
# open 4x4 system

def test_open_matrix_balanced_coupling_is_dissipation_free():
    p = ModelParams(1.0, 0.4, 0.8, 1.1, 1.1, 0.9)
    d = derive_couplings(p)
    m = open_matrix(p)
    assert m[2, 0] == 1j * (0.8 - 2 * (d.Lambda_plus + d.Lambda_minus))
    assert np.all(m.real == 0)


def test_open_matrix_reduces_to_closed_at_kappa_zero():
    rng = np.random.default_rng(5)
    for _ in range(100):
        p = random_params(rng)
        assert np.allclose(open_matrix(p), closed_matrix(p), atol=1e-13)


def test_open_matrix_zero_coupling():
    p = ModelParams(1.0, 0.7, 0.3, 0.0, 0.0, 0.5)
    m = open_matrix(p)
    expected = np.diag([0.7j, -0.7j, 0.7j, -0.7j]).astype(complex)
    expected[0, 2] = 0.3j
    expected[1, 3] = -0.3j
    expected[2, 0] = 0.3j
    expected[3, 1] = -0.3j
    assert np.array_equal(m, expected)


def test_open_matrix_zero_pattern():
    p = ModelParams(1.0, 0.7, 0.3, 0.5, 1.2, 0.4)
    m = open_matrix(p)
    for i, j in ((0, 1), (0, 3), (1, 0), (1, 2), (2, 3), (3, 2)):
        assert m[i, j] == 0


def test_open_roots_balanced_undamped():
    lam = 0.7
    p = ModelParams.from_effective_couplings(lam, lam, omega=1.0)
    r = open_determinant_roots(p)
    assert r.all_real
    assert multiset_distance([0.0, 0.0, 0.0, 8 * lam], r.roots) < 1e-12


def test_open_roots_complex_above_critical_kappa():
    base = ModelParams.from_effective_couplings(0.5, 1.0, omega=1.0)
    kc = critical_kappa(base)
    p = ModelParams(1.0, 0.3, 0.0, base.lambda_plus, base.lambda_minus, kc * 1.001)
    r = open_determinant_roots(p)
    assert not r.all_real
    assert all(abs(root.imag) > 0 for root in r.roots)


def test_open_roots_zero_numeric_determinant():
    rng = np.random.default_rng(6)
    count = 0
    while count < 60:
        p = random_params(rng, kappa_max=0.0)
        if p.lambda_plus < 0.05 or p.lambda_minus < 0.05:
            continue
        kc = critical_kappa(p)
        kappa = rng.uniform(0, min(0.9 * kc, 4.0))
        p = ModelParams(p.omega, p.omega0, p.q, p.lambda_plus, p.lambda_minus, kappa)
        roots = open_determinant_roots(p)
        assert roots.all_real
        scale = 1 + max(abs(r) for r in roots.roots) ** 4
        for root in roots.roots:
            pq = ModelParams(p.omega, p.omega0, root.real, p.lambda_plus,
                             p.lambda_minus, kappa)
            assert abs(np.linalg.det(open_matrix(pq))) < 1e-8 * scale
        count += 1


# ---------------------------------------------------------------------------
# numeric eigensolver

def test_eigenvalues_numeric_diagonal():
    m = np.diag([1j, -1j, 2j, -2j])
    r = eigenvalues_numeric(m)
    assert multiset_distance([1j, -1j, 2j, -2j], r.eigenvalues) < 1e-14
    assert r.label == OSCILLATORY and r.max_re == 0.0


def test_eigenvalues_numeric_rejects_wrong_shape():
    with pytest.raises(ValueError):
        eigenvalues_numeric(np.eye(3))


def test_numeric_matches_analytic_closed():
    rng = np.random.default_rng(7)
    for _ in range(200):
        p = random_params(rng)
        ana = closed_eigenvalues_analytic(p).eigenvalues
        num = eigenvalues_numeric(closed_matrix(p)).eigenvalues
        scale = 1 + abs(ana).max()
        assert multiset_distance(ana, num) < 1e-8 * scale


def test_open_equals_closed_spectrum_at_kappa_zero():
    rng = np.random.default_rng(8)
    for _ in range(100):
        p = random_params(rng)
        a = eigenvalues_numeric(open_matrix(p)).eigenvalues
        b = closed_eigenvalues_analytic(p).eigenvalues
        assert multiset_distance(a, b) < 1e-8 * (1 + abs(b).max())


# ---------------------------------------------------------------------------
# landscapes

FIG4_PARAMS = ModelParams.from_deltas(1.0, 0.0, omega0=5.0)


def test_landscape_seven_region_sign_pattern():
    qs = np.array([-10.0, -4.0, -1.0, 2.0, 4.0, 8.0, 14.0])
    grid = landscape_sweep("closed", FIG4_PARAMS, qs, [5.0])
    labels = [grid.label(i, 0) for i in range(7)]
    expected = [OSCILLATORY, DIVERGENT, OSCILLATORY, DIVERGENT,
                OSCILLATORY, DIVERGENT, OSCILLATORY]
    assert labels == expected


def test_landscape_labels_flip_across_each_boundary():
    b = closed_boundaries(1.0, 0.0, 5.0)
    for root in b.all_roots:
        grid = landscape_sweep("closed", FIG4_PARAMS,
                               [root - 1e-3, root + 1e-3], [5.0])
        assert grid.label(0, 0) != grid.label(1, 0)


def test_open_landscape_diverges_everywhere_at_large_kappa():
    p = ModelParams.from_effective_couplings(0.5, 1.0, kappa=5.0, omega=1.0)
    grid = landscape_sweep("open", p, [-7.5, -2.5, 2.5, 7.5],
                           np.linspace(-10, 10, 7))
    assert not grid.failed.any()
    assert np.all(grid.max_re > 1e-6)


def test_single_cell_equals_direct_call():
    p = ModelParams.from_effective_couplings(0.4, 1.0, kappa=0.8, omega=1.0,
                                             omega0=1.5, q=-2.0)
    grid = landscape_sweep("open", p, [-2.0], [1.5])
    direct = eigenvalues_numeric(open_matrix(ModelParams(
        p.omega, 1.5, -2.0, p.lambda_plus, p.lambda_minus, p.kappa)))
    assert multiset_distance(grid.eigenvalues[0, 0], direct.eigenvalues) < 1e-12
    assert grid.label(0, 0) == direct.label


def test_bec_landscape_matches_pointwise():
    p = ModelParams(2.0, 0.0, 0.0, 0.0, 1.2, 0.0)   # Lambda = 1.44 / 2 = 0.72
    lam = derive_couplings(p).Lambda_minus
    grid = landscape_sweep("bec", p, [0.5, 1.0], [-1.0, 0.0, 1.0])
    for i, q in enumerate(grid.q_axis):
        for j, w0 in enumerate(grid.omega0_axis):
            am, ap = bec_eigenvalues(w0, q, lam)
            assert multiset_distance([am, ap], grid.eigenvalues[i, j]) < 1e-12


def test_bec_landscape_requires_single_coupling():
    p = ModelParams(1.0, 0.0, 0.0, 0.5, 1.0, 0.0)
    with pytest.raises(ValueError):
        landscape_sweep("bec", p, [0.0], [0.0])


def test_landscape_deterministic_and_worker_independent():
    p = ModelParams.from_effective_couplings(0.5, 1.0, kappa=1.0, omega=1.0)
    q_axis = np.linspace(-5, 5, 8)
    w_axis = np.linspace(-4, 4, 5)
    a = landscape_sweep("open", p, q_axis, w_axis)
    b = landscape_sweep("open", p, q_axis, w_axis)
    c = landscape_sweep("open", p, q_axis, w_axis, workers=3)
    assert np.array_equal(a.eigenvalues, b.eigenvalues)
    assert np.array_equal(a.eigenvalues, c.eigenvalues)


def test_landscape_rejects_bad_axes():
    with pytest.raises(ValueError):
        landscape_sweep("closed", FIG4_PARAMS, [], [0.0])
    with pytest.raises(ValueError):
        landscape_sweep("closed", FIG4_PARAMS, [np.nan], [0.0])
