"""Affine interpolation machinery: weights, G matrices, sharp bounds, mu."""

import numpy as np
import pytest

from rssm.simplex import DegenerateSimplexError, Simplex, make_regular_simplex
from rssm.interpolation import (
    Quadratic,
    bound_report,
    error_bound,
    g_matrix,
    gradient_bound_report,
    interpolate,
    lagrange_coefficients,
    mu_certificate,
    nuclear_bound_from_g,
    query_point,
    simplex_gradient,
    worst_case_quadratic,
)

from conftest import haar_rotation, random_regular_simplex


# ---------------------------------------------------------------------------
# Lagrange coefficients


def test_vertex_query_gives_unit_weight():
    s = make_regular_simplex(np.zeros(3), 1.0, 3)
    q = lagrange_coefficients(s, s.vertices[2])
    expected = np.zeros(5)
    expected[0] = -1.0
    expected[3] = 1.0
    np.testing.assert_allclose(q.ell, expected, atol=1e-10)


def test_centroid_query_weights_are_uniform():
    n = 4
    s = make_regular_simplex(np.zeros(n), 1.0, n)
    q = lagrange_coefficients(s, s.centroid())
    np.testing.assert_allclose(q.ell[1:], 1.0 / (n + 1), atol=1e-12)
    assert q.negative_index_set == (0,)
    assert q.positive_index_set == tuple(range(1, n + 2))


@pytest.mark.parametrize("n", [1, 2, 3, 6])
def test_reflection_query_weights_and_partition(n):
    s = make_regular_simplex(np.zeros(n), 1.0, n)
    x_r = query_point(s, "reflection")  # reflects the last vertex
    q = lagrange_coefficients(s, x_r)
    np.testing.assert_allclose(q.ell[1:n + 1], 2.0 / n, atol=1e-10)
    assert q.ell[n + 1] == pytest.approx(-1.0, abs=1e-10)
    assert q.positive_index_set == tuple(range(1, n + 1))
    assert q.negative_index_set == (0, n + 1)
    assert q.zero_index_set == ()


def test_weights_reproduce_query(rng):
    s = random_regular_simplex(5, rng)
    x = rng.standard_normal(5)
    q = lagrange_coefficients(s, x)
    assert q.ell[1:].sum() == pytest.approx(1.0, abs=1e-10)
    np.testing.assert_allclose(q.ell[1:] @ s.vertices, x, atol=1e-9)


def test_degenerate_simplex_raises():
    V = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, 1e-15]])
    s = Simplex(V, radius=1.0, check=False)
    with pytest.raises(DegenerateSimplexError):
        lagrange_coefficients(s, np.array([0.3, 0.3]))
    with pytest.raises(DegenerateSimplexError):
        simplex_gradient(s, [0.0, 1.0, 2.0])


# ---------------------------------------------------------------------------
# simplex gradient and interpolation


def test_affine_function_recovered_exactly(rng):
    n = 4
    s = random_regular_simplex(n, rng)
    a = rng.standard_normal(n)
    b = 1.7
    values = s.vertices @ a + b
    np.testing.assert_allclose(simplex_gradient(s, values), a, atol=1e-9)
    for kind, gamma in (("reflection", None), ("centroid", None),
                        ("shrink", 0.35)):
        x = query_point(s, kind, gamma=gamma)
        scale = max(1.0, abs(a @ x + b))
        assert abs(interpolate(s, values, x) - (a @ x + b)) <= 1e-10 * scale


def test_constant_values_give_zero_gradient():
    s = make_regular_simplex(np.zeros(3), 2.0, 3)
    np.testing.assert_allclose(simplex_gradient(s, np.full(4, 3.3)), 0.0,
                               atol=1e-12)


def test_quadratic_gradient_error_within_theory():
    # for f = (L/2)||x||^2 the simplex gradient at the centroid is within
    # (sqrt(n)/2) L delta of the true gradient L*c
    n, L, delta = 5, 2.0, 0.6
    s = make_regular_simplex(np.full(n, 1.5), delta, n)
    values = [0.5 * L * v @ v for v in s.vertices]
    ghat = simplex_gradient(s, values)
    c = s.centroid()
    assert np.linalg.norm(ghat - L * c) <= np.sqrt(n) / 2 * L * delta + 1e-12


def test_value_count_validated():
    s = make_regular_simplex(np.zeros(2), 1.0, 2)
    with pytest.raises(ValueError):
        simplex_gradient(s, [1.0, 2.0])


def test_interpolant_at_reflection_mirrors_worst_gap(rng):
    # f_hat(x_r) = 2*mean(best n values) - worst value
    n = 6
    s = random_regular_simplex(n, rng)
    values = rng.standard_normal(n + 1)
    x_r = query_point(s, "reflection")
    expected = 2.0 * values[:n].mean() - values[n]
    assert interpolate(s, values, x_r) == pytest.approx(expected, rel=1e-12,
                                                        abs=1e-12)


# ---------------------------------------------------------------------------
# G matrices


def test_centroid_g_is_scaled_identity():
    n, delta = 4, 0.9
    s = make_regular_simplex(np.zeros(n), delta, n)
    g = g_matrix(s, s.centroid())
    np.testing.assert_allclose(g.matrix, delta ** 2 / n * np.eye(n),
                               atol=1e-12)
    assert g.positive_count() == n
    assert g.negative_count() == 0


def test_reflection_g_eigenvalues_2d():
    s = make_regular_simplex(np.zeros(2), 1.0, 2)
    g = g_matrix(s, query_point(s, "reflection"))
    np.testing.assert_allclose(g.eigenvalues, [1.5, -4.5], rtol=1e-9)
    assert g.nuclear_norm() == pytest.approx(6.0, rel=1e-9)


def test_shrink_g_is_rank_one_psd():
    s = make_regular_simplex(np.zeros(1), 1.0, 1)
    g = g_matrix(s, query_point(s, "shrink", gamma=0.5))
    assert g.positive_count() == 1
    assert g.negative_count() == 0
    assert np.trace(g.matrix) == pytest.approx(1.0, rel=1e-12)


@pytest.mark.parametrize("kind,gamma", [("reflection", None),
                                        ("centroid", None),
                                        ("shrink", 0.4)])
def test_eigenvalue_count_law(kind, gamma, rng):
    # positive/negative eigenvalue counts equal |I+|-1 and |I-|-1
    for _ in range(60):
        n = int(rng.integers(1, 9))
        s = random_regular_simplex(n, rng)
        x = query_point(s, kind, gamma=gamma)
        g = g_matrix(s, x)
        q = g.coefficients
        assert g.positive_count() == len(q.positive_index_set) - 1
        assert g.negative_count() == len(q.negative_index_set) - 1


def test_g_translation_invariance(rng):
    n = 3
    s = random_regular_simplex(n, rng, center=np.zeros(n))
    shift = rng.standard_normal(n) * 50.0
    s2 = Simplex(s.vertices + shift, radius=s.radius, check=False)
    x = query_point(s, "reflection")
    g1 = g_matrix(s, x)
    g2 = g_matrix(s2, x + shift)
    np.testing.assert_allclose(g1.matrix, g2.matrix, atol=1e-8)


# ---------------------------------------------------------------------------
# closed-form bounds


def test_error_bound_table():
    assert error_bound("reflection", "nonconvex", 2, 1.0, 1.0) == pytest.approx(3.0)
    assert error_bound("reflection", "convex", 2, 1.0, 1.0) == pytest.approx(2.25)
    assert error_bound("centroid", "nonconvex", 7, 2.0, 0.5) == pytest.approx(0.25)
    assert error_bound("shrink", "nonconvex", 1, 1.0, 1.0,
                       gamma=0.3) == pytest.approx(2 * 0.3 * 0.7)
    # scaling in L and delta^2
    assert error_bound("reflection", "nonconvex", 3, 10.0, 0.1) \
        == pytest.approx(10 * 0.01 * error_bound("reflection", "nonconvex", 3, 1.0, 1.0))


def test_error_bound_argument_validation():
    with pytest.raises(ValueError):
        error_bound("sideways", "nonconvex", 2, 1.0, 1.0)
    with pytest.raises(ValueError):
        error_bound("reflection", "concave", 2, 1.0, 1.0)
    with pytest.raises(ValueError):
        error_bound("shrink", "nonconvex", 2, 1.0, 1.0)  # missing gamma
    with pytest.raises(ValueError):
        error_bound("shrink", "nonconvex", 2, 1.0, 1.0, gamma=1.0)
    with pytest.raises(ValueError):
        error_bound("centroid", "nonconvex", 2, 1.0, 1.0, gamma=2.0)


def test_nuclear_bound_matches_closed_forms():
    n, L, delta = 2, 1.0, 1.0
    s = make_regular_simplex(np.zeros(n), delta, n)
    g = g_matrix(s, query_point(s, "reflection"))
    assert nuclear_bound_from_g(g, L, "nonconvex") == pytest.approx(3.0, rel=1e-9)
    assert nuclear_bound_from_g(g, L, "convex") == pytest.approx(2.25, rel=1e-9)
    gc = g_matrix(s, s.centroid())
    assert nuclear_bound_from_g(gc, L, "nonconvex") == pytest.approx(0.5, rel=1e-9)
    with pytest.raises(ValueError):
        nuclear_bound_from_g(g, L, "monotone")


# ---------------------------------------------------------------------------
# mu certificates


@pytest.mark.parametrize("n", range(1, 13))
def test_reflection_mu_entries_are_one_over_n(n):
    s = make_regular_simplex(np.zeros(n), 1.0, n)
    cert = mu_certificate(s, query_point(s, "reflection"))
    assert cert.available and cert.sharp
    # each positive vertex carries 1/n toward the reflected vertex and 1/n
    # toward the query
    for i in range(1, n + 1):
        assert cert.entries[(i, n + 1)] == pytest.approx(1.0 / n, abs=1e-10)
        assert cert.entries[(i, 0)] == pytest.approx(1.0 / n, abs=1e-10)
    assert len(cert.entries) == 2 * n


def test_centroid_mu_certificate():
    n = 5
    s = make_regular_simplex(np.zeros(n), 1.0, n)
    cert = mu_certificate(s, s.centroid())
    assert cert.available and cert.sharp
    assert set(cert.entries) == {(i, 0) for i in range(1, n + 2)}
    for v in cert.entries.values():
        assert v == pytest.approx(1.0 / (n + 1), abs=1e-12)


def test_shrink_mu_certificate():
    s = make_regular_simplex(np.zeros(4), 1.0, 4)
    cert = mu_certificate(s, query_point(s, "shrink", gamma=0.3))
    assert cert.available and cert.sharp
    assert cert.entries[(1, 0)] == pytest.approx(0.7, abs=1e-12)
    assert cert.entries[(5, 0)] == pytest.approx(0.3, abs=1e-12)
    assert len(cert.entries) == 2


def test_mu_to_dict_shape():
    s = make_regular_simplex(np.zeros(2), 1.0, 2)
    d = mu_certificate(s, query_point(s, "reflection")).to_dict()
    assert d["available"] and d["sharp"]
    assert "1,3" in d["entries"]


# ---------------------------------------------------------------------------
# worst-case quadratics and reports


def test_centroid_worst_case_is_scaled_identity():
    n, L = 3, 2.0
    s = make_regular_simplex(np.zeros(n), 1.0, n)
    g = g_matrix(s, s.centroid())
    quad = worst_case_quadratic(g, L, "nonconvex")
    np.testing.assert_allclose(quad.H, L * np.eye(n), atol=1e-9)
    values = [quad(v) for v in s.vertices]
    err = interpolate(s, values, s.centroid()) - quad(s.centroid())
    assert abs(err) == pytest.approx(0.5 * L, rel=1e-9)


def test_reflection_report_attains_bound():
    s = make_regular_simplex(np.zeros(2), 1.0, 2)
    rep = bound_report(s, "reflection", "nonconvex", 1.0)
    assert rep.bound == pytest.approx(3.0, rel=1e-12)
    assert rep.achieved == pytest.approx(3.0, rel=1e-9)
    assert rep.attained and rep.dominated
    assert rep.quadratic.spectral_norm() <= 1.0 + 1e-9


def test_convex_reflection_report():
    s = make_regular_simplex(np.zeros(2), 1.0, 2)
    rep = bound_report(s, "reflection", "convex", 1.0)
    assert rep.bound == pytest.approx(2.25, rel=1e-12)
    assert rep.attained
    assert rep.quadratic.is_convex()
    eig = np.linalg.eigvalsh(rep.quadratic.H)
    assert eig.min() >= -1e-9 and eig.max() <= 1.0 + 1e-9


def test_shrink_report_attains_bound():
    s = make_regular_simplex(np.zeros(3), 1.0, 3)
    rep = bound_report(s, "shrink", "nonconvex", 1.0, gamma=0.3)
    expected = (4.0 / 3.0) * 0.3 * 0.7
    assert rep.bound == pytest.approx(expected, rel=1e-12)
    assert rep.attained


def test_worst_case_sign_flip():
    s = make_regular_simplex(np.zeros(2), 1.0, 2)
    g = g_matrix(s, query_point(s, "reflection"))
    qp = worst_case_quadratic(g, 1.0, "nonconvex", sign="positive")
    qn = worst_case_quadratic(g, 1.0, "nonconvex", sign="negative")
    np.testing.assert_allclose(qp.H, -qn.H, atol=1e-12)
    with pytest.raises(ValueError):
        worst_case_quadratic(g, 1.0, "nonconvex", sign="up")


def test_report_to_dict_keys():
    s = make_regular_simplex(np.zeros(2), 1.0, 2)
    d = bound_report(s, "centroid", "convex", 1.0).to_dict()
    assert set(d) == {"kind", "class", "bound", "achieved", "attained", "mu"}


# ---------------------------------------------------------------------------
# gradient inequalities


def test_gradient_report_linear_function(rng):
    n = 4
    s = random_regular_simplex(n, rng)
    a = rng.standard_normal(n)
    obj = Quadratic(H=np.zeros((n, n)), v=a, c=0.3)
    rep = gradient_bound_report(s, obj, L=1.0)
    assert rep["skipped"] == []
    assert rep["gradient_error"]["lhs"] <= 1e-18
    for name in ("simplex_gradient_upper", "gradient_error", "gap_lower"):
        assert rep[name]["holds"], name


def test_gradient_report_quadratic_n3():
    n, L = 3, 2.0
    s = make_regular_simplex(np.full(n, 1.0), 0.5, n)
    obj = Quadratic(H=L * np.eye(n), v=np.zeros(n))
    rep = gradient_bound_report(s, obj, L=L)
    for name in ("simplex_gradient_upper", "gradient_error", "gap_lower"):
        assert rep[name]["holds"], name


def test_gradient_report_skips_without_gradient():
    s = make_regular_simplex(np.zeros(2), 1.0, 2)
    rep = gradient_bound_report(s, lambda x: float(x @ x), L=1.0)
    assert set(rep["skipped"]) == {"gradient_error", "gap_lower"}
    assert rep["simplex_gradient_upper"]["holds"]


def test_gradient_inequalities_random_sweep():
    # random rotated/translated quadratics with ||H||_2 = L on random simplices
    rng = np.random.default_rng(99)
    n, L = 5, 3.0
    for _ in range(1000):
        s = random_regular_simplex(n, rng)
        Q = haar_rotation(n, rng)
        lam = rng.uniform(-1.0, 1.0, n)
        lam[np.argmax(np.abs(lam))] = np.sign(lam[np.argmax(np.abs(lam))]) or 1.0
        H = (Q * (L * lam)) @ Q.T
        obj = Quadratic(H=0.5 * (H + H.T), v=rng.standard_normal(n),
                        c=float(rng.standard_normal()))
        rep = gradient_bound_report(s, obj, L=L)
        for name in ("simplex_gradient_upper", "gradient_error", "gap_lower"):
            assert rep[name]["holds"], (name, rep[name])
