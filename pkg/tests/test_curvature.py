import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from circleflow import curvature as cv
from circleflow import generators as gen
from circleflow.complex import CellComplex, ComplexError
from circleflow.curvature import IncompleteMetricError, PackingMetric
from circleflow.geometry import Background, DomainError
from circleflow.lattice import nonlinearity_F

E, H = Background.EUCLIDEAN, Background.HYPERBOLIC


@pytest.fixture(scope="module")
def z2():
    return gen.z2_lattice(5)


def unit(cx):
    return PackingMetric.constant(E, cx.n_vertices, 1.0)


def test_metric_domain():
    with pytest.raises(DomainError):
        PackingMetric(H, [0.1, -0.2])
    with pytest.raises(DomainError):
        PackingMetric(E, [np.inf])
    m = PackingMetric.from_radii(H, [1.0, 2.0])
    assert np.allclose(m.r, [1.0, 2.0])


# -- curvature ---------------------------------------------------------

def test_regular_lattice_is_flat(z2):
    K = cv.curvature(z2, unit(z2))
    assert np.max(np.abs(K[sorted(z2.interior_vertices)])) < 1e-14


def test_single_bump(z2):
    v = gen.z2_vertex(z2, 0, 0)
    r = np.ones(z2.n_vertices)
    r[v] = 2.0
    m = PackingMetric.from_radii(E, r)
    # 2 pi - 8 arctan(1/2), 30-digit value
    assert cv.vertex_curvature(z2, m, z2.vertex_ids[v]) == pytest.approx(2.57400443517313754721, abs=1e-13)
    assert cv.curvature(z2, m)[v] == pytest.approx(2.57400443517313754721, abs=1e-13)


def test_huge_hyperbolic_radii_approach_two_pi(hex2):
    m = PackingMetric.constant(H, hex2.n_vertices, 50.0)
    v = sorted(hex2.interior_vertices)[0]
    assert cv.vertex_curvature(hex2, m, hex2.vertex_ids[v]) == pytest.approx(2 * math.pi, abs=1e-12)


def test_missing_value(z2):
    u = np.zeros(z2.n_vertices)
    u[3] = np.nan
    with pytest.raises(IncompleteMetricError):
        cv.curvature(z2, PackingMetric(E, u))


@pytest.mark.parametrize("bg", [E, H])
def test_curvature_bounds(bg, hex2, rng):
    for _ in range(20):
        u = -rng.uniform(0.05, 3.0, hex2.n_vertices)
        K = cv.curvature(hex2, PackingMetric(bg, u))
        d = hex2.degree
        inner = sorted(hex2.interior_vertices)
        assert np.all(K[inner] < 2 * math.pi)
        assert np.all(K[inner] >= 2 * math.pi * (1 - d[inner]))


def test_euclidean_scale_invariance(z2, rng):
    u = rng.normal(0, 0.3, z2.n_vertices)
    K1 = cv.curvature(z2, PackingMetric(E, u))
    K2 = cv.curvature(z2, PackingMetric(E, u + 1.7))
    assert np.max(np.abs(K1 - K2)) < 1e-12


def test_semilinear_decomposition(z2, rng):
    # K_i = -sum_j [(u_j - u_i) + F(u_j - u_i)] at Theta = pi/2
    u = rng.normal(0, 0.4, z2.n_vertices)
    K = cv.curvature(z2, PackingMetric(E, u))
    for v in sorted(z2.interior_vertices):
        nb = z2.neighbors(v)
        x = u[nb] - u[v]
        assert K[v] == pytest.approx(-np.sum(x + nonlinearity_F(x)), abs=1e-12)


def test_character_bridge(rng):
    cx = gen.hex_lattice(1)
    cx = cx.with_theta(rng.uniform(0.4, 2.4, cx.n_edges))
    K = cv.curvature(cx, unit(cx))
    from circleflow.complex import character
    for v in sorted(cx.interior_vertices):
        assert K[v] == pytest.approx(2 * math.pi - character(cx, cx.vertex_ids[v]), abs=1e-12)


# -- prescribed curvature ---------------------------------------------

def test_k_hat_examples():
    z = gen.z2_lattice(2)
    assert not z.with_infinity(vertices=[]).infinity_set
    with pytest.raises(ComplexError):
        cv.prescribed_curvature_hat(z)
    # corner (-1,-1)'s neighbours (-2,-1), (-1,-2) sent to infinity
    a, b = gen.z2_vertex(z, -2, -1), gen.z2_vertex(z, -1, -2)
    zi = z.with_infinity(vertices=[a, b])
    Kh = cv.prescribed_curvature_hat(zi)
    assert Kh[gen.z2_vertex(z, -1, -1)] == pytest.approx(2 * math.pi)
    assert Kh[gen.z2_vertex(z, 0, 0)] == 0.0
    o = gen.octahedron().with_infinity(face=0)
    Kh = cv.prescribed_curvature_hat(o)
    finite = sorted(set(range(6)) - o.infinity_set)
    # each finite octahedron vertex sees two infinity vertices at Theta = pi/3
    assert np.allclose(Kh[finite], 4 * math.pi / 3)
    single = CellComplex((0, 1, 2), [[0, 1], [1, 2]], [math.pi / 3, 1.0], [], infinity_vertices=[1])
    assert cv.prescribed_curvature_hat(single)[0] == pytest.approx(2 * math.pi / 3)


# -- dual formulation --------------------------------------------------

def test_dual_face_curvature_interior():
    t = gen.z2_torus(4)
    r = np.ones(len(t.faces))
    for f in range(len(t.faces)):
        assert cv.dual_face_curvature(t, r, f) == pytest.approx(2 * math.pi, abs=1e-14)


def test_dual_face_curvature_weights(rng):
    cube = gen.cube().with_infinity(face=0)
    bnd = cv.boundary_faces(cube)
    assert len(bnd) == 4
    r = rng.uniform(0.5, 2.0, len(cube.faces))
    f = sorted(bnd)[0]
    expect = 0.0
    for e in cube.faces[f]:
        for g in cube.edge_faces[e]:
            if g in (f, cube.infinity_face):
                continue
            T = cube.theta[e]
            chord = math.sqrt(r[f] ** 2 + r[g] ** 2 - 2 * math.cos(T) * r[f] * r[g])
            alpha = 1.0 if g in bnd else 2.0
            expect += alpha * math.asin(r[g] * math.sin(T) / chord)
    assert cv.dual_face_curvature(cube, r, f) == pytest.approx(expect, abs=1e-14)
    with pytest.raises(ComplexError):
        cv.dual_face_curvature(cube, r, 0)


# -- linearization -----------------------------------------------------

def test_weights_on_regular_lattice(z2):
    w = cv.flow_jacobian_weights(z2, unit(z2))
    inner = z2.interior_vertices
    both = np.array([i in inner and j in inner for i, j in zip(w.i, w.j)])
    assert np.allclose(w.omega[both], 1.0, atol=1e-15)
    assert np.max(np.abs(w.g)) < 1e-14


def test_euclidean_g_vanishes(z2, rng):
    w = cv.flow_jacobian_weights(z2, PackingMetric(E, rng.normal(0, 0.5, z2.n_vertices)))
    assert np.all(w.omega > 0)
    assert np.max(np.abs(w.g)) < 1e-12


def test_hyperbolic_g_nonpositive(hex2, rng):
    w = cv.flow_jacobian_weights(hex2, PackingMetric(H, -rng.uniform(0.1, 2, hex2.n_vertices)))
    assert np.all(w.omega > 0)
    assert np.all(w.g <= 1e-15)


@pytest.mark.parametrize("bg", [E, H])
def test_jacobian_matches_finite_differences(bg, rng):
    cx = gen.hex_lattice(1) if bg is H else gen.z2_lattice(3)
    u = -rng.uniform(0.3, 1.5, cx.n_vertices)
    J = cv.curvature_jacobian(cx, PackingMetric(bg, u)).toarray()
    h = 1e-6
    for j in rng.choice(cx.n_vertices, 8, replace=False):
        up, dn = u.copy(), u.copy()
        up[j] += h
        dn[j] -= h
        col = (cv.curvature(cx, PackingMetric(bg, up)) - cv.curvature(cx, PackingMetric(bg, dn))) / (2 * h)
        big = np.abs(col) > 1e-8
        assert np.max(np.abs(J[big, j] - col[big]) / np.abs(col[big])) < 1e-5
        assert np.max(np.abs(J[~big, j])) < 1e-8


def test_jacobian_annihilates_constants(z2, rng):
    for _ in range(5):
        J = cv.curvature_jacobian(z2, PackingMetric(E, rng.normal(0, 1, z2.n_vertices)))
        assert np.max(np.abs(J @ np.ones(z2.n_vertices))) < 1e-9


def test_flow_jacobian_is_laplacian_plus_g(hex2, rng):
    m = PackingMetric(H, -rng.uniform(0.2, 2, hex2.n_vertices))
    w = cv.flow_jacobian_weights(hex2, m)
    J = cv.curvature_jacobian(hex2, m)
    # dK/du = -(Delta_omega + diag(g))
    A = -(w.matrix() + np.diag(w.g))
    assert np.max(np.abs(J.toarray() - A)) < 1e-12


@given(st.lists(st.floats(min_value=-1.0, max_value=1.0), min_size=5, max_size=5))
def test_omega_symmetric(vals):
    cx = gen.z2_lattice(1)
    u = np.resize(np.array(vals), cx.n_vertices)
    c = cv._edges(cx)
    ri, rj = PackingMetric(E, u).r[c.i], PackingMetric(E, u).r[c.j]
    from circleflow import geometry as geo
    assert np.allclose(geo.d_theta_d_u(E, ri, rj, c.theta)[1], geo.d_theta_d_u(E, rj, ri, c.theta)[1])
