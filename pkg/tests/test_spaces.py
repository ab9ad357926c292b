from __future__ import annotations

import numpy as np
import pytest

from randers_lab.spaces import (
    CompactGroup,
    Euclidean,
    Product,
    Sphere,
    SpaceError,
    frame,
    random_tangent,
    space_from_config,
)

SPACES = [
    Euclidean(2),
    Euclidean(3),
    Sphere(3, 1.0),
    Sphere(3, 2.0),
    Sphere(5, 1.0),
    CompactGroup("SU2", 1.0),
    CompactGroup("SU2", 0.5),
    Product((Sphere(3, 1.0), Euclidean(2))),
]


def _ids(spaces):
    return [type(s).__name__ + str(getattr(s, "dim", "")) for s in spaces]


def test_h_inner_euclidean_orthogonal():
    e = Euclidean(2)
    assert e.h_inner(np.zeros(2), np.array([1.0, 0.0]), np.array([0.0, 1.0])) == 0.0


def test_h_inner_sphere_ambient():
    s = Sphere(3, 1.0)
    x = np.array([1.0, 0, 0, 0])
    u = np.array([0.0, 1, 0, 0])
    assert s.h_inner(x, u, u) == pytest.approx(1.0)


def test_h_inner_product_additive(rng):
    p = Product((Euclidean(1), Sphere(3, 1.0)))
    x = p.sample(rng, 1)[0]
    u = random_tangent(p, rng, x)
    v = random_tangent(p, rng, x)
    parts = list(zip(p.factors, p.split(x), p.split(u), p.split(v)))
    total = sum(f.h_inner(xf, uf, vf) for f, xf, uf, vf in parts)
    assert p.h_inner(x, u, v) == pytest.approx(total, abs=1e-14)


def test_h_exp_euclidean_line():
    e = Euclidean(2)
    x = np.array([1.0, -2.0])
    v = np.array([0.5, 3.0])
    np.testing.assert_allclose(e.h_exp(x, v, 2.0), x + 2.0 * v)


def test_h_exp_sphere_quarter_turn():
    s = Sphere(3, 1.0)
    x = np.array([1.0, 0, 0, 0])
    v = np.array([0.0, 1, 0, 0])
    np.testing.assert_allclose(s.h_exp(x, v, np.pi / 2), [0, 1, 0, 0], atol=1e-15)


def test_h_exp_su2_one_parameter_subgroup():
    g = CompactGroup("SU2", 1.0)
    one = np.array([1.0, 0, 0, 0])
    i = np.array([0.0, 1, 0, 0])
    np.testing.assert_allclose(g.h_exp(one, i, np.pi), [-1, 0, 0, 0], atol=1e-15)


@pytest.mark.parametrize("space", SPACES, ids=_ids(SPACES))
def test_h_exp_distance_consistency(space, rng):
    # d(x, exp_x(t v)) = t |v|_h below the injectivity radius
    xs = space.sample(rng, 40)
    vs = random_tangent(space, rng, xs)
    cap = min(space.injectivity_radius, 10.0)
    for t in (0.1 * cap, 0.5 * cap, 0.9 * cap):
        ys = space.h_exp(xs, vs, t)
        np.testing.assert_allclose(space.h_distance(xs, ys), t, atol=1e-9)


@pytest.mark.parametrize("space", SPACES, ids=_ids(SPACES))
def test_h_distance_symmetric_triangle(space, rng):
    xs = space.sample(rng, 200)
    ys = space.sample(rng, 200)
    zs = space.sample(rng, 200)
    dxy = space.h_distance(xs, ys)
    np.testing.assert_allclose(dxy, space.h_distance(ys, xs), atol=1e-9)
    viol = dxy - (space.h_distance(xs, zs) + space.h_distance(zs, ys))
    assert viol.max() <= 1e-9


def test_product_distance_l2(rng):
    p = Product((Sphere(3, 1.0), Euclidean(2)))
    x, y = p.sample(rng, 2)
    expected = np.sqrt(sum(
        f.h_distance(xf, yf) ** 2
        for f, xf, yf in zip(p.factors, p.split(x), p.split(y))))
    assert p.h_distance(x, y) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("space", SPACES, ids=_ids(SPACES))
def test_tangent_project_idempotent(space, rng):
    xs = space.sample(rng, 100)
    ws = rng.normal(size=xs.shape)
    p1 = space.tangent_project(xs, ws)
    p2 = space.tangent_project(xs, p1)
    np.testing.assert_allclose(p1, p2, atol=1e-12)


def test_sphere_radial_projection_kills_x():
    s = Sphere(3, 2.0)
    x = s.retract(np.array([1.0, 1.0, 1.0, 1.0]))
    np.testing.assert_allclose(s.tangent_project(x, x), 0.0, atol=1e-14)


def test_euclidean_projection_is_identity(rng):
    e = Euclidean(3)
    w = rng.normal(size=3)
    np.testing.assert_array_equal(e.tangent_project(np.zeros(3), w), w)


@pytest.mark.parametrize("space", SPACES, ids=_ids(SPACES))
def test_frame_is_orthonormal(space, rng):
    x = space.sample(rng, 1)[0]
    B = frame(space, x)
    assert B.shape == (space.dim, space.ambient_dim)
    G = np.array([[space.h_inner(x, bi, bj) for bj in B] for bi in B])
    np.testing.assert_allclose(G, np.eye(space.dim), atol=1e-10)


@pytest.mark.parametrize("space", SPACES, ids=_ids(SPACES))
def test_dexp_matches_finite_differences(space, rng):
    x = space.sample(rng, 20)
    v = random_tangent(space, rng, x, unit=False)
    u = random_tangent(space, rng, x, unit=False)
    eps = 1e-6
    fd = (space.h_exp(x, v + eps * u) - space.h_exp(x, v - eps * u)) / (2 * eps)
    np.testing.assert_allclose(space.h_dexp(x, v, u), fd, atol=1e-8)


def test_dexp_at_zero_is_identity(rng):
    s = Sphere(3, 1.0)
    x = s.sample(rng, 5)
    u = random_tangent(s, rng, x)
    np.testing.assert_array_equal(s.h_dexp(x, np.zeros_like(x), u), u)


def test_sphere_log_inverts_exp(rng):
    s = Sphere(3, 1.0)
    x = s.sample(rng, 30)
    v = random_tangent(s, rng, x)
    y = s.h_exp(x, v, 0.7)
    np.testing.assert_allclose(s.h_log(x, y), 0.7 * v, atol=1e-12)


def test_sphere_antipodal_log_has_length_pi():
    s = Sphere(3, 1.0)
    x = np.array([1.0, 0, 0, 0])
    v = s.h_log(x, -x)
    assert np.sqrt(s.h_inner(x, v, v)) == pytest.approx(np.pi)


def test_even_sphere_rejected():
    with pytest.raises(SpaceError):
        Sphere(2, 1.0)


def test_su2_scale_antipodal_distance():
    g = CompactGroup("SU2", 0.5)
    one = np.array([1.0, 0, 0, 0])
    assert g.h_distance(one, -one) == pytest.approx(0.5 * np.pi)


def test_space_config_round_trip():
    cfg = {"kind": "product", "factors": [
        {"kind": "sphere", "dim": 3, "radius": 1.0},
        {"kind": "euclidean", "n": 2},
    ]}
    p = space_from_config(cfg)
    assert isinstance(p, Product)
    assert space_from_config(p.to_config()) == p


def test_product_flattens_nested():
    p = Product((Product((Euclidean(1), Euclidean(1))), Sphere(3, 1.0)))
    assert len(p.factors) == 3
    assert p.ambient_dim == 6
