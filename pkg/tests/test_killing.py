from __future__ import annotations

import numpy as np
import pytest

from randers_lab.killing import (
    EuclideanKilling,
    GroupKilling,
    ProductKilling,
    SphereKilling,
    UnsupportedWind,
    commutator,
    constant_length_family,
    fd_lie_bracket,
    hopf_field,
    killing_residual,
    length_stats,
    standard_J,
    zero_field,
)
from randers_lab.randers import NavigationData
from randers_lab.spaces import CompactGroup, Euclidean, Product, Sphere, random_tangent


def _rot_blocks(angles):
    """Block-diagonal skew matrix rot(a1) + rot(a2) + ..."""
    k = len(angles)
    A = np.zeros((2 * k, 2 * k))
    for i, a in enumerate(angles):
        A[2 * i, 2 * i + 1] = -a
        A[2 * i + 1, 2 * i] = a
    return A


# --- evaluation -------------------------------------------------------------

def test_hopf_evaluate_at_pole(s3):
    X = hopf_field(s3, 1.0)
    v = X.evaluate(np.array([1.0, 0, 0, 0]))
    np.testing.assert_allclose(v, [0, 1, 0, 0])


def test_hopf_orthogonal_to_base(s3, rng):
    X = hopf_field(s3, 1.0)
    xs = s3.sample(rng, 200)
    vs = X.evaluate(xs)
    np.testing.assert_allclose(np.einsum("ij,ij->i", xs, vs), 0.0, atol=1e-14)


def test_euclidean_field_constant(rng):
    e = Euclidean(2)
    X = EuclideanKilling(e, np.array([1.0, 2.0]))
    xs = e.sample(rng, 10)
    np.testing.assert_array_equal(X.evaluate(xs), np.broadcast_to([1.0, 2.0], (10, 2)))


def test_product_field_componentwise(rng):
    p = Product((Sphere(3, 1.0), Euclidean(2)))
    X = ProductKilling(p, (hopf_field(p.factors[0], 0.5),
                           EuclideanKilling(p.factors[1], np.array([1.0, 0.0]))))
    x = p.sample(rng, 1)[0]
    v = X.evaluate(x)
    np.testing.assert_allclose(v[:4], p.factors[0].tangent_project(x[:4], v[:4]), atol=1e-14)
    np.testing.assert_array_equal(v[4:], [1.0, 0.0])


def test_skew_generator_required(s3):
    with pytest.raises(ValueError):
        SphereKilling(s3, np.eye(4))


# --- residual ---------------------------------------------------------------

def test_killing_residual_rotation_small(s3, rng):
    g = rng.normal(size=(4, 4))
    X = SphereKilling(s3, g - g.T)
    assert killing_residual(s3, X) < 1e-7


def test_killing_residual_translation_tiny():
    e = Euclidean(3)
    X = EuclideanKilling(e, np.array([1.0, -2.0, 0.5]))
    assert killing_residual(e, X) < 1e-12


def test_killing_residual_gradient_control(s3):
    # X = e1 - <e1,x> x stretches the metric; must be caught
    def bad(x):
        e1 = np.zeros(x.shape[-1])
        e1[0] = 1.0
        return s3.tangent_project(x, np.broadcast_to(e1, x.shape))

    assert killing_residual(s3, bad) > 1e-2


def test_killing_residual_group_sides(su2):
    L = GroupKilling(su2, np.array([0.0, 1.0, 0.0, 0.0]), np.zeros(4))
    R = GroupKilling(su2, np.zeros(4), np.array([0.0, 0.0, 1.0, 0.0]))
    assert killing_residual(su2, L) < 1e-7
    assert killing_residual(su2, R) < 1e-7


# --- length stats -----------------------------------------------------------

def test_length_stats_hopf_constant(s3):
    lo, hi = length_stats(s3, hopf_field(s3, 0.3))
    assert hi - lo < 1e-12
    assert lo == pytest.approx(0.3, abs=1e-12)


def test_length_stats_unequal_rotation(s3):
    lo, hi = length_stats(s3, SphereKilling(s3, _rot_blocks([1.0, 2.0])), n_samples=4000)
    assert lo == pytest.approx(1.0, abs=1e-2)
    assert hi == pytest.approx(2.0, abs=1e-2)


def test_length_stats_euclidean():
    e = Euclidean(2)
    lo, hi = length_stats(e, EuclideanKilling(e, np.array([3.0, 4.0])))
    assert lo == hi == pytest.approx(5.0)


def test_length_stats_finsler_length(e2_nav):
    # F-length of the F-unit field X + W with X = (1,0), W = (1/2,0)
    X = EuclideanKilling(e2_nav.space, np.array([1.5, 0.0]))
    lo, hi = length_stats(e2_nav, X)
    assert lo == pytest.approx(1.0, abs=1e-14)
    assert hi == pytest.approx(1.0, abs=1e-14)


# --- commutators ------------------------------------------------------------

def test_commutator_hopf_with_unitary(s3):
    J = standard_J(2)
    A = np.kron(np.array([[0.0, -1.0], [1.0, 0.0]]), np.eye(2))  # complex-linear, skew
    assert np.allclose(A @ J - J @ A, 0)
    C = commutator(hopf_field(s3, 1.0), SphereKilling(s3, A))
    assert np.allclose(C.A, 0)


def test_commutator_translations_vanish():
    e = Euclidean(3)
    X = EuclideanKilling(e, np.array([1.0, 0, 0]))
    Y = EuclideanKilling(e, np.array([0.0, 1, 0]))
    assert np.allclose(commutator(X, Y).v, 0)


@pytest.mark.parametrize("case", ["sphere", "group"])
def test_commutator_matches_fd_bracket(case, rng):
    # the closed-form bracket must match a finite-difference Lie bracket,
    # including sign, on 50 samples
    if case == "sphere":
        space = Sphere(3, 1.0)
        g1, g2 = rng.normal(size=(2, 4, 4))
        X = SphereKilling(space, g1 - g1.T)
        Y = SphereKilling(space, g2 - g2.T)
    else:
        space = CompactGroup("SU2", 1.0)
        X = GroupKilling(space, rng.normal(size=4) * [0, 1, 1, 1], rng.normal(size=4) * [0, 1, 1, 1])
        Y = GroupKilling(space, rng.normal(size=4) * [0, 1, 1, 1], rng.normal(size=4) * [0, 1, 1, 1])
    C = commutator(X, Y)
    xs = space.sample(rng, 50)
    exact = C.evaluate(xs)
    approx = np.stack([fd_lie_bracket(space, X, Y, x) for x in xs])
    np.testing.assert_allclose(exact, approx, atol=1e-6)


# --- flows ------------------------------------------------------------------

def test_hopf_flow_periodic(s3, rng):
    X = hopf_field(s3, 1.0)
    x = s3.sample(rng, 5)
    np.testing.assert_allclose(X.flow(x, 2 * np.pi), x, atol=1e-12)


def test_flow_group_law(s3, rng):
    g = rng.normal(size=(4, 4))
    X = SphereKilling(s3, g - g.T)
    x = s3.sample(rng, 5)
    a = X.flow(X.flow(x, 0.3), 0.9)
    b = X.flow(x, 1.2)
    np.testing.assert_allclose(a, b, atol=1e-12)


def test_su2_left_flow_is_subgroup(su2):
    X = GroupKilling(su2, np.array([0.0, 1.0, 0.0, 0.0]), np.zeros(4))
    one = np.array([1.0, 0, 0, 0])
    for t in (0.3, 1.0, np.pi):
        np.testing.assert_allclose(X.flow(one, t), [np.cos(t), np.sin(t), 0, 0], atol=1e-14)


def test_flow_identity_for_commuting_fields(hopf_nav, rng):
    fam = constant_length_family(hopf_nav)
    X = fam.random_member(np.random.default_rng(7), 0.8)
    W = hopf_nav.wind
    xs = hopf_nav.space.sample(rng, 100)
    for t in np.linspace(0.0, 2.0, 9):
        lhs = (X + W).flow(xs, t)
        rhs = X.flow(W.flow(xs, t), t)
        np.testing.assert_allclose(lhs, rhs, atol=1e-9)


def test_flow_preserves_h_distance(hopf_nav, rng):
    xs = hopf_nav.space.sample(rng, 50)
    ys = hopf_nav.space.sample(rng, 50)
    d0 = hopf_nav.space.h_distance(xs, ys)
    W = hopf_nav.wind
    d1 = hopf_nav.space.h_distance(W.flow(xs, 0.7), W.flow(ys, 0.7))
    np.testing.assert_allclose(d1, d0, atol=1e-9)


def test_wind_flow_is_f_isometry(hopf_nav, rng):
    # F(dphi_t y) = F(y): push tangent vectors with the linear flow map
    xs = hopf_nav.space.sample(rng, 50)
    ys = random_tangent(hopf_nav.space, rng, xs, unit=False)
    W = hopf_nav.wind
    t = 0.63
    f0 = hopf_nav.finsler_norm(xs, ys)
    # the flow of a skew generator is the linear map expm(tA)
    xt = W.flow(xs, t)
    yt = W.flow(ys, t)  # linear in the ambient coordinates
    f1 = hopf_nav.finsler_norm(xt, yt)
    np.testing.assert_allclose(f1, f0, atol=1e-9)


# --- constant-length families -----------------------------------------------

def test_family_contains_wind_direction(hopf_nav):
    fam = constant_length_family(hopf_nav)
    J = standard_J(2)
    M = fam.match(np.array([1.0, 0, 0, 0]), hopf_nav.wind.evaluate(np.array([1.0, 0, 0, 0])))
    # matching along W itself recovers a multiple of J
    np.testing.assert_allclose(M.A / 0.3, J, atol=1e-10)


def test_family_member_algebra(hopf_nav):
    fam = constant_length_family(hopf_nav)
    J = standard_J(2)
    rng = np.random.default_rng(42)
    for _ in range(20):
        M = fam.random_member(rng, 1.0).A
        np.testing.assert_allclose(M @ M, -np.eye(4), atol=1e-12)
        np.testing.assert_allclose(M @ J - J @ M, 0.0, atol=1e-12)


def test_family_members_have_constant_f_length(navs):
    rng = np.random.default_rng(5)
    for nav in navs.values():
        fam = constant_length_family(nav)
        X = fam.random_member(rng, 1.0)
        lo, hi = length_stats(nav, X + nav.wind)
        assert hi - lo < 1e-9


def test_family_k2_directions_cover_sphere():
    # at x = (1,0,0,0) the evaluation map of the c'-scaled family covers a
    # 2-sphere worth of directions: J'x has |J'x| = 1 and <J'x, x> = 0, and
    # the x-orthogonal component of J'x spans all of span(e2,e3,e4)
    s = Sphere(3, 1.0)
    nav = NavigationData(s, hopf_field(s, 0.3))
    fam = constant_length_family(nav)
    rng = np.random.default_rng(11)
    x = np.array([1.0, 0, 0, 0])
    dirs = np.stack([fam.random_member(rng, 1.0).evaluate(x) for _ in range(1000)])
    np.testing.assert_allclose(np.linalg.norm(dirs, axis=1), 1.0, atol=1e-12)
    # spread over the tangent 3-space minus nothing: rank of the span is 3
    assert np.linalg.matrix_rank(dirs, tol=1e-8) == 3
    # both J and -J orientations occur
    comps = dirs @ np.array([0.0, 1.0, 0, 0])
    assert comps.max() > 0.9 and comps.min() < -0.9


def test_group_family_opposite_side(su2_nav):
    fam = constant_length_family(su2_nav)
    rng = np.random.default_rng(3)
    M = fam.random_member(rng, 1.0)
    # left-invariant wind -> right-invariant family, so the pair commutes
    C = commutator(M, su2_nav.wind)
    assert np.allclose(C.l, 0) and np.allclose(C.r, 0)


def test_unsupported_wind_rejected(s3):
    nav = NavigationData(s3, SphereKilling(s3, 0.3 * _rot_blocks([1.0, 2.0])))
    with pytest.raises(UnsupportedWind):
        constant_length_family(nav)


def test_zero_field_flow_is_identity(rng):
    p = Product((Sphere(3, 1.0), Euclidean(2)))
    Z = zero_field(p)
    x = p.sample(rng, 4)
    np.testing.assert_array_equal(Z.flow(x, 1.7), x)
