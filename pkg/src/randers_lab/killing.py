"""Killing fields on the model spaces: exact flows, brackets, verifiers,
and the commuting constant-length families used for navigation.

Generators are stored exactly (skew matrix / algebra pair / constant
vector / tuple) and flows are evaluated by matrix or quaternion
exponentials. `flow(x, t)` broadcasts over a batch of points with a
per-point time array, which the distance code relies on.

Sphere conventions: ambient coordinates are paired as (x1+ix2, x3+ix4,
...) and J is the block-diagonal rotation [[0,-1],[1,0]] repeated; a
complex k x k matrix C acts on R^{2k} through `to_real_matrix(C)`.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.linalg

from . import quat
from .spaces import (
    CompactGroup,
    Euclidean,
    Product,
    Sphere,
    _concat_parts,
    frame,
    random_tangent,
)


class UnsupportedWind(ValueError):
    pass


# ---------------------------------------------------------------------------
# complex identification on even-dimensional ambient space
# ---------------------------------------------------------------------------


def to_complex(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return x[..., 0::2] + 1j * x[..., 1::2]


def to_real(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    out = np.empty(z.shape[:-1] + (2 * z.shape[-1],))
    out[..., 0::2] = z.real
    out[..., 1::2] = z.imag
    return out


def to_real_matrix(C: np.ndarray) -> np.ndarray:
    """Real 2k x 2k matrix acting as the complex k x k matrix C."""
    C = np.asarray(C, dtype=complex)
    k = C.shape[0]
    M = np.zeros((2 * k, 2 * k))
    M[0::2, 0::2] = C.real
    M[1::2, 1::2] = C.real
    M[1::2, 0::2] = C.imag
    M[0::2, 1::2] = -C.imag
    return M


def standard_J(k: int) -> np.ndarray:
    return to_real_matrix(1j * np.eye(k))


# ---------------------------------------------------------------------------
# field types
# ---------------------------------------------------------------------------


class KillingField:
    """Base class; subclasses hold exact per-factor generators."""

    def evaluate(self, x):
        raise NotImplementedError

    def flow(self, x, t):
        raise NotImplementedError

    def __add__(self, other):
        raise NotImplementedError

    def __rmul__(self, c):
        return self.scaled(float(c))

    def scaled(self, c: float):
        raise NotImplementedError

    def __neg__(self):
        return self.scaled(-1.0)

    def __sub__(self, other):
        return self + other.scaled(-1.0)


def _as_times(t, x):
    """Broadcast t against the batch shape of x."""
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    return np.broadcast_to(t, x.shape[:-1]) if x.ndim > 1 else t


@dataclass(frozen=True)
class EuclideanKilling(KillingField):
    """Constant translation field v (the constant-length class on E^n)."""

    space: Euclidean
    v: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "v", np.asarray(self.v, dtype=float))

    def evaluate(self, x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(self.v, x.shape).copy()

    def flow(self, x, t):
        t = _as_times(t, x)
        return np.asarray(x, dtype=float) + t[..., None] * self.v

    def __add__(self, other):
        return EuclideanKilling(self.space, self.v + other.v)

    def scaled(self, c):
        return EuclideanKilling(self.space, c * self.v)

    def to_config(self):
        return {"type": "euclidean-const", "v": self.v.tolist()}


@dataclass(frozen=True)
class SphereKilling(KillingField):
    """Rotation field x -> A x with A skew."""

    space: Sphere
    A: np.ndarray

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        if np.max(np.abs(A + A.T)) > 1e-12:
            raise ValueError("sphere generator must be skew-symmetric")
        object.__setattr__(self, "A", A)

    @cached_property
    def _eig(self):
        # complex Schur of a normal matrix is diagonal: A = Z diag(lam) Z^H
        T, Z = scipy.linalg.schur(self.A, output="complex")
        return np.diag(T).copy(), Z

    def evaluate(self, x):
        return np.asarray(x, dtype=float) @ self.A.T

    def flow(self, x, t):
        x = np.asarray(x, dtype=float)
        t = _as_times(t, x)
        lam, Z = self._eig
        c = x @ Z.conj()
        e = np.exp(np.multiply.outer(t, lam)) if np.ndim(t) else np.exp(t * lam)
        return np.real((c * e) @ Z.T)

    def __add__(self, other):
        return SphereKilling(self.space, self.A + other.A)

    def scaled(self, c):
        return SphereKilling(self.space, c * self.A)

    def to_config(self):
        return {"type": "sphere-skew", "matrix": self.A.tolist()}


@dataclass(frozen=True)
class GroupKilling(KillingField):
    """x -> l*x - x*r with l, r pure imaginary quaternions; flow
    x -> exp(t l) * x * exp(-t r)."""

    space: CompactGroup
    l: np.ndarray
    r: np.ndarray

    def __post_init__(self):
        l = np.asarray(self.l, dtype=float)
        r = np.asarray(self.r, dtype=float)
        if abs(l[0]) > 1e-12 or abs(r[0]) > 1e-12:
            raise ValueError("group generators must be pure imaginary quaternions")
        object.__setattr__(self, "l", l)
        object.__setattr__(self, "r", r)

    def evaluate(self, x):
        x = np.asarray(x, dtype=float)
        return quat.qmul(self.l, x) - quat.qmul(x, self.r)

    def flow(self, x, t):
        x = np.asarray(x, dtype=float)
        t = _as_times(t, x)
        el = quat.qexp_pure(np.multiply.outer(t, self.l[1:]))
        er = quat.qexp_pure(np.multiply.outer(t, -self.r[1:]))
        return quat.qmul(quat.qmul(el, x), er)

    def __add__(self, other):
        return GroupKilling(self.space, self.l + other.l, self.r + other.r)

    def scaled(self, c):
        return GroupKilling(self.space, c * self.l, c * self.r)

    def to_config(self):
        cfg = {"type": "group-pair", "l": self.l.tolist(), "r": self.r.tolist()}
        if not self.r.any():
            cfg = {"type": "group-left", "l": self.l.tolist()}
        elif not self.l.any():
            cfg = {"type": "group-right", "r": self.r.tolist()}
        return cfg


@dataclass(frozen=True)
class ProductKilling(KillingField):
    space: Product
    parts: tuple

    def evaluate(self, x):
        xs = self.space.split(x)
        return _concat_parts([p.evaluate(xf) for p, xf in zip(self.parts, xs)])

    def flow(self, x, t):
        xs = self.space.split(x)
        return _concat_parts([p.flow(xf, t) for p, xf in zip(self.parts, xs)])

    def __add__(self, other):
        return ProductKilling(self.space, tuple(a + b for a, b in zip(self.parts, other.parts)))

    def scaled(self, c):
        return ProductKilling(self.space, tuple(p.scaled(c) for p in self.parts))

    def to_config(self):
        return [dict(p.to_config(), factor=i) for i, p in enumerate(self.parts)]


def zero_field(space) -> KillingField:
    if isinstance(space, Euclidean):
        return EuclideanKilling(space, np.zeros(space.n))
    if isinstance(space, Sphere):
        return SphereKilling(space, np.zeros((space.ambient_dim, space.ambient_dim)))
    if isinstance(space, CompactGroup):
        return GroupKilling(space, np.zeros(4), np.zeros(4))
    if isinstance(space, Product):
        return ProductKilling(space, tuple(zero_field(f) for f in space.factors))
    raise TypeError(f"unknown space {space!r}")


def hopf_field(space: Sphere, c: float) -> SphereKilling:
    """The wind c*J on an odd sphere; h-length c*R everywhere."""
    return SphereKilling(space, c * standard_J(space.ambient_dim // 2))


# ---------------------------------------------------------------------------
# verifiers
# ---------------------------------------------------------------------------


def _flow_any(space, X, x, t, rk_steps: int = 8):
    """Flow for a KillingField (exact) or a callable vector field (RK4)."""
    if isinstance(X, KillingField):
        return X.flow(x, t)
    y = np.asarray(x, dtype=float).copy()
    h = t / rk_steps
    proj = space.tangent_project
    for _ in range(rk_steps):
        k1 = proj(y, X(y))
        y2 = space.retract(y + 0.5 * h * k1)
        k2 = proj(y2, X(y2))
        y3 = space.retract(y + 0.5 * h * k2)
        k3 = proj(y3, X(y3))
        y4 = space.retract(y + h * k3)
        k4 = proj(y4, X(y4))
        y = space.retract(y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4))
    return y


def killing_residual(space, X, n_samples: int = 20, seed: int = 0,
                     dt: float = 1e-3, eps: float = 1e-4) -> float:
    """Max over samples of |d/dt h(dphi_t u, dphi_t v)| at t = 0.

    Pushforwards are taken by central differences through geodesic
    curves; the flow is exact for KillingField inputs and RK4 for
    callables, so a nonzero residual isolates failure of the Killing
    equation rather than integration error.
    """
    rng = np.random.default_rng(seed)
    xs = space.sample(rng, n_samples)
    worst = 0.0
    for x in xs:
        u = random_tangent(space, rng, x)
        v = random_tangent(space, rng, x)

        def inner_at(t):
            ends_u = [_flow_any(space, X, space.h_exp(x, u, s), t) for s in (eps, -eps)]
            ends_v = [_flow_any(space, X, space.h_exp(x, v, s), t) for s in (eps, -eps)]
            du = (ends_u[0] - ends_u[1]) / (2 * eps)
            dv = (ends_v[0] - ends_v[1]) / (2 * eps)
            y = _flow_any(space, X, x, t)
            du = space.tangent_project(y, du)
            dv = space.tangent_project(y, dv)
            return space.h_inner(y, du, dv)

        resid = abs(inner_at(dt) - inner_at(-dt)) / (2 * dt)
        worst = max(worst, float(resid))
    return worst


def length_stats(space_or_nav, X, n_samples: int = 1000, seed: int = 0):
    """(min, max) of the field length over quasi-uniform samples.

    Plain spaces measure sqrt(h(X,X)); NavigationData measures F(X).
    """
    space = getattr(space_or_nav, "space", space_or_nav)
    rng = np.random.default_rng(seed)
    xs = space.sample(rng, n_samples)
    vals_field = X.evaluate(xs) if isinstance(X, KillingField) else np.array([X(x) for x in xs])
    if hasattr(space_or_nav, "finsler_norm"):
        vals = space_or_nav.finsler_norm(xs, vals_field)
    else:
        vals = np.sqrt(space.h_inner(xs, vals_field, vals_field))
    return float(np.min(vals)), float(np.max(vals))


def commutator(X: KillingField, Y: KillingField) -> KillingField:
    """Lie bracket [X, Y] as a closed-form field.

    Sign convention: for matrix fields x -> Ax, x -> Bx the bracket is
    x -> (BA - AB)x (pinned by a finite-difference test, not by fiat).
    """
    if isinstance(X, SphereKilling) and isinstance(Y, SphereKilling):
        A, B = X.A, Y.A
        return SphereKilling(X.space, B @ A - A @ B)
    if isinstance(X, EuclideanKilling) and isinstance(Y, EuclideanKilling):
        return EuclideanKilling(X.space, np.zeros_like(X.v))
    if isinstance(X, GroupKilling) and isinstance(Y, GroupKilling):
        l = quat.qmul(Y.l, X.l) - quat.qmul(X.l, Y.l)
        r = quat.qmul(Y.r, X.r) - quat.qmul(X.r, Y.r)
        return GroupKilling(X.space, l, r)
    if isinstance(X, ProductKilling) and isinstance(Y, ProductKilling):
        return ProductKilling(X.space, tuple(commutator(a, b) for a, b in zip(X.parts, Y.parts)))
    raise TypeError("commutator needs two fields of the same kind")


def fd_lie_bracket(space, X, Y, x, eps: float = 1e-5):
    """Finite-difference Lie bracket [X,Y](x); the oracle that pins signs."""

    def ev(F, p):
        return F.evaluate(p) if isinstance(F, KillingField) else F(p)

    def dYX(p):  # directional derivative of Y along X
        v = ev(X, p)
        return (ev(Y, space.retract(p + eps * v)) - ev(Y, space.retract(p - eps * v))) / (2 * eps)

    def dXY(p):
        v = ev(Y, p)
        return (ev(X, space.retract(p + eps * v)) - ev(X, space.retract(p - eps * v))) / (2 * eps)

    return space.tangent_project(x, dYX(x) - dXY(x))


# ---------------------------------------------------------------------------
# constant-length families commuting with the wind
# ---------------------------------------------------------------------------


def _involution_swapping(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Hermitian involution S with S a = b, S b = a for unit complex vectors."""
    k = a.shape[0]
    eye = np.eye(k, dtype=complex)
    s = a + b
    d = a - b
    ns, nd = np.linalg.norm(s), np.linalg.norm(d)
    if nd < 1e-12:
        return eye
    if ns < 1e-12:
        return eye - 2.0 * np.outer(a, a.conj())
    m = s / ns
    n = d / nd
    mm = np.outer(m, m.conj())
    nn = np.outer(n, n.conj())
    return eye - 2.0 * nn  # = mm - nn + (I - mm - nn); S m = m, S n = -n


@dataclass(frozen=True)
class SphereFamily:
    """Fields c' * to_real(i S), S a Hermitian involution: the rotations of
    constant length commuting with J (and hence with the wind c*J)."""

    space: Sphere
    wind_c: float

    @property
    def J(self) -> np.ndarray:
        return standard_J(self.space.ambient_dim // 2)

    def match(self, x, v) -> SphereKilling:
        """The member X with X(x) = v exactly; h-length |v| everywhere."""
        x = np.asarray(x, dtype=float)
        v = np.asarray(v, dtype=float)
        R = self.space.radius
        speed = float(np.linalg.norm(v))
        if speed < 1e-300:
            return zero_field(self.space)
        a = to_complex(x) / R
        b = -1j * to_complex(v) / speed
        S = _involution_swapping(a, b)
        M = to_real_matrix(1j * S)
        return SphereKilling(self.space, (speed / R) * M)

    def random_member(self, rng, length: float = 1.0) -> SphereKilling:
        k = self.space.ambient_dim // 2
        g = rng.normal(size=(k, k)) + 1j * rng.normal(size=(k, k))
        U, _ = np.linalg.qr(g)
        rank = int(rng.integers(0, k + 1))
        P = U[:, :rank] @ U[:, :rank].conj().T
        S = 2.0 * P - np.eye(k, dtype=complex)
        return SphereKilling(self.space, (length / self.space.radius) * to_real_matrix(1j * S))


@dataclass(frozen=True)
class EuclideanFamily:
    space: Euclidean

    def match(self, x, v) -> EuclideanKilling:
        return EuclideanKilling(self.space, np.asarray(v, dtype=float))

    def random_member(self, rng, length: float = 1.0) -> EuclideanKilling:
        g = rng.normal(size=self.space.n)
        return EuclideanKilling(self.space, length * g / np.linalg.norm(g))


@dataclass(frozen=True)
class GroupFamily:
    """One-sided translation fields on the side opposite the wind, so that
    every member commutes with the wind generator."""

    space: CompactGroup
    side: str  # "left" or "right" -- the side the MEMBERS act on

    def match(self, x, v) -> GroupKilling:
        x = np.asarray(x, dtype=float)
        v = np.asarray(v, dtype=float)
        if self.side == "right":
            r = -quat.qmul(quat.qconj(x), v)
            r[0] = 0.0
            return GroupKilling(self.space, np.zeros(4), r)
        l = quat.qmul(v, quat.qconj(x))
        l[0] = 0.0
        return GroupKilling(self.space, l, np.zeros(4))

    def random_member(self, rng, length: float = 1.0) -> GroupKilling:
        g = rng.normal(size=3)
        a = quat.pure(length / self.space.scale * g / np.linalg.norm(g))
        if self.side == "right":
            return GroupKilling(self.space, np.zeros(4), a)
        return GroupKilling(self.space, a, np.zeros(4))


@dataclass(frozen=True)
class ProductFamily:
    space: Product
    parts: tuple

    def match(self, x, v) -> ProductKilling:
        xs = self.space.split(x)
        vs = self.space.split(v)
        return ProductKilling(self.space, tuple(p.match(xf, vf) for p, xf, vf in zip(self.parts, xs, vs)))

    def random_member(self, rng, length: float = 1.0) -> ProductKilling:
        w = rng.normal(size=len(self.parts))
        w = np.abs(w) / np.linalg.norm(w)
        return ProductKilling(self.space, tuple(p.random_member(rng, length * wi)
                                                for p, wi in zip(self.parts, w)))


def constant_length_family(nav, factor: int | None = None):
    """Family of constant-length Killing fields commuting with nav's wind.

    For products, factor=None returns the componentwise family; an
    integer selects one factor's family.
    """
    space = nav.space
    W = nav.wind
    if isinstance(space, Product):
        fams = tuple(constant_length_family(_FactorView(f, p), None)
                     for f, p in zip(space.factors, W.parts))
        if factor is None:
            return ProductFamily(space, fams)
        return fams[factor]
    if isinstance(space, Euclidean):
        return EuclideanFamily(space)
    if isinstance(space, Sphere):
        J = standard_J(space.ambient_dim // 2)
        A = W.A
        c = float(np.tensordot(J, A) / np.tensordot(J, J))
        if np.max(np.abs(A - c * J)) > 1e-9:
            raise UnsupportedWind("sphere wind must be a multiple of the standard J")
        return SphereFamily(space, c)
    if isinstance(space, CompactGroup):
        left = bool(W.l.any())
        right = bool(W.r.any())
        if left and right:
            raise UnsupportedWind("group wind must be one-sided")
        # members live on the side opposite the wind (both sides work for W=0)
        return GroupFamily(space, "left" if right else "right")
    raise TypeError(f"unknown space {space!r}")


class _FactorView:
    """Minimal nav-like view (space, wind) for one product factor."""

    def __init__(self, space, wind):
        self.space = space
        self.wind = wind


# ---------------------------------------------------------------------------
# JSON field specs
# ---------------------------------------------------------------------------


def killing_from_config(space, cfg) -> KillingField:
    """Build a field from a JSON-style spec; products take a list of
    per-factor specs carrying a "factor" index (missing factors are zero)."""
    if isinstance(space, Product):
        parts = [zero_field(f) for f in space.factors]
        entries = cfg if isinstance(cfg, list) else [cfg]
        for entry in entries:
            i = int(entry.get("factor", 0))
            parts[i] = killing_from_config(space.factors[i], entry)
        return ProductKilling(space, tuple(parts))
    t = cfg.get("type")
    if t == "zero":
        return zero_field(space)
    if t == "hopf":
        return hopf_field(space, float(cfg["c"]))
    if t == "sphere-skew":
        return SphereKilling(space, np.asarray(cfg["matrix"], dtype=float))
    if t == "euclidean-const":
        return EuclideanKilling(space, np.asarray(cfg["v"], dtype=float))
    if t == "group-left":
        return GroupKilling(space, np.asarray(cfg["l"], dtype=float), np.zeros(4))
    if t == "group-right":
        return GroupKilling(space, np.zeros(4), np.asarray(cfg["r"], dtype=float))
    if t == "group-pair":
        return GroupKilling(space, np.asarray(cfg["l"], dtype=float),
                            np.asarray(cfg["r"], dtype=float))
    raise ValueError(f"unknown field spec {cfg!r}")
