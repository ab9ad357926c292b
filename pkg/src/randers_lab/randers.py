"""Randers metrics in navigation form (h, W) and defining form (a, b).

The navigation norm used everywhere:

    F(x, y) = (sqrt(h(y,W)^2 + lam*h(y,y)) - h(y,W)) / lam,   lam = 1 - h(W,W).

Under this formula the indicatrix {F=1} is the h-unit sphere translated
by +W, so the F-unit Killing fields assembled elsewhere are X + W with
X of h-unit length. Matrix-level conversions are frame-agnostic; the
manifold-level wrappers express tensors in the deterministic orthonormal
frame of `spaces.frame`.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .killing import KillingField, zero_field
from .spaces import frame as h_frame


class WindTooStrong(ValueError):
    pass


class NotRanders(ValueError):
    pass


# ---------------------------------------------------------------------------
# matrix-level conversions (pointwise, any frame)
# ---------------------------------------------------------------------------


def nav_to_defining_matrices(h: np.ndarray, W: np.ndarray):
    """(h_ij, W^i) -> (a_ij, b_i): a = h/lam + (W_cov/lam) outer (W_cov/lam),
    b = -W_cov/lam with W_cov = h W."""
    h = np.asarray(h, dtype=float)
    W = np.asarray(W, dtype=float)
    Wc = h @ W
    lam = 1.0 - W @ Wc
    if lam <= 0:
        raise WindTooStrong(f"h(W,W) = {W @ Wc:.6f} >= 1")
    a = h / lam + np.outer(Wc / lam, Wc / lam)
    b = -Wc / lam
    return a, b


def defining_to_nav_matrices(a: np.ndarray, b: np.ndarray):
    """(a_ij, b_i) -> (h_ij, W^i): h = (1-|beta|^2)(a - b outer b),
    W^i = -a^{ij} b_j / (1-|beta|^2)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    a_inv_b = np.linalg.solve(a, b)
    beta2 = b @ a_inv_b
    if beta2 >= 1.0:
        raise NotRanders(f"|beta|_alpha^2 = {beta2:.6f} >= 1")
    mu = 1.0 - beta2
    h = mu * (a - np.outer(b, b))
    W = -a_inv_b / mu
    return h, W


# ---------------------------------------------------------------------------
# navigation data on a model space
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NavigationData:
    space: object
    wind: KillingField

    def lam(self, x):
        W = self.wind.evaluate(x)
        return 1.0 - self.space.h_inner(x, W, W)

    def finsler_norm(self, x, y):
        """F(x, y); broadcasts over leading axes of x, y."""
        y = np.asarray(y, dtype=float)
        W = self.wind.evaluate(x)
        hyW = self.space.h_inner(x, y, W)
        hyy = self.space.h_inner(x, y, y)
        lam = 1.0 - self.space.h_inner(x, W, W)
        return (np.sqrt(hyW**2 + lam * hyy) - hyW) / lam

    def wind_bound(self, n_samples: int = 256, seed: int = 0) -> float:
        """Upper bound on ||W||_h from samples (exact for the constant-length
        winds in scope, up to roundoff margin)."""
        rng = np.random.default_rng(seed)
        xs = self.space.sample(rng, n_samples)
        W = self.wind.evaluate(xs)
        val = float(np.sqrt(np.max(self.space.h_inner(xs, W, W))))
        return min(val + 1e-12, 1.0 - 1e-12)

    def validate(self, n_samples: int = 1000, seed: int = 0) -> dict:
        """Diagnostics: wind strength, lambda margin, length constancy."""
        rng = np.random.default_rng(seed)
        xs = self.space.sample(rng, n_samples)
        W = self.wind.evaluate(xs)
        hWW = self.space.h_inner(xs, W, W)
        lengths = np.sqrt(hWW)
        report = {
            "max_hWW": float(np.max(hWW)),
            "lambda_margin": float(np.min(1.0 - hWW)),
            "length_deviation": float(np.max(lengths) - np.min(lengths)),
            "not_randers": bool(np.max(hWW) >= 1.0),
            "near_unit_warning": bool(np.max(lengths) >= 0.98),
        }
        report["ok"] = not report["not_randers"] and not report["near_unit_warning"]
        return report

    def to_config(self) -> dict:
        return {"space": self.space.to_config(), "wind": self.wind.to_config()}


def riemannian(space) -> NavigationData:
    """The W = 0 case: F reduces to the h-norm."""
    return NavigationData(space, zero_field(space))


# ---------------------------------------------------------------------------
# defining form at a point
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DefiningForm:
    """Pointwise (a_ij, b_i) in an explicit orthonormal h-frame at x."""

    x: np.ndarray
    frame: np.ndarray  # rows = frame vectors, shape (dim, ambient_dim)
    a: np.ndarray
    b: np.ndarray

    def coeffs(self, space, y):
        """Frame coefficients of an ambient tangent y at x."""
        return np.array([space.h_inner(self.x, y, f) for f in self.frame])

    def norm_defining(self, space, y):
        """F(y) = sqrt(a_ij y^i y^j) + b_i y^i through the defining form."""
        c = self.coeffs(space, y)
        return float(np.sqrt(c @ self.a @ c) + self.b @ c)


def from_navigation(nav: NavigationData, x) -> DefiningForm:
    """Defining form of nav at x, expressed in the deterministic frame."""
    x = np.asarray(x, dtype=float)
    B = h_frame(nav.space, x)
    Wamb = nav.wind.evaluate(x)
    w = np.array([nav.space.h_inner(x, Wamb, f) for f in B])
    a, b = nav_to_defining_matrices(np.eye(len(B)), w)
    return DefiningForm(x=x, frame=B, a=a, b=b)


def to_navigation(df: DefiningForm):
    """Back out (h_ij, W^i) in df's frame, plus the ambient wind vector."""
    h, Wc = defining_to_nav_matrices(df.a, df.b)
    W_ambient = Wc @ df.frame
    return h, Wc, W_ambient


# ---------------------------------------------------------------------------
# fundamental tensor
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FundamentalTensor:
    x: np.ndarray
    y: np.ndarray
    frame: np.ndarray
    g: np.ndarray  # (dim, dim), symmetric positive definite


def fundamental_tensor(nav: NavigationData, x, y, step: float = 1e-4) -> FundamentalTensor:
    """g_ij(x, y) = Hessian of F^2/2 in y, central differences in the
    orthonormal frame; step is relative to the h-length of y."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    speed = np.sqrt(nav.space.h_inner(x, y, y))
    if speed < 1e-300:
        raise ValueError("fundamental tensor is undefined at y = 0")
    B = h_frame(nav.space, x)
    dim = len(B)
    c0 = np.array([nav.space.h_inner(x, y, f) for f in B])
    s = step * speed

    # F^2/2 on a grid of frame-coefficient offsets, evaluated in one batch
    offsets = []
    for i in range(dim):
        for j in range(dim):
            for si, sj in ((1, 1), (-1, -1), (1, -1), (-1, 1)):
                e = np.zeros(dim)
                e[i] += si * s
                e[j] += sj * s
                offsets.append(e)
    C = c0 + np.array(offsets)
    ys = C @ B
    vals = 0.5 * nav.finsler_norm(np.broadcast_to(x, ys.shape), ys) ** 2
    vals = vals.reshape(dim, dim, 4)
    g = (vals[..., 0] + vals[..., 1] - vals[..., 2] - vals[..., 3]) / (4 * s * s)
    g = 0.5 * (g + g.T)
    return FundamentalTensor(x=x, y=y, frame=B, g=g)
