"""Panel integrals of the 2D Laplace single and double layer kernels.

All local quantities use monomials in the normalized segment parameter:
a target segment ``x(s) = xa + s (xb - xa)`` and a source segment
``y(t) = ya + t (yb - ya)`` with ``s, t`` in [0, 1]. The moment matrices
returned here are

    slp:  M[p, q] = int int G(x, y) s^p t^q  dS_y dS_x,   G = -log|x - y| / (2 pi)
    dlp:  M[p, q] = int int dG/dn_y(x, y) s^p t^q dS_y dS_x,
          dG/dn_y = (x - y) . n_y / (2 pi |x - y|^2)

with ``n_y`` the right-hand normal of the source (outward for a
counterclockwise loop).

Point-to-segment integrals are closed form near the segment. For points
further than ``FAR_RATIO`` source lengths the closed form loses digits
to cancellation, and a Gauss rule is used instead; it is exact to
rounding there.

Pairs sharing a vertex (including identical panels) are reduced by the
Duffy split of the unit square at the diagonal: the kernel singularity
sits at the common vertex and each triangle collapses to a 1D integral
of the same closed-form moments. Disjoint pairs use the closed-form
inner integral with an outer Gauss rule, bisecting the target where it
comes closer to the source than half its own length.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np
from scipy.special import xlogy

from ..quadrature import gauss_line

FAR_RATIO = 3.0
_FAR_GAUSS = 16
INV_2PI = 1.0 / (2.0 * np.pi)


class DegeneratePanel(ValueError):
    pass


def _dot(a, b):
    return a[..., 0] * b[..., 0] + a[..., 1] * b[..., 1]


def _line_coords(P, Q):
    """Foot parameter u0 and distance eta (both in units of |Q|) of P from the line uQ."""
    qq = _dot(Q, Q)
    u0 = _dot(P, Q) / qq
    cross = P[..., 0] * Q[..., 1] - P[..., 1] * Q[..., 0]
    eta = np.abs(cross) / qq
    return u0, eta, qq


def _far_mask(u0, eta):
    """Points whose distance to the segment [0, Q] exceeds FAR_RATIO |Q|."""
    du = np.where(u0 < 0, -u0, np.where(u0 > 1, u0 - 1, 0.0))
    return du * du + eta * eta > FAR_RATIO**2


def _binomial_shift(moments, u0, qmax):
    """Turn moments in v = u - u0 into moments in u: sum_j C(q,j) u0^(q-j) m_j."""
    out = np.empty(moments.shape)
    for q in range(qmax + 1):
        acc = np.zeros(u0.shape)
        for j in range(q + 1):
            acc = acc + comb(q, j) * u0 ** (q - j) * moments[..., j]
        out[..., q] = acc
    return out


def log_moments(P, Q, qmax):
    """int_0^1 u^q log|P - u Q| du for q = 0..qmax, shape P.shape[:-1] + (qmax+1,)."""
    P = np.asarray(P, dtype=float)
    Q = np.broadcast_to(np.asarray(Q, dtype=float), P.shape)
    u0, eta, qq = _line_coords(P, Q)
    a, b = -u0, 1.0 - u0
    e2 = eta * eta
    with np.errstate(divide="ignore", invalid="ignore"):
        ang = np.where(eta > 0, np.arctan(b / eta) - np.arctan(a / eta), 0.0)
        logb = np.log(b * b + e2)
        loga = np.log(a * a + e2)
    # U_j = eta^2 int_a^b v^j / (v^2 + eta^2) dv
    nmax = qmax
    U = np.zeros(P.shape[:-1] + (nmax + 1,))
    U[..., 0] = eta * ang
    if nmax >= 1:
        with np.errstate(invalid="ignore"):
            U[..., 1] = np.where(eta > 0, 0.5 * e2 * (logb - loga), 0.0)
    for j in range(2, nmax + 1):
        U[..., j] = e2 * (b ** (j - 1) - a ** (j - 1)) / (j - 1) - e2 * U[..., j - 2]
    # L_j = int_a^b v^j log(v^2 + eta^2) dv
    L = np.empty_like(U)
    for j in range(nmax + 1):
        m = j + 1
        boundary = (xlogy(b**m, b * b + e2) - xlogy(a**m, a * a + e2)) / m
        L[..., j] = boundary - (2.0 / m) * ((b**m - a**m) / m - U[..., j])
    out = 0.5 * _binomial_shift(L, u0, qmax)
    out += 0.5 * np.log(qq)[..., None] / np.arange(1, qmax + 2)

    far = _far_mask(u0, eta)
    if np.any(far):
        t, w = gauss_line(_FAR_GAUSS)
        Pf, Qf = P[far], Q[far]
        r = Pf[:, None, :] - t[None, :, None] * Qf[:, None, :]
        lg = 0.5 * np.log(_dot(r, r))
        out[far] = np.einsum("g,ng,gq->nq", w, lg, t[:, None] ** np.arange(qmax + 1))
    return out


def _signed_moments(u0, eta_s, qmax):
    """eta_s * int_a^b v^j / (v^2 + eta^2) dv shifted to u-moments, a = -u0, b = 1 - u0."""
    a, b = -u0, 1.0 - u0
    e2 = eta_s * eta_s
    nz = eta_s != 0
    safe = np.where(nz, eta_s, 1.0)
    T = np.zeros(np.shape(u0) + (qmax + 1,))
    T[..., 0] = np.where(nz, np.arctan(b / safe) - np.arctan(a / safe), 0.0)
    if qmax >= 1:
        with np.errstate(divide="ignore", invalid="ignore"):
            lg = np.log(b * b + e2) - np.log(a * a + e2)
            T[..., 1] = np.where(nz, 0.5 * eta_s * lg, 0.0)
    for j in range(2, qmax + 1):
        T[..., j] = eta_s * (b ** (j - 1) - a ** (j - 1)) / (j - 1) - e2 * T[..., j - 2]
    return _binomial_shift(T, u0, qmax)


def _inv_quad_moments(P, Q, qmax):
    """int_0^1 u^q / |P - uQ|^2 du for P off the line through Q."""
    u0, eta, qq = _line_coords(np.asarray(P, float), np.asarray(Q, float))
    return _signed_moments(u0, eta, qmax) / (eta * qq)


def dlp_moments(P, Q, n, qmax):
    """int_0^1 u^q (P - uQ).n / |P - uQ|^2 |Q| du, with n the unit normal of Q.

    This is the double layer kernel (without 1/2pi) integrated against t^q
    over a source segment starting at the origin, seen from P.
    """
    P = np.asarray(P, dtype=float)
    Q = np.broadcast_to(np.asarray(Q, dtype=float), P.shape)
    n = np.broadcast_to(np.asarray(n, dtype=float), P.shape)
    u0, eta, qq = _line_coords(P, Q)
    eta_s = _dot(P, n) / np.sqrt(qq)
    out = _signed_moments(u0, eta_s, qmax)

    far = _far_mask(u0, eta)
    if np.any(far):
        t, w = gauss_line(_FAR_GAUSS)
        Pf, Qf, nf = P[far], Q[far], n[far]
        r = Pf[:, None, :] - t[None, :, None] * Qf[:, None, :]
        ker = _dot(r, nf[:, None, :]) / _dot(r, r) * np.sqrt(_dot(Qf, Qf))[:, None]
        out[far] = np.einsum("g,ng,gq->nq", w, ker, t[:, None] ** np.arange(qmax + 1))
    return out


def right_normal(d):
    d = np.asarray(d, dtype=float)
    return np.stack([d[..., 1], -d[..., 0]], axis=-1) / np.sqrt(_dot(d, d))[..., None]


@dataclass(frozen=True)
class PanelPair:
    target: np.ndarray  # (2, 2): start, end
    source: np.ndarray
    relation: str

    @classmethod
    def from_points(cls, xa, xb, ya, yb) -> "PanelPair":
        target = np.array([xa, xb], dtype=float)
        source = np.array([ya, yb], dtype=float)
        for seg in (target, source):
            if not np.any(seg[1] != seg[0]):
                raise DegeneratePanel("zero-length segment")
        return cls(target, source, classify(target, source))


def classify(target, source) -> str:
    same = [[np.array_equal(target[i], source[j]) for j in range(2)] for i in range(2)]
    if (same[0][0] and same[1][1]) or (same[0][1] and same[1][0]):
        return "identical"
    if any(same[0]) or any(same[1]):
        return "adjacent"
    return "disjoint"


def _reversal(deg, reverse):
    """R[p, m]: s^p = sum_m R[p, m] s'^m with s = 1 - s' if reversed."""
    R = np.zeros((deg + 1, deg + 1))
    for p in range(deg + 1):
        if reverse:
            for m in range(p + 1):
                R[p, m] = comb(p, m) * (-1) ** m
        else:
            R[p, p] = 1.0
    return R


def _touching_moments(pair: PanelPair, pmax, qmax, kernel):
    (xa, xb), (ya, yb) = pair.target, pair.source
    if np.array_equal(xa, ya) or np.array_equal(xa, yb):
        c, A, rev_t = xa, xb - xa, False
    else:
        c, A, rev_t = xb, xa - xb, True
    if np.array_equal(ya, c):
        B, rev_s = yb - ya, False
    else:
        B, rev_s = ya - yb, True
    la, lb = np.hypot(*A), np.hypot(*B)
    kmax = max(pmax, qmax) + 1
    M = np.zeros((pmax + 1, qmax + 1))
    if kernel == "slp":
        fa = log_moments(A, B, kmax)  # int u^q log|A - uB|
        fb = log_moments(B, A, kmax)  # int u^p log|B - uA|
        for p in range(pmax + 1):
            for q in range(qmax + 1):
                n = p + q + 2
                val = -1.0 / (n * n * (q + 1)) + fa[q] / n - 1.0 / (n * n * (p + 1)) + fb[p] / n
                M[p, q] = -INV_2PI * la * lb * val
    elif kernel == "dlp":
        # (x - y).n_y = s A.n_y on the Duffy triangles since B is parallel to the source
        an = float(_dot(A, right_normal(yb - ya)))
        # collinear panels: the kernel vanishes identically; the contribution is
        # proportional to sin(angle), so rounding-level values are dropped
        if abs(an) > 1e-13 * la:
            inv_a = _inv_quad_moments(A, B, kmax)  # int u^q / |A - uB|^2
            inv_b = _inv_quad_moments(B, A, kmax)  # int u^m / |B - uA|^2
            for p in range(pmax + 1):
                for q in range(qmax + 1):
                    M[p, q] = INV_2PI * la * lb * an * (inv_a[q] + inv_b[p + 1]) / (p + q + 1)
    else:
        raise ValueError(f"unknown kernel {kernel!r}")
    return _reversal(pmax, rev_t) @ M @ _reversal(qmax, rev_s).T


def _inner(kernel, x, ya, d, nrm, qmax):
    """Source-segment integral at target points x (..., 2), including length."""
    P = x - ya
    if kernel == "slp":
        return -INV_2PI * np.hypot(*d) * log_moments(P, d, qmax)
    return INV_2PI * dlp_moments(P, d, nrm, qmax)


def _segment_distance(a0, a1, b0, b1):
    def pt_seg(p, s0, s1):
        d = s1 - s0
        t = np.clip(_dot(p - s0, d) / _dot(d, d), 0.0, 1.0)
        r = p - (s0 + t[..., None] * d)
        return np.sqrt(_dot(r, r))

    return np.minimum(
        np.minimum(pt_seg(a0, b0, b1), pt_seg(a1, b0, b1)),
        np.minimum(pt_seg(b0, a0, a1), pt_seg(b1, a0, a1)),
    )


def _disjoint_moments(pair: PanelPair, pmax, qmax, kernel, n_gauss, depth=0, s0=0.0, s1=1.0):
    (xa, xb), (ya, yb) = pair.target, pair.source
    d_t = xb - xa
    p0, p1 = xa + s0 * d_t, xa + s1 * d_t
    sub_len = (s1 - s0) * np.hypot(*d_t)
    dist = float(_segment_distance(p0, p1, ya, yb))
    if dist < 0.5 * sub_len and depth < 50:
        mid = 0.5 * (s0 + s1)
        return _disjoint_moments(pair, pmax, qmax, kernel, n_gauss, depth + 1, s0, mid) + _disjoint_moments(
            pair, pmax, qmax, kernel, n_gauss, depth + 1, mid, s1
        )
    t, w = gauss_line(n_gauss)
    s = s0 + (s1 - s0) * t
    x = xa + s[:, None] * d_t
    d_s = yb - ya
    inner = _inner(kernel, x, ya, d_s, right_normal(d_s), qmax)
    weights = (s1 - s0) * w * np.hypot(*d_t)
    return np.einsum("g,gp,gq->pq", weights, s[:, None] ** np.arange(pmax + 1), inner)


def panel_moments(pair: PanelPair, pmax: int, qmax: int, kernel: str = "slp", n_gauss: int = 16) -> np.ndarray:
    """Monomial moment matrix (pmax+1, qmax+1) of ``kernel`` for one panel pair."""
    if pair.relation == "disjoint":
        return _disjoint_moments(pair, pmax, qmax, kernel, n_gauss)
    return _touching_moments(pair, pmax, qmax, kernel)


def slp_panel_moments(pair: PanelPair, p: int, q: int, n_gauss: int = 16) -> np.ndarray:
    return panel_moments(pair, p, q, "slp", n_gauss)


def dlp_panel_moments(pair: PanelPair, p: int, q: int, n_gauss: int = 16) -> np.ndarray:
    return panel_moments(pair, p, q, "dlp", n_gauss)
