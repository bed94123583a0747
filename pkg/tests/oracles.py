"""Independent reference computations shared by the test modules."""

from functools import lru_cache

import numpy as np

from fembem.bem.panels import PanelPair


def graded_offsets(layers: int, n: int, sigma: float = 0.15):
    """Gauss rule on [0, 1] graded geometrically toward 0 (offsets and weights)."""
    g, w = np.polynomial.legendre.leggauss(n)
    g, w = 0.5 * (g + 1), 0.5 * w
    edges = np.concatenate([[0.0], sigma ** np.arange(layers, -1, -1.0)])
    lo, hi = edges[:-1], edges[1:]
    return (lo[:, None] + (hi - lo)[:, None] * g).ravel(), ((hi - lo)[:, None] * w).ravel()


def split_rule(c, layers: int, n: int):
    """Rule on [0, 1] graded toward 0, c and 1, as (base, offset, weight) with node = base + offset.

    ``c`` may be an array; the rule is then built for every entry (leading
    axis). Keeping the offset separate from its base preserves offsets far
    below the rounding unit of the base, so the kernel can be evaluated
    right next to its singularity.
    """
    c = np.clip(np.atleast_1d(np.asarray(c, dtype=float)), 0.0, 1.0)[:, None]
    o, w = graded_offsets(layers, n)
    bases, offs, wts = [], [], []
    for a, b in ((0.0, c), (c, 1.0)):
        half = 0.5 * (b - a) * np.ones_like(c)
        for base, sign in ((a, 1.0), (b, -1.0)):
            bases.append(np.broadcast_to(base, half.shape) * np.ones_like(o))
            offs.append(sign * half * o)
            wts.append(half * w)
    return np.concatenate(bases, 1), np.concatenate(offs, 1), np.concatenate(wts, 1)


def panel_oracle(pair: PanelPair, pmax: int, qmax: int, kernel: str, layers: int = 16, n: int = 12) -> np.ndarray:
    """Graded composite Gauss quadrature of the monomial moments of one panel pair.

    Entry [p, q] is int_s int_t k(x(s), y(t)) s^p t^q dt ds times both
    segment lengths, with s on the target and t on the source. The outer
    rule is graded toward both target end points and the inner rule toward
    the source end points and the foot of x(s) on the source line, where
    the integrand is singular or sharply peaked.
    """
    (xa, xb), (ya, yb) = pair.target, pair.source
    dt, ds = xb - xa, yb - ya
    la, lb = np.hypot(*dt), np.hypot(*ds)
    nrm = np.array([ds[1], -ds[0]]) / lb
    sb, so, sw = (a[0] for a in split_rule(0.5, layers, n))
    s = sb + so
    # target points x = xa + sb*dt + so*dt, written relative to the source
    # line: signed normal distance and foot parameter, each from parts that
    # are exact for touching panels
    rel = xa + sb[:, None] * dt - ya
    eta = rel @ nrm + so * (dt @ nrm)
    # points on the source line (identical or collinear panels): a rounding-level
    # distance would otherwise pick up the jump of the double layer kernel
    eta = np.where(np.abs(eta) < 1e-14 * max(la, lb), 0.0, eta)
    foot = (rel @ ds + so * (dt @ ds)) / lb**2
    tb, to, tw = split_rule(foot, layers, n)
    along = ((foot[:, None] - tb) - to) * lb
    rr = eta[:, None] ** 2 + along**2
    safe = np.where(tw > 0, rr, 1.0)  # zero-weight nodes of collapsed sub-intervals
    if kernel == "slp":
        val = -np.log(safe) / (4 * np.pi)
    else:
        val = eta[:, None] / safe / (2 * np.pi)
    t = tb + to
    inner = np.einsum("st,st,stq->sq", tw, val, t[..., None] ** np.arange(qmax + 1))
    return np.einsum("s,sp,sq->pq", sw, s[:, None] ** np.arange(pmax + 1), inner) * la * lb


def identical_constant(L: float) -> float:
    """Closed form of the single-layer integral of 1 x 1 over one straight panel of length L."""
    return L * L / (2 * np.pi) * (1.5 - np.log(L))


def random_panel_pair(rng: np.random.Generator, relation: str) -> PanelPair:
    a = rng.uniform(-0.3, 0.3, 2)
    L = rng.uniform(0.02, 0.4)
    th = rng.uniform(0, 2 * np.pi)
    b = a + L * np.array([np.cos(th), np.sin(th)])
    if relation == "identical":
        if rng.random() < 0.5:
            return PanelPair.from_points(a, b, a, b)
        return PanelPair.from_points(a, b, b, a)
    if relation == "adjacent":
        # second segment leaves a shared endpoint at a random angle measured from
        # the target direction; angle pi is the collinear continuation
        shared, other = (b, a) if rng.random() < 0.5 else (a, b)
        base = np.arctan2(*(other - shared)[::-1])
        ang = base + (np.pi if rng.random() < 0.2 else rng.uniform(0.15, 2 * np.pi - 0.15))
        L2 = rng.uniform(0.02, 0.4)
        c = shared + L2 * np.array([np.cos(ang), np.sin(ang)])
        src = (shared, c) if rng.random() < 0.5 else (c, shared)
        return PanelPair.from_points(a, b, *src)
    # disjoint: near or far, not intersecting
    while True:
        offset = rng.uniform(0.05, 1.5) * L * np.array([np.cos(th + 1.3), np.sin(th + 1.3)])
        c = a + offset + rng.uniform(-0.5, 0.5) * L * np.array([np.cos(th), np.sin(th)])
        L2 = rng.uniform(0.02, 0.4)
        ang = rng.uniform(0, 2 * np.pi)
        e = c + L2 * np.array([np.cos(ang), np.sin(ang)])
        if not _intersect(a, b, c, e) and min(np.hypot(*(p - q)) for p in (a, b) for q in (c, e)) > 1e-3:
            return PanelPair.from_points(a, b, c, e)


def _intersect(a, b, c, d) -> bool:
    def orient(p, q, r):
        return np.sign((q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]))

    return orient(a, b, c) != orient(a, b, d) and orient(c, d, a) != orient(c, d, b)


def polygon_x_integral() -> float:
    """Exact integral of x over the L-shape as a sum over its three unit squares."""
    # square [x0, x0 + 0.2] x [y0, y0 + 0.2]: integral of x = 0.2 * (x1^2 - x0^2) / 2
    squares = [(0.0, 0.0), (0.0, 0.2), (-0.2, 0.2)]
    return sum(0.2 * ((x0 + 0.2) ** 2 - x0**2) / 2 for x0, _ in squares)


@lru_cache(maxsize=None)
def level_system(level: int, k: int):
    """Assembled (but unsolved) coupled system on the L-shape, cached per level."""
    from fembem.bem.spaces import BemSpace, TraceSpace
    from fembem.coupling import assemble_system
    from fembem.femspace import build_fe_space, trace_restriction
    from fembem.mesh import build_lshape, extract_boundary

    mesh = build_lshape(level)
    bmesh = extract_boundary(mesh)
    fe = build_fe_space(mesh, k, bmesh)
    T, M = TraceSpace(bmesh, k), BemSpace(bmesh, k)
    return assemble_system(fe, trace_restriction(fe, bmesh), T, M)


@lru_cache(maxsize=None)
def study_level(level: int, k: int):
    from fembem.manufactured import canonical_case
    from fembem.study import solve_level

    return solve_level(level, k, canonical_case(k))
