"""Exact transmission solutions on the L-shape and the data they induce.

Interior: u = scale * Re(z**alpha), with the branch cut of z**alpha along
the negative imaginary axis (arg z in (-pi/2, 3pi/2)). The domain lies in
the closed upper half plane, so u is single valued and smooth on the
closure except at the corner z = 0.

Exterior: u_ext = Re(1 / (z - v)) with the pole v inside the domain; it is
harmonic outside and decays like 1/|x|.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .femspace import Coefficient
from .mesh import LSHAPE_CORNERS


@dataclass(frozen=True)
class ManufacturedCase:
    alpha: float = 1.5
    scale: float = 1000.0
    pole: tuple[float, float] = (0.1, 0.1)
    k_target: int = 1

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if _distance_to_lshape_boundary(np.array(self.pole)) <= 0 or not _inside_lshape(np.array(self.pole)):
            raise ValueError("pole must lie strictly inside the domain")

    @property
    def v(self) -> complex:
        return complex(*self.pole)


def _inside_lshape(p) -> bool:
    x, y = p
    in_box = -0.2 < x < 0.2 and 0 < y < 0.4
    in_notch = x <= 0 and y <= 0.2
    return in_box and not in_notch


def _distance_to_lshape_boundary(p) -> float:
    a = LSHAPE_CORNERS
    b = np.roll(a, -1, axis=0)
    d = b - a
    t = np.clip(((p - a) * d).sum(1) / (d * d).sum(1), 0, 1)
    return float(np.min(np.linalg.norm(p - (a + t[:, None] * d), axis=1)))


CASE_K1 = ManufacturedCase(alpha=1.5, k_target=1)
CASE_K2 = ManufacturedCase(alpha=2.5, k_target=2)


def canonical_case(k: int) -> ManufacturedCase:
    return {1: CASE_K1, 2: CASE_K2}[k]


def _to_complex(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return x[..., 0] + 1j * x[..., 1]


def cut_power(z, p) -> np.ndarray:
    """z**p with the branch cut on the negative imaginary axis; 0**p = 0 for p > 0."""
    z = np.asarray(z, dtype=complex)
    arg = np.angle(z)
    arg = np.where(arg <= -np.pi / 2, arg + 2 * np.pi, arg)
    with np.errstate(divide="ignore", invalid="ignore"):
        logr = np.log(np.abs(z))
        out = np.exp(p * (logr + 1j * arg))
    return np.where(z == 0, 0.0, out)


def interior_value(case: ManufacturedCase, x) -> np.ndarray:
    return case.scale * np.real(cut_power(_to_complex(x), case.alpha))


def interior_gradient(case: ManufacturedCase, x) -> np.ndarray:
    z = _to_complex(x)
    if np.any(z == 0):
        raise ValueError("gradient requested at the branch point (0, 0)")
    d = case.scale * case.alpha * cut_power(z, case.alpha - 1)
    return np.stack([d.real, -d.imag], axis=-1)


def interior_exact(case: ManufacturedCase, x) -> tuple[np.ndarray, np.ndarray]:
    return interior_value(case, x), interior_gradient(case, x)


def exterior_value(case: ManufacturedCase, x) -> np.ndarray:
    z = _to_complex(x)
    if np.any(z == case.v):
        raise ValueError("evaluation at the pole")
    return np.real(1.0 / (z - case.v))


def exterior_gradient(case: ManufacturedCase, x) -> np.ndarray:
    z = _to_complex(x)
    if np.any(z == case.v):
        raise ValueError("evaluation at the pole")
    d = -1.0 / (z - case.v) ** 2
    return np.stack([d.real, -d.imag], axis=-1)


def exterior_exact(case: ManufacturedCase, x) -> tuple[np.ndarray, np.ndarray]:
    return exterior_value(case, x), exterior_gradient(case, x)


def exact_flux(case: ManufacturedCase, x, n) -> np.ndarray:
    """Exterior normal derivative grad(u_ext) . n, n pointing out of the domain."""
    g = exterior_gradient(case, x)
    return (g * np.asarray(n)).sum(-1)


@dataclass(frozen=True)
class JumpData:
    u0: object
    phi0: object
    f: object


def jump_data(case: ManufacturedCase, coeff: Coefficient | None = None, f=None) -> JumpData:
    """Boundary jumps u0 = u - u_ext, phi0 = (A grad u - grad u_ext) . n and load f.

    With the identity coefficient the interior solution is harmonic and
    ``f`` defaults to zero; for other coefficients pass ``f``.
    """
    if coeff is not None and coeff.field is not None and f is None:
        raise ValueError("a load f = -div(A grad u) is required for a non-identity coefficient")

    def u0(x, n=None):
        return interior_value(case, x) - exterior_value(case, x)

    def phi0(x, n):
        gi = interior_gradient(case, x)
        if coeff is not None and coeff.field is not None:
            gi = np.einsum("...ij,...j->...i", coeff(np.asarray(x)), gi)
        return ((gi - exterior_gradient(case, x)) * np.asarray(n)).sum(-1)

    load = f if f is not None else (lambda x: np.zeros(np.shape(x)[:-1]))
    return JumpData(u0, phi0, load)


def _falling(alpha: float, m: int) -> float:
    out = 1.0
    for j in range(m):
        out *= alpha - j
    return out


def _radial_integral(power: float) -> float:
    """Integral of r**power over the L-shape, r = |x| measured from the corner (0, 0).

    The right column [0, 0.2] x [0, 0.4] is star-shaped about the origin and
    is integrated in polar coordinates with the radial part in closed form;
    the upper-left square stays away from the origin.
    """
    from scipy import integrate

    if power <= -2:
        raise ValueError("r**power is not integrable at the corner")
    edge = np.arctan2(0.4, 0.2)

    def rmax(theta):
        return min(0.2 / np.cos(theta), 0.4 / np.sin(theta)) if 0 < theta < np.pi / 2 else (
            0.2 if theta <= 0 else 0.4)

    def radial(theta):
        return rmax(theta) ** (power + 2) / (power + 2)

    opts = dict(epsabs=0, epsrel=1e-13, limit=200)
    col = integrate.quad(radial, 0, edge, **opts)[0] + integrate.quad(radial, edge, np.pi / 2, **opts)[0]
    sq = integrate.dblquad(lambda y, x: np.hypot(x, y) ** power, -0.2, 0.0, 0.2, 0.4, epsabs=0, epsrel=1e-12)[0]
    return col + sq


def interior_seminorm(case: ManufacturedCase, m: int) -> float:
    """|u|_{H^m(Omega)} with the full derivative tensor (mixed derivatives counted with multiplicity).

    For u = Re F with F holomorphic, the squared tensor norm of the m-th
    derivatives is 2**(m-1) |F^(m)|**2, and |F^(m)| depends on r only.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    coef = case.scale * abs(_falling(case.alpha, m))
    return float(coef * np.sqrt(2.0 ** (m - 1) * _radial_integral(2 * (case.alpha - m))))


def flux_h1_seminorm(case: ManufacturedCase) -> float:
    """|phi|_{H^1(Gamma)} for phi = grad(u_ext) . n, summed over the polygon sides."""
    from scipy import integrate

    a = LSHAPE_CORNERS
    b = np.roll(a, -1, axis=0)
    total = 0.0
    for p, q in zip(a, b):
        d = q - p
        length = float(np.hypot(*d))
        t = d / length
        n = np.array([t[1], -t[0]])

        def dphi_ds(s):
            z = complex(*(p + s * t))
            g2 = 2.0 / (z - case.v) ** 3  # second derivative of 1/(z - v)
            hess = np.array([[g2.real, -g2.imag], [-g2.imag, -g2.real]])
            return float(n @ hess @ t) ** 2

        total += integrate.quad(dphi_ds, 0, length, epsabs=0, epsrel=1e-12, limit=200)[0]
    return float(np.sqrt(total))
