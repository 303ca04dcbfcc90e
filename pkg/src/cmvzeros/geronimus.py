"""Orthogonal polynomials with a constant Schur parameter ``a`` (``0 < |a| < 1``).

With ``rho = sqrt(1 - |a|^2)`` and ``w_1, w_2`` the roots of
``w^2 - (z+1) w + rho^2 z = 0``, set ``u_n = (w_1^n - w_2^n)/(w_1 - w_2)``.
Then ``vphi_n = (u_{n+1} - (1-a) u_n) / rho^n`` and
``vphi*_n = (u_{n+1} - (1-conj(a)) z u_n) / rho^n``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import NotAZero, OnArcEndpoint, RegimeViolation, WrongRegime

CONFLUENT_TOL = 1e-10
ENDPOINT_TOL = 1e-10
ZERO_EQ_TOL = 1e-8


@dataclass(frozen=True)
class GeronimusContext:
    """Constants attached to a constant parameter ``a``.

    ``mass_point_present`` is the classical criterion ``Re a > |a|^2``.
    Computed zeros behave the other way round: when ``Re a < |a|^2`` one zero
    of ``vphi_n`` converges to ``z0`` (see :func:`outlier_zeros`), and when
    ``Re a > |a|^2`` none does.
    """

    a: complex
    rho: float
    alpha: float
    z_plus: complex
    z_minus: complex
    z0: complex
    mass_point_present: bool

    @property
    def gap(self) -> float:
        """``|a|^2 - Re a``; positive in the arc-only regime."""
        return abs(self.a) ** 2 - self.a.real


def context(a: complex) -> GeronimusContext:
    a = complex(a)
    if not 0 < abs(a) < 1:
        raise ValueError(f"need 0 < |a| < 1, got |a| = {abs(a)}")
    m2 = abs(a) ** 2
    alpha = math.acos(1 - 2 * m2)
    return GeronimusContext(
        a=a,
        rho=math.sqrt(1 - m2),
        alpha=alpha,
        z_plus=cmath.exp(1j * alpha),
        z_minus=cmath.exp(-1j * alpha),
        z0=(1 - a) / (1 - a.conjugate()),
        mass_point_present=a.real > m2,
    )


def mass_point_identity_residual(ctx: GeronimusContext) -> float:
    """``cos(psi) - cos(alpha) - 2 (Re a - |a|^2)^2 / |1-a|^2`` with ``z0 = e^{i psi}``."""
    a = ctx.a
    lhs = ctx.z0.real - math.cos(ctx.alpha)
    rhs = 2 * (a.real - abs(a) ** 2) ** 2 / abs(1 - a) ** 2
    return abs(lhs - rhs)


@dataclass(frozen=True)
class WRoots:
    w1: np.ndarray
    w2: np.ndarray
    confluent: np.ndarray


def w_roots(ctx: GeronimusContext, z) -> WRoots:
    """Roots of ``w^2 - (z+1) w + rho^2 z``; ``w1`` takes the principal square root."""
    z = np.asarray(z, dtype=complex)
    disc = (z + 1) ** 2 - 4 * ctx.rho**2 * z
    s = np.sqrt(disc)
    w1 = (z + 1 + s) / 2
    w2 = (z + 1 - s) / 2
    return WRoots(w1, w2, np.abs(disc) < CONFLUENT_TOL)


def vieta_residuals(ctx: GeronimusContext, z) -> dict[str, float]:
    r = w_roots(ctx, z)
    z = np.asarray(z, dtype=complex)
    return {
        "sum": float(np.max(np.abs(r.w1 + r.w2 - (z + 1)))),
        "product": float(np.max(np.abs(r.w1 * r.w2 - ctx.rho**2 * z))),
        "discriminant": float(np.max(np.abs((r.w1 - r.w2) ** 2 - (z - ctx.z_plus) * (z - ctx.z_minus)))),
    }


def u_values(ctx: GeronimusContext, n: int, z) -> np.ndarray:
    """``u_n(z)`` from the roots, with the limit ``n w^{n-1}`` where they merge."""
    r = w_roots(ctx, z)
    with np.errstate(divide="ignore", invalid="ignore"):
        u = (r.w1**n - r.w2**n) / (r.w1 - r.w2)
    w = (np.asarray(z, dtype=complex) + 1) / 2
    conf = n * w ** (n - 1) if n > 0 else np.zeros_like(w)
    return np.where(r.confluent, conf, u)


def closed_form_phi(ctx: GeronimusContext, n: int, z) -> tuple:
    """``(vphi_n(z), vphi*_n(z))`` from the closed form."""
    if n < 0:
        raise ValueError("n must be >= 0")
    z = np.asarray(z, dtype=complex)
    if n == 0:
        one = np.ones_like(z)
        return (complex(one), complex(one)) if z.ndim == 0 else (one, one)
    a = ctx.a
    un, un1 = u_values(ctx, n, z), u_values(ctx, n + 1, z)
    scale = ctx.rho**n
    phi = (un1 - (1 - a) * un) / scale
    phis = (un1 - (1 - a.conjugate()) * z * un) / scale
    if z.ndim == 0:
        return complex(phi), complex(phis)
    return phi, phis


def zero_equation_residual(ctx: GeronimusContext, n: int, z) -> complex:
    """Scaled residual of ``w_1^n (w_1 - c) = w_2^n (w_2 - c)``, ``c = 1 - a``.

    This is ``u_{n+1} = (1-a) u_n`` cleared of the factor ``w_1 - w_2``.  The
    difference is divided by ``|w_1|^n (|w_1| + |c|) + |w_2|^n (|w_2| + |c|)``,
    the size of the terms before cancellation, so rounding stays at the
    unit-roundoff level even where ``w_i - c`` nearly vanishes.  At a merged
    root pair the undivided form in ``u`` is used.
    """
    c = 1 - ctx.a
    r = w_roots(ctx, z)
    if bool(np.any(r.confluent)):
        un, un1 = u_values(ctx, n, z), u_values(ctx, n + 1, z)
        diff = un1 - c * un
        den = np.abs(un1) + abs(c) * np.abs(un)
    else:
        p1, p2 = r.w1**n, r.w2**n
        diff = p1 * (r.w1 - c) - p2 * (r.w2 - c)
        den = np.abs(p1) * (np.abs(r.w1) + abs(c)) + np.abs(p2) * (np.abs(r.w2) + abs(c))
    out = diff / np.where(den == 0, 1.0, den)
    return complex(out) if np.ndim(out) == 0 else out


def outlier_zeros(ctx: GeronimusContext, zeros_, margin: float = 0.0) -> np.ndarray:
    """Zeros outside the open region ``|z| < 1, cos(arg z) < cos(alpha)``."""
    z = np.asarray(zeros_, dtype=complex)
    return z[~in_hull_region(ctx, z, margin)]


def _u_recurrence(ctx: GeronimusContext, n: int, z: complex) -> tuple:
    """``u_n, u_{n+1}`` and their z-derivatives from ``u_{k+1} = (z+1) u_k - rho^2 z u_{k-1}``."""
    r2 = ctx.rho**2
    u_prev, u = 0j, 1 + 0j  # u_0, u_1
    du_prev, du = 0j, 0j
    for _ in range(n):
        u_next = (z + 1) * u - r2 * z * u_prev
        du_next = u + (z + 1) * du - r2 * u_prev - r2 * z * du_prev
        u_prev, u, du_prev, du = u, u_next, du, du_next
    return u_prev, u, du_prev, du


def _check_endpoint(ctx, z):
    if min(abs(z - ctx.z_plus), abs(z - ctx.z_minus)) < ENDPOINT_TOL:
        raise OnArcEndpoint(f"z = {z!r} is an endpoint of the support arc")


def kernel_closed_form(ctx: GeronimusContext, n: int, z: complex, check: bool = True) -> complex:
    """``K_{n-1}(z, conj(1/z))`` at a zero ``z`` of ``vphi_n(.; a)`` in rational form."""
    z = complex(z)
    _check_endpoint(ctx, z)
    if check:
        res = abs(zero_equation_residual(ctx, n, z))
        if res > ZERO_EQ_TOL:
            raise NotAZero(f"{z!r} does not solve the zero equation (residual {res:.3e})")
    a = ctx.a
    num = (n * (z - 1) + z) * (1 - a.conjugate()) * (z - ctx.z0) + 2 * (abs(a) ** 2 - a.real) * z
    return num / ((z - ctx.z_plus) * (z - ctx.z_minus))


def kernel_wronskian(ctx: GeronimusContext, n: int, z: complex) -> complex:
    """Same kernel through the Wronskian ``u_n u'_{n+1} - u_{n+1} u'_n``.

    ``u_n`` comes from its three-term recurrence, so no square-root branch is
    involved.  The factor ``(1-a) - (1-conj(a)) z`` vanishes at ``z0`` while
    ``W`` blows up there, so this route loses accuracy for zeros close to ``z0``.
    """
    z = complex(z)
    un, un1, dun, dun1 = _u_recurrence(ctx, n, z)
    W = un * dun1 - un1 * dun
    a = ctx.a
    return z ** (1 - n) / ctx.rho ** (2 * n) * ((1 - a) - (1 - a.conjugate()) * z) * W


def kernel_lower_bound(ctx: GeronimusContext, n: int) -> float:
    """Right-hand side of the lower bound for ``|K_{n-1}|`` at zeros (arc-only regime)."""
    a = ctx.a
    g = ctx.gap
    return g / (2 * ctx.rho**2) * ((2 * n * abs(a) ** 2 - 1) * g / abs(1 - a) - 1)


def in_hull_region(ctx: GeronimusContext, z, margin: float = 0.0) -> np.ndarray:
    """``|z| < 1`` and ``cos(arg z) < cos(alpha)`` (strictly, by ``margin``)."""
    z = np.asarray(z, dtype=complex)
    r = np.abs(z)
    cos_t = np.where(r > 0, z.real / np.where(r > 0, r, 1), 0.0)
    return (r < 1 - margin) & (cos_t < math.cos(ctx.alpha) - margin)


def simplicity_bound(ctx: GeronimusContext) -> float:
    if ctx.gap <= 0:
        raise WrongRegime(f"need Re a < |a|^2, got Re a = {ctx.a.real}, |a|^2 = {abs(ctx.a) ** 2}")
    m2 = abs(ctx.a) ** 2
    return (abs(1 - ctx.a) / ctx.gap + 1) / (2 * m2)


def simplicity_threshold(ctx: GeronimusContext) -> int:
    """Least integer strictly above the order beyond which all zeros are simple."""
    return math.floor(simplicity_bound(ctx)) + 1


@dataclass(frozen=True)
class SpeedBounds:
    c0: float
    C_interval: float
    C_uniform: float | None


def rotation_speed_bounds(a: float, n: int, t0: float, t1: float) -> SpeedBounds:
    """Bounds on ``|z'(t)/z(t)|`` for the zeros of ``vphi_n(.; a e^{it})``, ``t0 <= t <= t1``.

    ``a`` must be real in ``(0, 1)``.  ``C_uniform`` is given only when both
    endpoints have ``Re a(t) <= 0`` and ``n`` exceeds its own threshold.
    """
    a = complex(a)
    if a.imag != 0 or not 0 < a.real < 1:
        raise RegimeViolation(f"a must be real in (0, 1), got {a!r}")
    a = a.real
    if not 0 < t0 < t1 < 2 * math.pi:
        raise RegimeViolation("need 0 < t0 < t1 < 2 pi")

    def c(t):
        return a * a - a * math.cos(t)

    c0 = min(c(t0), c(t1))
    if c0 <= 0:
        raise RegimeViolation(f"a e^(it) enters the disk |a - 1/2| <= 1/2 on [{t0}, {t1}]")
    rho2 = 1 - a * a
    if n <= ((1 + a) / c0 + 1) / (2 * a * a):
        raise RegimeViolation(f"n = {n} too small for simple zeros on [{t0}, {t1}]")
    den = (2 * n * a * a - 1) * c0 - (1 + a)
    if den <= 0:
        raise RegimeViolation(f"n = {n} too small for the speed bound")
    C = 2 * rho2 / c0 * (1 + a) / den
    Cu = None
    # cos(pi/2) rounds to 6e-17; treat it as zero
    if math.cos(t0) <= 1e-12 and math.cos(t1) <= 1e-12 and n > (1 + a + a * a) / (2 * a**4):
        Cu = 2 * rho2 / (a * a) * (1 + a) / (2 * n * a**4 - (1 + a + a * a))
    return SpeedBounds(c0=c0, C_interval=C, C_uniform=Cu)


def report(ctx: GeronimusContext, ns=(8, 16, 32, 64), t0: float = math.pi / 2, t1: float = 3 * math.pi / 2) -> dict:
    """JSON-ready summary; the speed table uses ``|a|`` (rotation puts ``a`` on the positive axis)."""

    def cx(z):
        return [z.real, z.imag]

    try:
        n_star = simplicity_threshold(ctx)
    except WrongRegime:
        n_star = None
    table = []
    for n in ns:
        try:
            b = rotation_speed_bounds(abs(ctx.a), n, t0, t1)
            table.append({"n": n, "c0": b.c0, "C_interval": b.C_interval, "C_uniform": b.C_uniform})
        except RegimeViolation:
            table.append({"n": n, "c0": None, "C_interval": None, "C_uniform": None})
    return {
        "a": cx(ctx.a),
        "alpha": ctx.alpha,
        "z_plus": cx(ctx.z_plus),
        "z_minus": cx(ctx.z_minus),
        "z0": cx(ctx.z0),
        "mass_point_present": ctx.mass_point_present,
        "n_star": n_star,
        "t0": t0,
        "t1": t1,
        "C_n": table,
    }
