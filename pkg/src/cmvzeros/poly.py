"""Polynomials, Laurent polynomials, Szegő recurrences and kernels.

Coefficient arrays are ascending: index ``i`` holds the coefficient of
``z**i`` (of ``z**(lo + i)`` for :class:`LaurentPoly`).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegreeMismatch, NotAZero, ZeroArgument
from .schur import DerivedScalars, SchurSequence

# confluent branch of the Christoffel-Darboux form when |z*conj(y) - 1| < this
BRANCH_TOL = 1e-8
# |lambda| at or below this is treated as the origin
ZERO_ARG_TOL = 1e-13
# backward-error style gate |p(x)| / sum |c_j||x|^j for "x is a zero of p"
ZERO_RESIDUAL_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class ComplexPoly:
    coeffs: np.ndarray
    monic: bool = False

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=complex))
        object.__setattr__(self, "coeffs", c)
        if self.monic and c[-1] != 1:
            raise ValueError("polynomial flagged monic but leading coefficient is not 1")

    @property
    def degree(self) -> int:
        nz = np.flatnonzero(self.coeffs)
        return int(nz[-1]) if len(nz) else 0

    def __call__(self, z):
        return np.polynomial.polynomial.polyval(z, self.coeffs)

    def deriv(self, m: int = 1) -> "ComplexPoly":
        if len(self.coeffs) <= m:
            return ComplexPoly(np.zeros(1, dtype=complex))
        return ComplexPoly(np.polynomial.polynomial.polyder(self.coeffs, m))

    def scaled(self, c) -> "ComplexPoly":
        return ComplexPoly(self.coeffs * c)

    def backward_error(self, z) -> np.ndarray:
        """``|p(z)| / sum_j |c_j| |z|^j``; small iff ``z`` is a zero up to rounding."""
        z = np.asarray(z, dtype=complex)
        num = np.abs(self(z))
        den = np.polynomial.polynomial.polyval(np.abs(z), np.abs(self.coeffs))
        return num / np.where(den == 0, 1.0, den)

    def to_laurent(self) -> "LaurentPoly":
        return LaurentPoly(0, self.coeffs)


@dataclass(frozen=True, eq=False)
class LaurentPoly:
    """Element of ``Lambda_{lo, hi}`` stored densely from ``z**lo`` upward."""

    lo: int
    coeffs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coeffs", np.atleast_1d(np.asarray(self.coeffs, dtype=complex)))

    @property
    def hi(self) -> int:
        return self.lo + len(self.coeffs) - 1

    @property
    def support(self) -> tuple[int, int]:
        return self.lo, self.hi

    def coefficient(self, k: int) -> complex:
        i = k - self.lo
        return complex(self.coeffs[i]) if 0 <= i < len(self.coeffs) else 0j

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        return z ** self.lo * np.polynomial.polynomial.polyval(z, self.coeffs)

    def shifted(self, k: int) -> "LaurentPoly":
        """Multiply by ``z**k``."""
        return LaurentPoly(self.lo + k, self.coeffs)

    def scaled(self, c) -> "LaurentPoly":
        return LaurentPoly(self.lo, self.coeffs * c)

    def __add__(self, other: "LaurentPoly") -> "LaurentPoly":
        lo = min(self.lo, other.lo)
        hi = max(self.hi, other.hi)
        out = np.zeros(hi - lo + 1, dtype=complex)
        out[self.lo - lo : self.hi - lo + 1] += self.coeffs
        out[other.lo - lo : other.hi - lo + 1] += other.coeffs
        return LaurentPoly(lo, out)

    def __sub__(self, other: "LaurentPoly") -> "LaurentPoly":
        return self + other.scaled(-1)

    def allclose(self, other: "LaurentPoly", atol: float = 1e-12) -> bool:
        d = self - other
        return bool(np.all(np.abs(d.coeffs) <= atol))

    def as_poly(self) -> ComplexPoly:
        """The polynomial ``z**(-lo) * f`` when ``lo <= 0`` is cleared, i.e. for ``lo >= 0``."""
        if self.lo < 0:
            raise ValueError(f"negative exponent {self.lo} present")
        return ComplexPoly(np.concatenate([np.zeros(self.lo, dtype=complex), self.coeffs]))


def reversed_poly(p: ComplexPoly, n: int) -> ComplexPoly:
    """Reversed polynomial ``p*(z) = z**n * conj(p(1/conj(z)))`` for declared degree ``n``."""
    if p.degree > n:
        raise DegreeMismatch(f"degree {p.degree} exceeds declared degree {n}")
    c = np.zeros(n + 1, dtype=complex)
    m = min(len(p.coeffs), n + 1)
    c[:m] = p.coeffs[:m]
    return ComplexPoly(np.conj(c[::-1]))


def substar(f: LaurentPoly) -> LaurentPoly:
    """Substar conjugate ``f_*(z) = conj(f(1/conj(z)))``: exponent ``k`` -> ``-k`` conjugated."""
    return LaurentPoly(-f.hi, np.conj(f.coeffs[::-1]))


# -- Szegő sequences ------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PolySequencePair:
    phi: list
    phistar: list
    varphi: list
    varphistar: list
    # max coefficient gap between the running reversed sequence and reversal
    reversal_mismatch: float = 0.0

    @property
    def n(self) -> int:
        return len(self.phi) - 1


def _check_order(seq: SchurSequence, n: int):
    if not 0 <= n <= seq.N:
        raise ValueError(f"order {n} outside 0..{seq.N}")


def szego_sequences(seq: SchurSequence, n: int | None = None) -> PolySequencePair:
    """Monic ``phi_k``, reversed ``phi*_k`` and orthonormal versions for ``k = 0..n``.

    ``phi*`` is carried as its own running sequence and compared against
    coefficient reversal of ``phi``; the largest discrepancy is recorded.
    """
    n = seq.N if n is None else n
    _check_order(seq, n)
    a = seq.padded
    sc = seq.scalars
    phi = [np.ones(1, dtype=complex)]
    phis = [np.ones(1, dtype=complex)]
    for k in range(1, n + 1):
        zphi = np.concatenate([[0j], phi[-1]])
        prev_s = np.concatenate([phis[-1], [0j]])
        phi.append(zphi + a[k] * prev_s)
        phis.append(prev_s + np.conj(a[k]) * zphi)
    mismatch = 0.0
    for k in range(n + 1):
        rev = np.conj(phi[k][::-1])
        scale = max(1.0, float(np.max(np.abs(rev))))
        mismatch = max(mismatch, float(np.max(np.abs(rev - phis[k]))) / scale)
    monic = [ComplexPoly(c, monic=True) for c in phi]
    rev = [ComplexPoly(c) for c in phis]
    return PolySequencePair(
        phi=monic,
        phistar=rev,
        varphi=[p.scaled(sc.kappa[k]) for k, p in enumerate(monic)],
        varphistar=[p.scaled(sc.kappa[k]) for k, p in enumerate(rev)],
        reversal_mismatch=mismatch,
    )


@dataclass(frozen=True)
class SzegoValues:
    """Values (and optional z-derivatives) of ``phi_k, phi*_k`` at points; row ``k``."""

    phi: np.ndarray
    phistar: np.ndarray
    dphi: np.ndarray | None = None
    dphistar: np.ndarray | None = None
    d2phi: np.ndarray | None = None
    d2phistar: np.ndarray | None = None


def szego_values(
    seq: SchurSequence,
    n: int,
    z,
    order: int = 0,
    normalized: bool = True,
) -> SzegoValues:
    """Evaluate ``phi_0..phi_n`` and their reversals at ``z`` by the value recurrence.

    With ``normalized`` the orthonormal family is returned, otherwise the
    monic one.  ``order`` (0, 1 or 2) selects how many z-derivatives to carry.
    """
    _check_order(seq, n)
    z = np.asarray(z, dtype=complex)
    a = seq.padded
    rho = seq.scalars.rho if normalized else np.ones(seq.N + 1)
    shape = (n + 1,) + z.shape
    p = np.empty(shape, dtype=complex)
    ps = np.empty(shape, dtype=complex)
    p[0] = 1
    ps[0] = 1
    d1 = d1s = d2 = d2s = None
    if order >= 1:
        d1 = np.zeros(shape, dtype=complex)
        d1s = np.zeros(shape, dtype=complex)
    if order >= 2:
        d2 = np.zeros(shape, dtype=complex)
        d2s = np.zeros(shape, dtype=complex)
    for k in range(1, n + 1):
        ak, ck, r = a[k], np.conj(a[k]), rho[k]
        zp = z * p[k - 1]
        p[k] = (zp + ak * ps[k - 1]) / r
        ps[k] = (ps[k - 1] + ck * zp) / r
        if order >= 1:
            dzp = p[k - 1] + z * d1[k - 1]
            d1[k] = (dzp + ak * d1s[k - 1]) / r
            d1s[k] = (d1s[k - 1] + ck * dzp) / r
        if order >= 2:
            d2zp = 2 * d1[k - 1] + z * d2[k - 1]
            d2[k] = (d2zp + ak * d2s[k - 1]) / r
            d2s[k] = (d2s[k - 1] + ck * d2zp) / r
    return SzegoValues(p, ps, d1, d1s, d2, d2s)


def recurrence_residuals(
    seq: SchurSequence,
    n: int,
    z_samples,
    scalars: DerivedScalars | None = None,
) -> dict[str, float]:
    """Max scaled residual of each forward/backward recurrence over samples.

    Keys name the identity checked:

    * ``monic_forward``: ``phi_k = z phi_{k-1} + a_k phi*_{k-1}``
    * ``orthonormal_forward``: ``z vphi_{k-1} = rho_k vphi_k - a_k vphi*_{k-1}``
    * ``reversed_backward``: ``vphi*_{k-1} = rho_k vphi*_k - conj(a_k) z vphi_{k-1}``
    * ``orthonormal_from_reversed``: ``vphi_k = a_k vphi*_k + rhohat_k z vphi_{k-1}``
    * ``reversed_from_orthonormal``: ``vphi*_k = conj(a_k) vphi_k + rhohat_k vphi*_{k-1}``

    The polynomials come from coefficient tables; ``scalars`` may be
    overridden to exercise the harness with corrupted data.  A residual is
    ``|lhs - rhs| / (1 + |lhs| + |rhs|)``.
    """
    sc = seq.scalars if scalars is None else scalars
    z = np.asarray(z_samples, dtype=complex).ravel()
    pair = szego_sequences(seq, n)
    a = seq.padded
    phi = np.array([p(z) for p in pair.phi])
    phis = np.array([p(z) for p in pair.phistar])
    vp = phi * sc.kappa[: n + 1, None]
    vps = phis * sc.kappa[: n + 1, None]

    def res(lhs, rhs):
        return float(np.max(np.abs(lhs - rhs) / (1 + np.abs(lhs) + np.abs(rhs))))

    out = {k: 0.0 for k in (
        "monic_forward", "orthonormal_forward", "reversed_backward",
        "orthonormal_from_reversed", "reversed_from_orthonormal",
    )}
    for k in range(1, n + 1):
        ak, ck = a[k], np.conj(a[k])
        r, rh = sc.rho[k], sc.rhohat[k]
        checks = {
            "monic_forward": (phi[k], z * phi[k - 1] + ak * phis[k - 1]),
            "orthonormal_forward": (z * vp[k - 1], r * vp[k] - ak * vps[k - 1]),
            "reversed_backward": (vps[k - 1], r * vps[k] - ck * z * vp[k - 1]),
            "orthonormal_from_reversed": (vp[k], ak * vps[k] + rh * z * vp[k - 1]),
            "reversed_from_orthonormal": (vps[k], ck * vp[k] + rh * vps[k - 1]),
        }
        for name, (lhs, rhs) in checks.items():
            out[name] = max(out[name], res(lhs, rhs))
    return out


# -- kernels ----------------------------------------------------------------------


def _kernel_sum(seq, n, z, y):
    vz = szego_values(seq, n, z)
    vy = szego_values(seq, n, y)
    e = seq.scalars.e[: n + 1].reshape((-1,) + (1,) * np.ndim(z))
    return np.sum(e * vz.phi * np.conj(vy.phi), axis=0)


def _cd_data(seq: SchurSequence, n: int):
    """Sequence whose index ``n+1`` data realise ``K_n`` in closed form.

    ``K_n`` does not depend on ``a_{n+1}``; past the end of ``seq`` the
    sequence is extended by ``a_{n+1} = 0``.
    """
    if n + 1 <= seq.N:
        return seq
    from .schur import validate

    return validate(list(seq.params) + [0.0] * (n + 1 - seq.N), mode="quasi")


def _kernel_cd(seq, n, z, y):
    z = np.asarray(z, dtype=complex)
    y = np.asarray(y, dtype=complex)
    z, y = np.broadcast_arrays(z, y)
    ext = _cd_data(seq, n)
    m = n + 1
    em = ext.scalars.e[m]
    vy = szego_values(ext, m, y)
    Q, Qs = np.conj(vy.phi[m]), np.conj(vy.phistar[m])
    yb = np.conj(y)
    gap = z * yb - 1
    out = np.empty(z.shape, dtype=complex)
    conf = np.abs(gap) < BRANCH_TOL
    reg = ~conf
    if np.any(reg):
        vz = szego_values(ext, m, z[reg])
        out[reg] = em * (vz.phi[m] * Q[reg] - vz.phistar[m] * Qs[reg]) / gap[reg]
    if np.any(conf):
        # expand g(z) = e_m (vphi_m(z) Q - vphi*_m(z) Qs) about its zero z0 = 1/conj(y)
        z0 = 1 / yb[conf]
        v0 = szego_values(ext, m, z0, order=2)
        g1 = em * (v0.dphi[m] * Q[conf] - v0.dphistar[m] * Qs[conf])
        g2 = em * (v0.d2phi[m] * Q[conf] - v0.d2phistar[m] * Qs[conf])
        out[conf] = (g1 + 0.5 * g2 * (z[conf] - z0)) / yb[conf]
    return out


def kernel(seq: SchurSequence, n: int, z, y, method: str = "sum"):
    """Kernel ``K_n(z, y) = sum_{k<=n} e_k vphi_k(z) conj(vphi_k(y))``.

    ``method="sum"`` evaluates the defining sum; ``method="csd"`` uses the
    Christoffel-Darboux form built from index ``n+1`` data, switching to its
    confluent (derivative) form when ``|z conj(y) - 1| < BRANCH_TOL``.
    """
    _check_order(seq, n)
    if method == "sum":
        out = _kernel_sum(seq, n, z, y)
    elif method == "csd":
        out = _kernel_cd(seq, n, z, y)
    else:
        raise ValueError(f"unknown kernel method {method!r}")
    return complex(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class KernelPair:
    closed_form: complex
    direct_sum: complex

    @property
    def discrepancy(self) -> float:
        return abs(self.closed_form - self.direct_sum) / max(1.0, abs(self.direct_sum))


def assert_zero(seq: SchurSequence, n: int, lam: complex, tol: float = ZERO_RESIDUAL_TOL) -> float:
    """Raise :class:`NotAZero` unless ``lam`` is a zero of ``phi_n`` up to ``tol``."""
    p = szego_sequences(seq, n).phi[n]
    be = float(p.backward_error(lam))
    if be > tol:
        raise NotAZero(f"{lam!r} is not a zero of phi_{n} (backward error {be:.3e})")
    return be


def kernel_on_inverse_conjugate(seq: SchurSequence, n: int, lam: complex) -> KernelPair:
    """``K_{n-1}(lam, conj(1/lam))`` at a zero ``lam`` of ``phi_n``, two ways.

    The closed form is ``e_n lam**(1-n) vphi_n'(lam) vphi*_n(lam)``; the direct
    value is the defining sum evaluated at ``y = 1/conj(lam)``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    lam = complex(lam)
    if abs(lam) <= ZERO_ARG_TOL:
        raise ZeroArgument("kernel at the inverse conjugate needs lam != 0")
    assert_zero(seq, n, lam)
    v = szego_values(seq, n, lam, order=1)
    e_n = seq.scalars.e[n]
    closed = complex(e_n * lam ** (1 - n) * v.dphi[n] * v.phistar[n])
    direct = complex(kernel(seq, n - 1, lam, 1 / np.conj(lam), method="sum"))
    return KernelPair(closed, direct)


def inverse_conjugate_kernel(seq: SchurSequence, n: int, lam) -> np.ndarray:
    """``K_n(lam, conj(1/lam)) = sum_k e_k lam**-k vphi_k(lam) vphi*_k(lam)``, vectorised.

    No zero check; used along perturbation paths where ``lam`` is known to
    be a zero of a neighbouring polynomial.
    """
    lam = np.asarray(lam, dtype=complex)
    v = szego_values(seq, n, lam)
    e = seq.scalars.e[: n + 1].reshape((-1,) + (1,) * lam.ndim)
    k = np.arange(n + 1).reshape((-1,) + (1,) * lam.ndim)
    return np.sum(e * lam ** (-k) * v.phi * v.phistar, axis=0)


def coefficient_table(pair: PolySequencePair, which: str = "phi") -> list[tuple[int, int, float, float]]:
    """Rows ``(k, exponent, re, im)`` for a debug dump of one polynomial family."""
    rows = []
    for k, p in enumerate(getattr(pair, which)):
        for j, c in enumerate(p.coeffs):
            rows.append((k, j, float(c.real), float(c.imag)))
    return rows
