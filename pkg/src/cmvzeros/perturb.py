"""Derivatives of zeros under parameter perturbations, with finite-difference oracles.

Three one-parameter families are supported:

``extend_last``
    ``a_1 .. a_{n-1}`` fixed and ``a_n = t`` (complex, ``|t| != 1``).
``rotate_one``
    ``a_k(t) = e^{it} a_k`` for one ``k <= n`` (real ``t``).
``rotate_all``
    ``a_j(t) = e^{it} a_j`` for every ``j <= n`` (real ``t``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import mpmath
import numpy as np

from .cmv import assemble, assemble_derivative, build_F, families, five_diagonal_entries, signature
from .errors import MultipleZero, PathAmbiguity, ZeroArgument, ZeroDenominator
from .laurent import eigvec_at
from .poly import ZERO_ARG_TOL, assert_zero, inverse_conjugate_kernel, szego_values
from .schur import SchurSequence, validate
from .spectra import polish_zero, polish_zeros

KINDS = ("extend_last", "rotate_one", "rotate_all")
FD_STEP = 1e-6
# |K| below this fraction of the sum of |terms| counts as a vanishing kernel
KERNEL_TOL = 1e-9
# nearest/second-nearest ratio required for an unambiguous match
GAP_RATIO = 2.0
# FD pairs disagreeing by more than this (relative) are redone in extended precision
FD_RECHECK = 1e-8
# ... as are derivatives this small next to the rounding floor of a double difference
FD_FLOOR_RATIO = 1e-6
MP_DIGITS = 40


@dataclass(frozen=True, eq=False)
class PerturbationSpec:
    """A perturbation family evaluated at parameter ``t``.

    For ``extend_last`` only ``base.params[:n-1]`` is used (nothing when
    ``n = 1``); for the rotations ``base`` must hold at least ``n`` parameters.
    """

    kind: str
    base: SchurSequence
    n: int
    t: complex = 0.0
    k: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.kind == "extend_last":
            if self.n > 1 and self.base is None:
                raise ValueError("extension of order n > 1 needs a segment")
            if self.n > 1 and self.base.N < self.n - 1:
                raise ValueError(f"segment has {self.base.N} parameters, {self.n - 1} needed")
            if abs(abs(complex(self.t)) - 1) <= 1e-12:
                raise ValueError("extension values on the unit circle are excluded")
        else:
            if self.base.N < self.n:
                raise ValueError(f"sequence has {self.base.N} parameters, order {self.n} requested")
            if complex(self.t).imag != 0:
                raise ValueError("rotation parameter t must be real")
        if self.kind == "rotate_one":
            if self.k is None or not 1 <= self.k <= self.n:
                raise ValueError(f"rotate_one needs 1 <= k <= n, got k={self.k}")

    def at(self, t) -> "PerturbationSpec":
        return replace(self, t=t)

    @property
    def real_t(self) -> bool:
        return self.kind != "extend_last"

    def sequence(self) -> SchurSequence:
        """Schur parameters ``a_1(t) .. a_n(t)``."""
        if self.kind == "extend_last":
            seg = [] if self.n == 1 else list(self.base.params[: self.n - 1])
            return validate(seg + [complex(self.t)])
        t = float(complex(self.t).real)
        head = self.base.truncated(self.n)
        return head.rotated(t, self.k if self.kind == "rotate_one" else None)

    def matrix(self) -> np.ndarray:
        return build_F(self.sequence(), self.n).dense

    def matrix_derivative(self) -> np.ndarray:
        """``dF_n/dt`` from the entry list by the product rule."""
        seq = self.sequence()
        n = self.n
        fam = families(seq, n)
        zero = np.zeros(n + 1, dtype=complex)
        if self.kind == "extend_last":
            da = zero.copy()
            da[n] = 1  # holomorphic in t; rho_n never enters F_n
            dfam = {"a": da}
        else:
            idx = np.zeros(n + 1, dtype=bool)
            if self.kind == "rotate_one":
                idx[self.k] = True
            else:
                idx[1:] = True
            dfam = {"a": np.where(idx, 1j * fam["a"], 0), "b": np.where(idx, -1j * fam["b"], 0)}
        return assemble_derivative(five_diagonal_entries(n), fam, dfam, n)


def _check_matrix_consistency(spec: PerturbationSpec) -> float:
    """Sanity: entry-list assembly reproduces ``build_F`` (used in tests)."""
    seq = spec.sequence()
    M = assemble(five_diagonal_entries(spec.n), families(seq, spec.n), spec.n)
    return float(np.max(np.abs(M - spec.matrix())))


@dataclass(frozen=True)
class DerivativeReport:
    kind: str
    t: complex
    lam: complex
    analytic: complex
    fd: complex
    rel_err: float
    kernel_value: complex
    fd_error: float
    cr_residual: float | None = None

    @property
    def radial(self) -> float:
        """``r'/r`` where ``lam = r e^{i theta}``."""
        return float((self.analytic / self.lam).real)

    @property
    def angular(self) -> float:
        """``theta'``."""
        return float((self.analytic / self.lam).imag)


def _kernel_and_scale(seq: SchurSequence, n: int, lam: complex) -> tuple[complex, float]:
    """``K_{n-1}(lam, conj(1/lam))`` and the sum of the moduli of its terms."""
    v = szego_values(seq, n - 1, lam)
    k = np.arange(n)
    terms = seq.scalars.e[:n] * lam ** (-k) * v.phi * v.phistar
    return complex(np.sum(terms)), float(np.sum(np.abs(terms)))


def _gate_simple(seq, n, lam) -> complex:
    K, scale = _kernel_and_scale(seq, n, lam)
    if abs(K) <= KERNEL_TOL * max(scale, 1e-300):
        raise MultipleZero(f"kernel vanishes at lam={lam!r} (|K|={abs(K):.3e}); zero is multiple")
    return K


def _analytic(spec: PerturbationSpec, lam: complex) -> tuple[complex, complex]:
    """Return ``(lam', K_{n-1}(lam, conj(1/lam)))`` from the closed formulas."""
    seq = spec.sequence()
    n = spec.n
    sc = seq.scalars
    if abs(lam) <= ZERO_ARG_TOL:
        if spec.kind != "extend_last":
            raise ZeroArgument("rotation formulas need lam != 0")
        a_prev = seq.a(n - 1)
        if a_prev == 0:
            raise ZeroDenominator("a_{n-1} = 0: the zero at the origin is double")
        return -1 / a_prev, complex(sc.e[n - 1] * a_prev)
    K = _gate_simple(seq, n, lam)
    if spec.kind == "extend_last":
        v = szego_values(seq, n - 1, lam)
        return -sc.e[n - 1] * lam ** (1 - n) * v.phistar[n - 1] ** 2 / K, K
    if spec.kind == "rotate_all":
        return 1j * lam / K, K
    k = spec.k
    v = szego_values(seq, k, lam)
    ak = seq.a(k)
    bracket = sc.e[k - 1] * ak * v.phistar[k - 1] ** 2 + sc.e[k] * np.conj(ak) * v.phi[k] ** 2
    return complex(-1j * lam ** (1 - k) * bracket / K), K


def track_zero(spec: PerturbationSpec, lam: complex) -> complex:
    """The eigenvalue of ``F_n`` at ``spec.t`` nearest ``lam``, Newton-polished on ``phi_n``.

    Raises :class:`PathAmbiguity` when the second-nearest eigenvalue is not
    clearly farther away.
    """
    w = np.linalg.eigvals(spec.matrix())
    d = np.abs(w - lam)
    order = np.argsort(d)
    if len(w) > 1 and d[order[1]] < GAP_RATIO * d[order[0]]:
        raise PathAmbiguity(
            f"ambiguous match near {lam!r} at t={spec.t!r}", t=spec.t,
            ratio=float(d[order[1]] / max(d[order[0]], 1e-300)),
        )
    return polish_zero(spec.sequence(), spec.n, w[order[0]])


def _central(spec: PerturbationSpec, lam: complex, direction: complex, h: float) -> complex:
    t = complex(spec.t)
    tp, tm = t + direction * h, t - direction * h
    if spec.real_t:
        tp, tm = tp.real, tm.real
    return (track_zero(spec.at(tp), lam) - track_zero(spec.at(tm), lam)) / (2 * h)


def _mp_params(spec: PerturbationSpec, t) -> list:
    """``a_1(t) .. a_n(t)`` at the current mpmath precision."""
    n = spec.n
    if spec.kind == "extend_last":
        seg = [] if n == 1 else [mpmath.mpc(complex(x)) for x in spec.base.params[: n - 1]]
        return seg + [t]
    base = [mpmath.mpc(complex(x)) for x in spec.base.params[:n]]
    rot = mpmath.expj(t)
    if spec.kind == "rotate_all":
        return [rot * x for x in base]
    base[spec.k - 1] *= rot
    return base


def _mp_zero(params: list, z):
    """Newton on the monic polynomial with Schur parameters ``params`` from ``z``."""
    tiny = mpmath.mpf(10) ** (-mpmath.mp.dps + 5)
    for _ in range(60):
        p, ps, dp, dps = mpmath.mpc(1), mpmath.mpc(1), mpmath.mpc(0), mpmath.mpc(0)
        for a in params:
            zp, dzp = z * p, p + z * dp
            ca = mpmath.conj(a)
            p, ps, dp, dps = zp + a * ps, ps + ca * zp, dzp + a * dps, dps + ca * dzp
        if dp == 0:
            break
        step = p / dp
        z -= step
        if abs(step) <= tiny * (1 + abs(z)):
            break
    return z


def _central_mp(spec: PerturbationSpec, lam: complex, direction: complex, h: float):
    t = complex(spec.t)
    tp, tm = t + direction * h, t - direction * h
    if spec.real_t:
        tp, tm = tp.real, tm.real
    # the double-precision match fixes which zero is followed
    zp, zm = track_zero(spec.at(tp), lam), track_zero(spec.at(tm), lam)
    with mpmath.workdps(MP_DIGITS):
        hh = mpmath.mpf(h)
        d = mpmath.mpc(direction) if not spec.real_t else mpmath.mpf(complex(direction).real)
        t0 = mpmath.mpc(t) if not spec.real_t else mpmath.mpf(t.real)
        lp = _mp_zero(_mp_params(spec, t0 + d * hh), mpmath.mpc(zp))
        lm = _mp_zero(_mp_params(spec, t0 - d * hh), mpmath.mpc(zm))
        return (lp - lm) / (2 * hh)


def richardson_derivative(
    spec: PerturbationSpec, lam: complex, direction: complex = 1, h: float = FD_STEP,
    precision: str = "auto",
) -> tuple[complex, float]:
    """Directional derivative of the zero ``lam`` along ``t + s*direction``.

    Central differences at ``h`` and ``h/2`` combined by Richardson
    extrapolation; the second value is ``|D(h/2) - D(h)|``, an error estimate
    of the unrefined difference.  ``precision`` is ``"double"``,
    ``"extended"`` (40-digit Newton on the perturbed polynomial at ``t +- h``)
    or ``"auto"``, which switches to extended when the double estimate
    exceeds ``FD_RECHECK`` relative to the derivative, or when the rounding
    floor ``16 eps max(1, |lam|) / h`` exceeds ``FD_FLOOR_RATIO`` of it.
    Nearly stationary zeros need this: both double differences can round to
    the same value, so their disagreement no longer reveals the noise.
    """
    if precision not in ("auto", "double", "extended"):
        raise ValueError("precision must be auto, double or extended")
    if precision != "extended":
        d1 = _central(spec, lam, direction, h)
        d2 = _central(spec, lam, direction, h / 2)
        est, err = (4 * d2 - d1) / 3, float(abs(d2 - d1))
        floor = 16 * np.finfo(float).eps * max(1.0, abs(lam)) / h
        if precision == "double" or (err <= FD_RECHECK * abs(est) and floor <= FD_FLOOR_RATIO * abs(est)):
            return est, err
    with mpmath.workdps(MP_DIGITS):
        d1 = _central_mp(spec, lam, direction, h)
        d2 = _central_mp(spec, lam, direction, h / 2)
        return complex((4 * d2 - d1) / 3), float(abs(d2 - d1))


def _report(spec, lam, analytic, K, fd, err, cr=None) -> DerivativeReport:
    rel = float(abs(analytic - fd) / (abs(analytic) + 1e-12))
    return DerivativeReport(spec.kind, complex(spec.t), complex(lam), complex(analytic), complex(fd),
                            rel, complex(K), err, cr)


def derivative(spec: PerturbationSpec, lam: complex, h: float = FD_STEP) -> DerivativeReport:
    """Analytic derivative of the zero ``lam`` of ``phi_n`` at ``spec.t``, with its FD check."""
    lam = complex(lam)
    seq = spec.sequence()
    assert_zero(seq, spec.n, lam)
    analytic, K = _analytic(spec, lam)
    if spec.real_t:
        fd, err = richardson_derivative(spec, lam, 1, h)
        return _report(spec, lam, analytic, K, fd, err)
    dx, ex = richardson_derivative(spec, lam, 1, h)
    dy, ey = richardson_derivative(spec, lam, 1j, h)
    # holomorphic: d/dt = d/dx = -i d/dy
    fd = (dx - 1j * dy) / 2
    cr = float(abs(dx + 1j * dy) / (abs(fd) + 1e-12))
    return _report(spec, lam, analytic, K, fd, max(ex, ey), cr)


def extension_derivative(segment, n: int, lam: complex, t: complex = 0.0, h: float = FD_STEP) -> DerivativeReport:
    """Zero velocity of ``phi_n^t = z phi_{n-1} + t phi*_{n-1}`` with respect to ``t``.

    ``segment`` holds ``a_1 .. a_{n-1}`` (a :class:`SchurSequence`, a list of
    numbers, or ``None`` when ``n = 1``).
    """
    if segment is not None and not isinstance(segment, SchurSequence):
        segment = validate(segment) if len(segment) else None
    return derivative(PerturbationSpec("extend_last", segment, n, t), lam, h)


def rotate_one_derivative(seq: SchurSequence, n: int, k: int, t: float, lam: complex, h: float = FD_STEP) -> DerivativeReport:
    if abs(complex(lam)) <= ZERO_ARG_TOL:
        raise ZeroArgument("single-parameter rotation formula is stated for lam != 0 only")
    return derivative(PerturbationSpec("rotate_one", seq, n, t, k), lam, h)


def rotate_all_derivative(seq: SchurSequence, n: int, t: float, lam: complex, h: float = FD_STEP) -> DerivativeReport:
    if abs(complex(lam)) <= ZERO_ARG_TOL:
        raise ZeroArgument("rotation formula is stated for lam != 0 only")
    return derivative(PerturbationSpec("rotate_all", seq, n, t), lam, h)


@dataclass(frozen=True)
class HellmannFeynman:
    lhs: complex
    rhs: complex
    lam_prime: complex

    @property
    def residual(self) -> float:
        return float(abs(self.lhs - self.rhs) / (abs(self.lhs) + abs(self.rhs) + 1e-300))


def hellmann_feynman_check(spec: PerturbationSpec, lam: complex, h: float = FD_STEP) -> HellmannFeynman:
    """Compare ``V_{n*}(lam)^T E_n F_n'(t) V_n(lam)`` with its scalar form times the FD ``lam'``.

    The scalar is ``K_{n-1}(lam, conj(1/lam))``, or ``e_{n-1} a_{n-1}`` at the origin.
    """
    lam = complex(lam)
    seq = spec.sequence()
    n = spec.n
    assert_zero(seq, n, lam)
    if abs(lam) <= ZERO_ARG_TOL:
        a_prev = seq.a(n - 1)
        if a_prev == 0:
            raise MultipleZero("lam = 0 with a_{n-1} = 0 is a multiple zero")
        scalar = complex(seq.scalars.e[n - 1] * a_prev)
    else:
        scalar = _gate_simple(seq, n, lam)
    pair = eigvec_at(seq, n, lam)
    E = signature(seq, n).diag
    lhs = complex(pair.Vstar @ (E * (spec.matrix_derivative() @ pair.V)))
    # for the holomorphic extension the real direction already gives d/dt
    lp, _ = richardson_derivative(spec, lam, 1, h)
    return HellmannFeynman(lhs=lhs, rhs=scalar * lp, lam_prime=lp)


# -- continuation ------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Continuation:
    """Zeros along a grid, matched into paths: ``paths[j, i]`` is zero ``i`` at ``t[j]``.

    ``grid_derivative`` holds second-order differences along the matched
    paths; ``ambiguous`` lists grid indices whose match failed the gap test.
    """

    t: np.ndarray
    paths: np.ndarray
    grid_derivative: np.ndarray
    ambiguous: tuple


def _greedy_match(prev: np.ndarray, cur: np.ndarray) -> tuple[np.ndarray, float]:
    """Permutation of ``cur`` that follows ``prev`` and the worst gap ratio."""
    n = len(prev)
    d = np.abs(prev[:, None] - cur[None, :])
    ratio = math.inf
    if n > 1:
        s = np.sort(d, axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.where(s[:, 0] > 0, s[:, 1] / s[:, 0], np.where(s[:, 1] > 0, np.inf, 1.0))
        ratio = float(np.min(r))
    perm = np.full(n, -1)
    used_r, used_c = set(), set()
    for flat in np.argsort(d, axis=None):
        i, j = divmod(int(flat), n)
        if i in used_r or j in used_c:
            continue
        perm[i] = j
        used_r.add(i)
        used_c.add(j)
        if len(used_r) == n:
            break
    return cur[perm], ratio


def fd_continuation(spec: PerturbationSpec, t_grid, strict: bool = True, polish: bool = True) -> Continuation:
    """Continue every zero of ``F_n(t)`` along ``t_grid`` by nearest matching.

    With ``strict`` a gap ratio below ``GAP_RATIO`` raises
    :class:`PathAmbiguity`; otherwise the step is recorded in ``ambiguous``.
    """
    t = np.asarray(t_grid, dtype=complex if not spec.real_t else float).ravel()
    if len(t) < 3:
        raise ValueError("continuation needs at least three grid points")
    rows = []
    for tj in t:
        s = spec.at(tj)
        w = np.linalg.eigvals(s.matrix())
        if polish:
            seq = s.sequence()
            w = polish_zeros(seq, spec.n, w)
        rows.append(w)
    paths = np.empty((len(t), spec.n), dtype=complex)
    paths[0] = np.sort_complex(rows[0])
    ambiguous = []
    for j in range(1, len(t)):
        paths[j], ratio = _greedy_match(paths[j - 1], rows[j])
        if ratio < GAP_RATIO:
            if strict:
                raise PathAmbiguity(f"zeros too close to match between t={t[j - 1]!r} and t={t[j]!r}",
                                    t=t[j], ratio=ratio)
            ambiguous.append(j)
    s_idx = np.arange(len(t), dtype=float)
    dt = np.gradient(t, s_idx, edge_order=2)
    grid_deriv = np.gradient(paths, s_idx, axis=0, edge_order=2) / dt[:, None]
    return Continuation(t, paths, grid_deriv, tuple(ambiguous))


TRAJECTORY_COLUMNS = (
    "t", "zero_index", "re", "im", "modulus",
    "analytic_dre", "analytic_dim", "fd_dre", "fd_dim", "rel_err",
    "kernel_re", "kernel_im", "t_im", "flag",
)


def trajectory(spec: PerturbationSpec, t_grid, h: float = FD_STEP) -> list[tuple]:
    """Trajectory table rows (see ``TRAJECTORY_COLUMNS``).

    Derivative columns are NaN where a formula does not apply (multiple zero,
    origin under rotation); ``flag`` is ``"ambiguous"`` at steps that failed
    the matching gap test, ``"multiple"``/``"origin"``/``"fd_failed"`` where
    the derivative could not be formed, and empty otherwise.
    """
    cont = fd_continuation(spec, t_grid, strict=False)
    amb = set(cont.ambiguous)
    nan = float("nan")
    rows = []
    for j, tj in enumerate(cont.t):
        s = spec.at(tj)
        for i, lam in enumerate(cont.paths[j]):
            flag = "ambiguous" if j in amb else ""
            an = fd = K = complex(nan, nan)
            rel = nan
            try:
                an, K = _analytic(s, complex(lam))
                try:
                    if s.real_t:
                        fd, _ = richardson_derivative(s, lam, 1, h)
                    else:
                        dx, _ = richardson_derivative(s, lam, 1, h)
                        dy, _ = richardson_derivative(s, lam, 1j, h)
                        fd = (dx - 1j * dy) / 2
                    rel = float(abs(an - fd) / (abs(an) + 1e-12))
                except PathAmbiguity:
                    flag = flag or "fd_failed"
            except (MultipleZero, ZeroDenominator):
                flag = flag or "multiple"
            except ZeroArgument:
                flag = flag or "origin"
            tc = complex(tj)
            rows.append((
                tc.real, i, lam.real, lam.imag, abs(lam),
                an.real, an.imag, fd.real, fd.imag, rel,
                K.real, K.imag, tc.imag, flag,
            ))
    return rows
