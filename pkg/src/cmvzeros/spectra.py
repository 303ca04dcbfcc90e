"""Zeros of the orthogonal polynomials as eigenvalues, eigenvector checks and zero bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .cmv import build_F, build_Fstar, build_H, five_diagonal_entries, signature
from .errors import InvalidEpsilon, InvalidRadii, SolverFailure
from .laurent import eigvec_at
from .poly import ZERO_ARG_TOL, assert_zero, szego_sequences, szego_values
from .schur import SchurSequence

BACKENDS = ("cmv_eig", "hessenberg_eig", "companion")
CLUSTER_TOL = 1e-8
# slack used for strict inequalities such as |a_n| < |lam| < 1
BOUND_SLACK = 1e-10
# eigenvector residuals above this are re-evaluated in extended precision
RECHECK_TOL = 1e-10
MP_DIGITS = 40


def charpoly_eval(matrix, z):
    """``det(z I - M)`` at one point or an array of points (LU with partial pivoting)."""
    M = np.asarray(getattr(matrix, "dense", matrix), dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("charpoly_eval needs a square matrix")
    z = np.asarray(z, dtype=complex)
    n = M.shape[0]
    shifted = z.reshape(z.shape + (1, 1)) * np.eye(n) - M
    d = np.linalg.det(shifted)
    return complex(d) if z.ndim == 0 else d


@dataclass(frozen=True)
class Cluster:
    centroid: complex
    multiplicity: int
    members: tuple


@dataclass(frozen=True, eq=False)
class SpectrumResult:
    """Computed eigenvalues with their cluster labels.

    ``cluster_id[j]`` and ``multiplicity[j]`` refer to ``eigenvalues[j]``;
    ``clusters`` lists each cluster once.
    """

    eigenvalues: np.ndarray
    cluster_id: np.ndarray
    multiplicity: np.ndarray
    residuals: np.ndarray
    backend: str
    clusters: tuple
    refined: np.ndarray | None = None
    residual_precision: np.ndarray | None = None

    @property
    def n(self) -> int:
        return len(self.eigenvalues)

    @property
    def all_simple(self) -> bool:
        return all(c.multiplicity == 1 for c in self.clusters)

    def rows(self) -> list[tuple]:
        """Zero-table rows ``(index, re, im, modulus, multiplicity, residual)``."""
        return [
            (j, float(l.real), float(l.imag), float(abs(l)), int(m), float(r))
            for j, (l, m, r) in enumerate(zip(self.eigenvalues, self.multiplicity, self.residuals))
        ]


def cluster_multiplicities(
    eigs, tol: float = CLUSTER_TOL, residuals=None, backend: str = "input"
) -> SpectrumResult:
    """Single-linkage clustering of ``eigs`` at radius ``tol``."""
    if not tol > 0:
        raise ValueError("cluster tolerance must be positive")
    eigs = np.asarray(eigs, dtype=complex).ravel()
    n = len(eigs)
    if n == 0:
        raise ValueError("no eigenvalues to cluster")
    dist = np.abs(eigs[:, None] - eigs[None, :])
    i, j = np.nonzero(dist <= tol)
    graph = coo_matrix((np.ones(len(i)), (i, j)), shape=(n, n))
    _, labels = connected_components(graph, directed=False)
    # relabel by first appearance so output is order-stable
    order = {}
    for lab in labels:
        order.setdefault(lab, len(order))
    labels = np.array([order[lab] for lab in labels])
    clusters = []
    for c in range(len(order)):
        idx = np.flatnonzero(labels == c)
        clusters.append(Cluster(complex(np.mean(eigs[idx])), len(idx), tuple(int(k) for k in idx)))
    mult = np.array([clusters[c].multiplicity for c in labels])
    res = np.full(n, np.nan) if residuals is None else np.asarray(residuals, dtype=float)
    return SpectrumResult(eigs, labels, mult, res, backend, tuple(clusters))


def companion_matrix(coeffs) -> np.ndarray:
    """Companion matrix of the monic polynomial with ascending ``coeffs``."""
    c = np.asarray(coeffs, dtype=complex)
    n = len(c) - 1
    C = np.zeros((n, n), dtype=complex)
    C[1:, :-1] = np.eye(n - 1)
    C[:, -1] = -c[:-1] / c[-1]
    return C


def _eigvals(M: np.ndarray, label: str) -> np.ndarray:
    try:
        w = np.linalg.eigvals(M)
    except np.linalg.LinAlgError as exc:
        raise SolverFailure(f"{label}: eigensolver did not converge ({exc})") from exc
    if not np.all(np.isfinite(w)):
        raise SolverFailure(f"{label}: non-finite eigenvalues {w!r}")
    return w


def polish_zeros(seq: SchurSequence, n: int, lams, steps: int = 3) -> np.ndarray:
    """Newton steps on the monic ``phi_n`` for an array of starting points.

    Each iterate is kept only while it lowers ``|phi_n|`` at that point.
    """
    lam = np.array(lams, dtype=complex).ravel()
    best = np.abs(szego_values(seq, n, lam, normalized=False).phi[n])
    active = best > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        for _ in range(steps):
            if not active.any():
                break
            v = szego_values(seq, n, lam, order=1, normalized=False)
            cand = lam - v.phi[n] / v.dphi[n]
            val = np.abs(szego_values(seq, n, cand, normalized=False).phi[n])
            ok = active & np.isfinite(val) & (val < best)
            lam = np.where(ok, cand, lam)
            best = np.where(ok, val, best)
            active = ok & (best > 0)
    return lam


def polish_zero(seq: SchurSequence, n: int, lam: complex, steps: int = 3) -> complex:
    """Scalar form of :func:`polish_zeros`."""
    return complex(polish_zeros(seq, n, [lam], steps)[0])


def eigvec_residual(F: np.ndarray, lam: complex, v: np.ndarray) -> float:
    nv = np.linalg.norm(v)
    if nv == 0:
        return math.inf
    return float(np.linalg.norm(lam * v - F @ v) / nv)


def eigvec_residual_mp(seq: SchurSequence, n: int, lam: complex, digits: int = MP_DIGITS) -> float:
    """``||(lam I - F_n) V_n(lam)|| / ||V_n(lam)||`` in ``digits``-digit arithmetic.

    The double-precision value of ``lam`` is first refined by Newton's method
    on ``vphi_n`` at the working precision.  Needed because ``V_n(lam)`` can
    decay by many orders of magnitude along its index, and the forward
    recurrence then loses the trailing entries to cancellation in doubles.
    """
    with mpmath.workdps(digits):
        one = mpmath.mpc(1)
        a = [one] + [mpmath.mpc(complex(x)) for x in seq.params[:n]]
        rho = [mpmath.mpf(1)] + [mpmath.sqrt(abs(1 - abs(x) ** 2)) for x in a[1:]]
        eps = [1] + [int(k) for k in seq.scalars.eps[1 : n + 1]]

        def values(z):
            p, ps, dp, dps = [one], [one], [0 * one], [0 * one]
            for k in range(1, n + 1):
                zp, dzp = z * p[-1], p[-1] + z * dp[-1]
                ck = mpmath.conj(a[k])
                p.append((zp + a[k] * ps[-1]) / rho[k])
                dp.append((dzp + a[k] * dps[-1]) / rho[k])
                ps.append((ps[-1] + ck * zp) / rho[k])
                dps.append((dps[-1] + ck * dzp) / rho[k])
            return p, ps, dp

        z = mpmath.mpc(complex(lam))
        tiny = mpmath.mpf(10) ** (-digits + 5)
        for _ in range(60):
            p, _, dp = values(z)
            if dp[n] == 0:
                break
            step = p[n] / dp[n]
            z -= step
            if abs(step) <= tiny * (1 + abs(z)):
                break
        p, ps, _ = values(z)
        V = [z ** (-(k // 2)) * (ps[k] if k % 2 == 0 else p[k]) for k in range(n)]
        fam = {
            "a": a,
            "b": [mpmath.conj(x) for x in a],
            "c": rho,
            "d": [e * r for e, r in zip(eps, rho)],
            "1": [one],
        }
        R = [z * v for v in V]
        for e in five_diagonal_entries(n):
            f1, f2 = e.factors
            R[e.row] -= e.sign * fam[f1.family][f1.index] * fam[f2.family][f2.index] * V[e.col]
        return float(mpmath.sqrt(sum(abs(r) ** 2 for r in R)) / mpmath.sqrt(sum(abs(v) ** 2 for v in V)))


def _eigvec_residual_escalating(seq, n, F, lam) -> tuple[float, str]:
    r = eigvec_residual(F, lam, eigvec_at(seq, n, lam).V)
    if r > RECHECK_TOL and abs(lam) > ZERO_ARG_TOL:
        return eigvec_residual_mp(seq, n, lam), "extended"
    return r, "double"


def zeros(
    seq: SchurSequence,
    n: int | None = None,
    backend: str = "cmv_eig",
    cluster_tol: float = CLUSTER_TOL,
) -> SpectrumResult:
    """Zeros of ``phi_n`` as the eigenvalues of ``F_n``, ``H_n`` or the companion matrix.

    For ``cmv_eig`` the residual of each eigenvalue is computed with the
    explicit eigenvector ``V_n(lam)`` at the Newton-polished zero (stored in
    ``refined``), re-evaluated in extended precision when the double value
    exceeds ``RECHECK_TOL`` (see ``residual_precision``); the other backends report the backward error of ``phi_n``
    at the computed value.
    """
    n = seq.N if n is None else n
    if backend not in BACKENDS:
        raise ValueError(f"backend must be one of {BACKENDS}")
    if backend == "cmv_eig":
        F = build_F(seq, n).dense
        w = _eigvals(F, backend)
        refined = polish_zeros(seq, n, w)
        checks = [_eigvec_residual_escalating(seq, n, F, lam) for lam in refined]
        res = np.array([c[0] for c in checks])
        precision = np.array([c[1] for c in checks])
    else:
        refined = precision = None
        phi = szego_sequences(seq, n).phi[n]
        M = build_H(seq, n).dense if backend == "hessenberg_eig" else companion_matrix(phi.coeffs)
        w = _eigvals(M, backend)
        res = np.asarray(phi.backward_error(w), dtype=float)
    order = np.lexsort((w.imag, w.real))
    out = cluster_multiplicities(w[order], cluster_tol, res[order], backend)
    if refined is not None:
        object.__setattr__(out, "refined", refined[order])
        object.__setattr__(out, "residual_precision", precision[order])
    return out


def matching_distance(x, y) -> float:
    """Largest pair distance in the optimal (min-sum) matching of two multisets."""
    x = np.asarray(x, dtype=complex).ravel()
    y = np.asarray(y, dtype=complex).ravel()
    if len(x) != len(y):
        raise ValueError("multisets of different size")
    cost = np.abs(x[:, None] - y[None, :])
    r, c = linear_sum_assignment(cost)
    return float(np.max(cost[r, c])) if len(x) else 0.0


def matching_tolerance(eigs, base: float = 1e-7, max_abs_param: float = 1.0) -> float:
    """Backend-agreement tolerance.

    ``base`` up to order 32; beyond it scaled by ``n (1 + max|a_k|)``.  When
    the closest pair of zeros is nearer than ``sqrt(base)`` the tolerance is
    widened to ``base / sep``, the first-order sensitivity of a near-double
    root.
    """
    eigs = np.asarray(eigs, dtype=complex).ravel()
    n = len(eigs)
    tol = base if n <= 32 else base * n * (1 + max_abs_param)
    if n >= 2:
        d = np.abs(eigs[:, None] - eigs[None, :])
        np.fill_diagonal(d, np.inf)
        sep = float(np.min(d))
        if sep < math.sqrt(base):
            tol = max(tol, base / max(sep, 1e-300) * base ** 0.5)
    return tol


@dataclass(frozen=True)
class EigvecCheck:
    F: float
    Fstar: float
    FT: float
    at_origin: bool

    @property
    def worst(self) -> float:
        return max(self.F, self.Fstar, self.FT)


def verify_eigvec(seq: SchurSequence, n: int, lam: complex) -> EigvecCheck:
    """Residuals of ``V_n(lam)`` for ``F_n``, ``V_{n*}(lam)`` for ``F_{*n}`` and
    ``E_n V_{n*}(lam)`` for ``F_n^T``.

    Raises :class:`NotAZero` if ``lam`` fails the zero gate.
    """
    assert_zero(seq, n, lam)
    pair = eigvec_at(seq, n, lam)
    F = build_F(seq, n).dense
    Fs = build_Fstar(seq, n).dense
    E = signature(seq, n).diag
    return EigvecCheck(
        F=eigvec_residual(F, lam, pair.V),
        Fstar=eigvec_residual(Fs, lam, pair.Vstar),
        FT=eigvec_residual(F.T, lam, E * pair.Vstar),
        at_origin=pair.at_origin,
    )


def geometric_multiplicity(M: np.ndarray, lam: complex, rtol: float = 1e-8) -> int:
    """Dimension of the numerical kernel of ``lam I - M`` (singular values below
    ``rtol`` times the largest)."""
    s = np.linalg.svd(lam * np.eye(M.shape[0]) - M, compute_uv=False)
    return int(np.sum(s <= rtol * max(1.0, s[0])))


# -- bounds --------------------------------------------------------------------


@dataclass(frozen=True)
class AnnulusBound:
    R1: float
    R2: float
    K: float
    K1: float
    K2: float

    @property
    def K1_effective(self) -> float:
        return max(self.K1, 0.0)

    def contains(self, lam, slack: float = BOUND_SLACK) -> np.ndarray:
        r = np.abs(np.asarray(lam))
        return (r <= self.K2 + slack) & (r >= self.K1_effective - slack)

    def to_json(self) -> dict:
        return {
            "R1": self.R1, "R2": self.R2, "K": self.K,
            "K1": self.K1, "K2": self.K2, "K1_effective": self.K1_effective,
        }


def gershgorin_annulus(R1: float, R2: float) -> AnnulusBound:
    """Annulus ``K1 <= |z| <= K2`` containing every zero when ``R1 <= |a_k| <= R2``."""
    R1, R2 = float(R1), float(R2)
    if not (0 <= R1 <= R2) or not math.isfinite(R2):
        raise InvalidRadii(f"need 0 <= R1 <= R2, got R1={R1}, R2={R2}")
    if R1 == 1 or R2 == 1:
        raise InvalidRadii("radii must differ from 1")
    K = max(abs(1 - R1 * R1) ** 0.5, abs(1 - R2 * R2) ** 0.5)
    K2 = (R2 + K) ** 2
    K1 = R1 * R1 + R2 * R2 - K2
    if K2 < R2 + K - 1e-12 or K1 > R1 - K + 1e-12:
        raise AssertionError("annulus inequalities violated")
    return AnnulusBound(R1=R1, R2=R2, K=K, K1=K1, K2=K2)


def delta_for_epsilon(eps: float) -> float:
    """Closeness of the parameters to the circle that keeps the zeros within ``eps`` of it."""
    eps = float(eps)
    if not eps > 0 or not math.isfinite(eps):
        raise InvalidEpsilon(f"epsilon must be positive, got {eps}")
    return math.sqrt(1 + eps * eps / (4 * (1 + eps))) - 1


def product_law_holds(seq: SchurSequence, n: int, eigs, slack: float = BOUND_SLACK) -> bool:
    """``|a_n| < |lam| < 1`` for every ``lam`` (positive-definite sequences only)."""
    r = np.abs(np.asarray(eigs))
    an = abs(seq.a(n))
    return bool(np.all(r > an - slack) and np.all(r < 1 + slack))
