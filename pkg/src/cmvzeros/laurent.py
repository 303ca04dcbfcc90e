"""Standard right/left orthonormal Laurent polynomials and eigenvector polynomials.

The right family is ``chi_{2m} = z**-m vphi*_{2m}``, ``chi_{2m+1} = z**-m vphi_{2m+1}``;
the left family is its substar conjugate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .poly import LaurentPoly, ZERO_ARG_TOL, substar, szego_sequences, szego_values
from .schur import SchurSequence


@dataclass(frozen=True, eq=False)
class ChiSequences:
    chi: list
    chistar: list

    @property
    def n(self) -> int:
        return len(self.chi) - 1


def right_support(k: int) -> tuple[int, int]:
    """Support of ``chi_k`` on the right ladder: ``(-m, m)`` or ``(-m, m+1)``."""
    m = k // 2
    return (-m, m) if k % 2 == 0 else (-m, m + 1)


def left_support(k: int) -> tuple[int, int]:
    m = k // 2
    return (-m, m) if k % 2 == 0 else (-m - 1, m)


def build_chi(seq: SchurSequence, n: int | None = None) -> ChiSequences:
    n = seq.N if n is None else n
    pair = szego_sequences(seq, n)
    chi = []
    for k in range(n + 1):
        m = k // 2
        src = pair.varphistar[k] if k % 2 == 0 else pair.varphi[k]
        chi.append(src.to_laurent().shifted(-m))
    return ChiSequences(chi=chi, chistar=[substar(f) for f in chi])


def theta_block(seq: SchurSequence, k: int) -> np.ndarray:
    """``Theta_k = [[-a_k, rho_k], [rhohat_k, conj(a_k)]]``."""
    a = seq.a(k)
    sc = seq.scalars
    return np.array([[-a, sc.rho[k]], [sc.rhohat[k], np.conj(a)]], dtype=complex)


def chi_values(seq: SchurSequence, n: int, z) -> tuple[np.ndarray, np.ndarray]:
    """Rows ``chi_k(z)`` and ``chi_{k*}(z)`` for ``k = 0..n`` (``z != 0``)."""
    z = np.asarray(z, dtype=complex)
    v = szego_values(seq, n, z)
    chi = np.empty_like(v.phi)
    chis = np.empty_like(v.phi)
    for k in range(n + 1):
        m = k // 2
        if k % 2 == 0:
            chi[k] = z ** (-m) * v.phistar[k]
            chis[k] = z ** (-m) * v.phi[k]
        else:
            chi[k] = z ** (-m) * v.phi[k]
            chis[k] = z ** (-m - 1) * v.phistar[k]
    return chi, chis


def _res(lhs, rhs) -> float:
    return float(np.max(np.abs(lhs - rhs) / (1 + np.abs(lhs) + np.abs(rhs))))


def theta_relations_residual(
    seq: SchurSequence, n: int, z_samples, flip_theta_sign: bool = False
) -> dict[str, float]:
    """Scaled residuals of the three 2-vector relations linking chi, chi_* and Theta.

    ``flip_theta_sign`` negates the ``rhohat`` entry of every Theta block and
    exists only as a negative control for the harness.
    """
    z = np.asarray(z_samples, dtype=complex).ravel()
    chi = build_chi(seq, n)
    X = np.array([f(z) for f in chi.chi])
    Xs = np.array([f(z) for f in chi.chistar])
    a = seq.padded
    rho = seq.scalars.rho

    def theta(k):
        t = theta_block(seq, k)
        if flip_theta_sign:
            t[1, 0] = -t[1, 0]
        return t

    out = {"even_from_odd": 0.0, "right_from_left": 0.0, "left_times_z": 0.0}
    for m in range(1, n // 2 + 1):
        k = 2 * m
        # (chi_k, chi_k*) = rho_k^-1 [[conj a_k, 1], [1, a_k]] (chi_{k-1}, chi_{k-1*})
        A = np.array([[np.conj(a[k]), 1], [1, a[k]]]) / rho[k]
        rhs = A @ np.vstack([X[k - 1], Xs[k - 1]])
        out["even_from_odd"] = max(out["even_from_odd"], _res(np.vstack([X[k], Xs[k]]), rhs))
        # (chi_{k-1}, chi_k) = Theta_k (chi_{k-1*}, chi_{k*})
        rhs = theta(k) @ np.vstack([Xs[k - 1], Xs[k]])
        out["right_from_left"] = max(out["right_from_left"], _res(np.vstack([X[k - 1], X[k]]), rhs))
    for m in range(0, (n - 1) // 2 + 1):
        k = 2 * m
        if k + 1 > n:
            break
        # z (chi_{k*}, chi_{k+1*}) = Theta_{k+1} (chi_k, chi_{k+1})
        lhs = z * np.vstack([Xs[k], Xs[k + 1]])
        rhs = theta(k + 1) @ np.vstack([X[k], X[k + 1]])
        out["left_times_z"] = max(out["left_times_z"], _res(lhs, rhs))
    return out


def m_block(seq: SchurSequence, k: int, hat: bool = False) -> np.ndarray:
    """Five-term recurrence block ``M_k`` (or ``M^_k`` with ``hat``); needs ``k+1 <= N``."""
    sc = seq.scalars
    a = seq.padded
    r = sc.rhohat if hat else sc.rho
    return np.array(
        [
            [-r[k] * a[k + 1], r[k] * r[k + 1]],
            [-np.conj(a[k]) * a[k + 1], np.conj(a[k]) * r[k + 1]],
        ],
        dtype=complex,
    )


def five_term_residual(seq: SchurSequence, n: int, z_samples) -> dict[str, float]:
    """Scaled residuals of the five-term recurrences for both ladders.

    ``right`` covers ``z chi_0 = -a_1 chi_0 + rho_1 chi_1`` and the 2x2 block
    steps whose data fit within ``chi_0..chi_n``; ``left`` is the analogue
    for the substar family.
    """
    if n < 2:
        raise ValueError("five-term residual needs n >= 2")
    z = np.asarray(z_samples, dtype=complex).ravel()
    X, Xs = chi_values(seq, n, z)
    a = seq.padded
    sc = seq.scalars
    out = {"right": 0.0, "left": 0.0}
    out["right"] = _res(z * X[0], -a[1] * X[0] + sc.rho[1] * X[1])
    for m in range(1, (n - 1) // 2 + 1):
        k = 2 * m
        lhs = z * np.vstack([X[k - 1], X[k]])
        rhs = m_block(seq, k - 1, hat=True).T @ np.vstack([X[k - 2], X[k - 1]]) + m_block(
            seq, k
        ) @ np.vstack([X[k], X[k + 1]])
        out["right"] = max(out["right"], _res(lhs, rhs))
    lhs = z * np.vstack([Xs[0], Xs[1]])
    rhs = np.outer([-a[1], sc.rhohat[1]], Xs[0]) + m_block(seq, 1) @ np.vstack([Xs[1], Xs[2]])
    out["left"] = _res(lhs, rhs)
    for m in range(1, (n - 2) // 2 + 1):
        k = 2 * m
        lhs = z * np.vstack([Xs[k], Xs[k + 1]])
        rhs = m_block(seq, k, hat=True).T @ np.vstack([Xs[k - 1], Xs[k]]) + m_block(
            seq, k + 1
        ) @ np.vstack([Xs[k + 1], Xs[k + 2]])
        out["left"] = max(out["left"], _res(lhs, rhs))
    return out


@dataclass(frozen=True)
class EigvecPair:
    V: np.ndarray
    Vstar: np.ndarray
    at_origin: bool


def eigvec_at(seq: SchurSequence, n: int, lam: complex) -> EigvecPair:
    """Eigenvector candidates ``V_n(lam)`` (for ``F_n``) and ``V_{n*}(lam)`` (for ``F_{*n}``).

    Away from the origin these are ``(chi_0(lam), ..., chi_{n-1}(lam))`` and the
    left analogue, unnormalised so that the first entry is 1.  At the origin
    the closed forms ``(0, ..., rho_{n-1}, a_{n-1})`` and ``(0, ..., 0, 1)`` are
    used, swapped between the two families according to the parity of ``n``.
    """
    if not 1 <= n <= seq.N:
        raise ValueError(f"order {n} outside 1..{seq.N}")
    lam = complex(lam)
    if abs(lam) <= ZERO_ARG_TOL:
        pair_vec = np.zeros(n, dtype=complex)
        unit = np.zeros(n, dtype=complex)
        unit[-1] = 1
        if n >= 2:
            pair_vec[-2] = seq.scalars.rho[n - 1]
            pair_vec[-1] = seq.a(n - 1)
        else:
            pair_vec[-1] = 1
        if n % 2 == 0:
            return EigvecPair(V=pair_vec, Vstar=unit, at_origin=True)
        return EigvecPair(V=unit, Vstar=pair_vec, at_origin=True)
    X, Xs = chi_values(seq, n - 1, lam)
    return EigvecPair(V=X.astype(complex), Vstar=Xs.astype(complex), at_origin=False)


def eigvec_polys(seq: SchurSequence, n: int) -> tuple[list, list]:
    """Vector polynomials ``X_n(z) = z**floor((n-1)/2) chi(z)`` and ``X_{n*}(z) = z**floor(n/2) chi_*(z)``.

    Each component is returned as a :class:`LaurentPoly` whose lowest exponent
    is non-negative.
    """
    chi = build_chi(seq, n - 1)
    p, q = (n - 1) // 2, n // 2
    X = [f.shifted(p) for f in chi.chi]
    Xs = [f.shifted(q) for f in chi.chistar]
    for f in X + Xs:
        if f.lo < 0:
            raise AssertionError("negative power survived the eigenvector prefactor")
    return X, Xs
