"""Five-diagonal matrix F, its left variant F_*, the factor pair and the Hessenberg matrix H.

The five-diagonal matrix is generated from a symbolic list of entries.  Each
entry is ``sign * f1 * f2`` where the factors are drawn from four parameter
families treated as independent: ``a`` (the parameters), ``b`` (their
conjugates), ``c`` (``rho``) and ``d`` (``rhohat``).  The same list gives the
dense matrix, the banded storage and the exact derivative of the matrix
along any differentiable path of the families.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np

from .errors import DimensionMismatch
from .laurent import theta_block
from .schur import SchurSequence


class Factor(NamedTuple):
    family: str  # "a", "b", "c", "d" or "1"
    index: int


class Entry(NamedTuple):
    row: int
    col: int
    sign: int
    factors: tuple


ONE = Factor("1", 0)


def five_diagonal_entries(n: int) -> list[Entry]:
    """Structural entries of the order-``n`` truncation of ``G(a, b, c, d)``.

    Rows ``2m-1, 2m`` hold the transposed hatted block of index ``2m-1`` in
    columns ``2m-2, 2m-1`` and the block of index ``2m`` in columns ``2m, 2m+1``.
    Only parameters ``1..n`` are referenced.
    """
    out = [Entry(0, 0, -1, (Factor("a", 1), ONE)), Entry(0, 1, 1, (Factor("c", 1), ONE))]
    m = 1
    while 2 * m - 1 < n:
        r1, r2 = 2 * m - 1, 2 * m
        k = 2 * m - 1
        # transposed hatted block, index k
        out += [
            Entry(r1, k - 1, -1, (Factor("d", k), Factor("a", k + 1))),
            Entry(r1, k, -1, (Factor("b", k), Factor("a", k + 1))),
            Entry(r2, k - 1, 1, (Factor("d", k), Factor("d", k + 1))),
            Entry(r2, k, 1, (Factor("b", k), Factor("d", k + 1))),
        ]
        k = 2 * m
        out += [
            Entry(r1, k, -1, (Factor("c", k), Factor("a", k + 1))),
            Entry(r1, k + 1, 1, (Factor("c", k), Factor("c", k + 1))),
            Entry(r2, k, -1, (Factor("b", k), Factor("a", k + 1))),
            Entry(r2, k + 1, 1, (Factor("b", k), Factor("c", k + 1))),
        ]
        m += 1
    return [e for e in out if e.row < n and e.col < n]


def families(seq: SchurSequence, n: int, swap_rho: bool = False) -> dict[str, np.ndarray]:
    """Values of the four families for indices ``0..n`` (index 0 unused)."""
    sc = seq.scalars
    a = np.zeros(n + 1, dtype=complex)
    a[1:] = seq.params[:n]
    c = np.array(sc.rho[: n + 1], dtype=complex)
    d = np.array(sc.rhohat[: n + 1], dtype=complex)
    if swap_rho:
        c, d = d, c
    return {"a": a, "b": np.conj(a), "c": c, "d": d, "1": np.ones(1, dtype=complex)}


def assemble(entries, fam: dict, n: int) -> np.ndarray:
    M = np.zeros((n, n), dtype=complex)
    for e in entries:
        f1, f2 = e.factors
        M[e.row, e.col] += e.sign * fam[f1.family][f1.index] * fam[f2.family][f2.index]
    return M


def assemble_derivative(entries, fam: dict, dfam: dict, n: int) -> np.ndarray:
    """Product-rule derivative of :func:`assemble` given family derivatives."""
    M = np.zeros((n, n), dtype=complex)
    for e in entries:
        f1, f2 = e.factors
        v1, v2 = fam[f1.family][f1.index], fam[f2.family][f2.index]
        d1 = dfam[f1.family][f1.index] if f1.family in dfam else 0
        d2 = dfam[f2.family][f2.index] if f2.family in dfam else 0
        M[e.row, e.col] += e.sign * (d1 * v2 + v1 * d2)
    return M


def dense_to_bands(M: np.ndarray, width: int = 2) -> np.ndarray:
    """``bands[k + width, i] = M[i, i + k]`` (zero outside the matrix)."""
    n = M.shape[0]
    bands = np.zeros((2 * width + 1, n), dtype=M.dtype)
    for k in range(-width, width + 1):
        diag = np.diagonal(M, k)
        if k >= 0:
            bands[k + width, : n - k] = diag
        else:
            bands[k + width, -k:] = diag
    return bands


def banded_matvec(bands: np.ndarray, x: np.ndarray) -> np.ndarray:
    width = (bands.shape[0] - 1) // 2
    n = bands.shape[1]
    x = np.asarray(x)
    if x.shape[0] != n:
        raise DimensionMismatch(f"vector of length {x.shape[0]} for order-{n} matrix")
    y = np.zeros(x.shape, dtype=np.result_type(bands, x))
    for k in range(-width, width + 1):
        row = bands[k + width]
        if k >= 0:
            y[: n - k] += (row[: n - k] * x[k:].T).T
        else:
            y[-k:] += (row[-k:] * x[: n + k].T).T
    return y


@dataclass(frozen=True, eq=False)
class CmvMatrix:
    """Order-``n`` truncation of the five-diagonal matrix (``kind`` "F" or "Fstar")."""

    n: int
    blocks: tuple
    dense: np.ndarray
    kind: str = "F"

    @cached_property
    def bands(self) -> np.ndarray:
        return dense_to_bands(self.dense)

    def matvec(self, x) -> np.ndarray:
        return banded_matvec(self.bands, x)


@dataclass(frozen=True, eq=False)
class FactorPair:
    F1: np.ndarray
    F2: np.ndarray

    @property
    def n(self) -> int:
        return self.F1.shape[0]


@dataclass(frozen=True, eq=False)
class HessenbergMatrix:
    n: int
    dense: np.ndarray


@dataclass(frozen=True, eq=False)
class SignatureMatrix:
    diag: np.ndarray

    @property
    def dense(self) -> np.ndarray:
        return np.diag(self.diag.astype(float))


def _check(seq: SchurSequence, n: int):
    if not 1 <= n <= seq.N:
        raise ValueError(f"order {n} outside 1..{seq.N}")


def _blocks(seq: SchurSequence, n: int) -> tuple:
    return tuple(theta_block(seq, k) for k in range(1, n + 1))


def build_F(seq: SchurSequence, n: int | None = None) -> CmvMatrix:
    n = seq.N if n is None else n
    _check(seq, n)
    M = assemble(five_diagonal_entries(n), families(seq, n), n)
    M.flags.writeable = False
    return CmvMatrix(n=n, blocks=_blocks(seq, n), dense=M, kind="F")


def signature(seq: SchurSequence, n: int | None = None) -> SignatureMatrix:
    n = seq.N if n is None else n
    return SignatureMatrix(np.array(seq.scalars.e[:n], dtype=int))


def build_Fstar(seq: SchurSequence, n: int | None = None, check: bool = True) -> CmvMatrix:
    """``F_{*n} = E_n F_n^T E_n``; with ``check`` it is compared against the
    transpose of F with ``rho`` and ``rhohat`` interchanged."""
    n = seq.N if n is None else n
    _check(seq, n)
    F = build_F(seq, n).dense
    e = signature(seq, n).diag
    M = (e[:, None] * F.T) * e[None, :]
    if check:
        swapped = assemble(five_diagonal_entries(n), families(seq, n, swap_rho=True), n).T
        gap = float(np.max(np.abs(swapped - M)))
        if gap > 1e-13 * max(1.0, float(np.max(np.abs(M)))):
            raise AssertionError(f"two constructions of F_* disagree by {gap:.3e}")
    M.flags.writeable = False
    return CmvMatrix(n=n, blocks=_blocks(seq, n), dense=M, kind="Fstar")


def _block_diag(blocks, first_scalar: bool, n: int) -> np.ndarray:
    M = np.zeros((n + 2, n + 2), dtype=complex)
    pos = 0
    if first_scalar:
        M[0, 0] = 1
        pos = 1
    for B in blocks:
        if pos >= n:
            break
        M[pos : pos + 2, pos : pos + 2] = B
        pos += 2
    return M[:n, :n]


def build_factors(seq: SchurSequence, n: int | None = None) -> FactorPair:
    """Truncated block-diagonal factors: ``F1 = diag(Theta_1, Theta_3, ...)``,
    ``F2 = diag(1, Theta_2, Theta_4, ...)``.

    A block cut by the truncation keeps only its leading entry.
    """
    n = seq.N if n is None else n
    _check(seq, n)
    odd = [theta_block(seq, k) for k in range(1, n + 1, 2)]
    even = [theta_block(seq, k) for k in range(2, n + 1, 2)]
    return FactorPair(F1=_block_diag(odd, False, n), F2=_block_diag(even, True, n))


def pencil(seq: SchurSequence, n: int | None = None) -> tuple[np.ndarray, np.ndarray, str]:
    """Tridiagonal pencil whose generalized eigenvalues are the zeros of ``phi_n``.

    Returns ``(A, B, vector)``: ``(F1, conj(F2), "X")`` for odd ``n`` and
    ``(F2, conj(F1), "Xstar")`` for even ``n``; ``A X = lam B X`` holds for
    the named eigenvector polynomial.
    """
    fp = build_factors(seq, n)
    if fp.n % 2 == 1:
        return fp.F1, np.conj(fp.F2), "X"
    return fp.F2, np.conj(fp.F1), "Xstar"


def build_H(seq: SchurSequence, n: int | None = None) -> HessenbergMatrix:
    """Lower Hessenberg matrix of multiplication by z in the orthonormal basis.

    Row ``i``: ``-conj(a_j) a_{i+1} prod_{k=j+1..i} rhohat_k`` for ``j < i``,
    ``-conj(a_i) a_{i+1}`` on the diagonal and ``rho_{i+1}`` above it, with
    ``a_0 = 1``.
    """
    n = seq.N if n is None else n
    _check(seq, n)
    a = seq.padded
    rh = seq.scalars.rhohat
    rho = seq.scalars.rho
    H = np.zeros((n, n), dtype=complex)
    for i in range(n):
        prod = 1.0
        for j in range(i, -1, -1):
            H[i, j] = -np.conj(a[j]) * a[i + 1] * prod
            prod *= rh[j]
        if i + 1 < n:
            H[i, i + 1] = rho[i + 1]
    H.flags.writeable = False
    return HessenbergMatrix(n=n, dense=H)


def matvec(matrix, x) -> np.ndarray:
    """Product with a five-diagonal matrix in O(n); dense fallback for other matrices."""
    if isinstance(matrix, CmvMatrix):
        return matrix.matvec(x)
    M = getattr(matrix, "dense", matrix)
    x = np.asarray(x)
    if M.shape[1] != x.shape[0]:
        raise DimensionMismatch(f"vector of length {x.shape[0]} for order-{M.shape[1]} matrix")
    return M @ x


def matrix_rows(M: np.ndarray, dense: bool = False) -> list[tuple[int, int, float, float]]:
    """``(row, col, re, im)`` rows for a matrix dump; nonzeros only unless ``dense``."""
    rows = []
    for i in range(M.shape[0]):
        for j in range(M.shape[1]):
            v = M[i, j]
            if dense or v != 0:
                rows.append((i, j, float(v.real), float(v.imag)))
    return rows
