"""Validated Schur parameter sequences and the scalars derived from them.

Parameters are indexed from 1 (``a_1 .. a_N``); the value ``a_0 = 1`` is a
convention and is never stored in :attr:`SchurSequence.params`.  Every array
of derived scalars is indexed by ``n = 0 .. N`` with the ``n = 0`` slot
holding the conventional value (``rho_0 = kappa_0 = e_0 = 1``).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ModeViolation, ParameterFileError, UnitModulusParameter

# |a_k| within this distance of 1 is treated as lying on the circle.
UNIT_CIRCLE_TOL = 1e-12

MODES = ("positive", "quasi", "auto")


@dataclass(frozen=True)
class DerivedScalars:
    rho: np.ndarray
    eps: np.ndarray
    rhohat: np.ndarray
    kappa: np.ndarray
    e: np.ndarray

    @property
    def N(self) -> int:
        return len(self.rho) - 1


@dataclass(frozen=True, eq=False)
class SchurSequence:
    """Schur parameters ``a_1 .. a_N`` with their definiteness flag.

    Instances are immutable; use :func:`validate` to build one.
    """

    params: np.ndarray
    definiteness: str

    def __post_init__(self):
        self.params.flags.writeable = False

    def __len__(self) -> int:
        return len(self.params)

    def __repr__(self) -> str:
        return f"SchurSequence({list(self.params)!r}, definiteness={self.definiteness!r})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, SchurSequence):
            return NotImplemented
        return self.definiteness == other.definiteness and np.array_equal(
            self.params, other.params
        )

    __hash__ = None

    @property
    def N(self) -> int:
        return len(self.params)

    def a(self, k: int) -> complex:
        """Parameter ``a_k`` (1-based); ``a(0)`` returns the convention 1."""
        if k == 0:
            return 1.0 + 0j
        if not 1 <= k <= self.N:
            raise IndexError(f"a_{k} outside 1..{self.N}")
        return complex(self.params[k - 1])

    @cached_property
    def padded(self) -> np.ndarray:
        """``[a_0, a_1, ..., a_N]`` with ``a_0 = 1``."""
        return np.concatenate([[1.0 + 0j], self.params])

    @cached_property
    def scalars(self) -> DerivedScalars:
        return _compute_scalars(self.params)

    def truncated(self, n: int) -> "SchurSequence":
        if not 1 <= n <= self.N:
            raise ValueError(f"cannot truncate a length-{self.N} sequence to {n}")
        return validate(self.params[:n], mode=_mode_for(self.params[:n], self.definiteness))

    def replaced(self, k: int, value: complex) -> "SchurSequence":
        """Copy with ``a_k`` replaced by ``value`` (revalidated)."""
        new = np.array(self.params, dtype=complex)
        new[k - 1] = value
        return validate(new, mode=_mode_for(new, self.definiteness))

    def rotated(self, t: float, k: int | None = None) -> "SchurSequence":
        """Rotate ``a_k`` (or every parameter when ``k`` is None) by ``e^{it}``."""
        new = np.array(self.params, dtype=complex)
        if k is None:
            new = new * np.exp(1j * t)
        else:
            new[k - 1] = new[k - 1] * np.exp(1j * t)
        return validate(new, mode=_mode_for(new, self.definiteness))

    def to_json(self) -> dict:
        return {
            "mode": self.definiteness,
            "params": [[float(p.real), float(p.imag)] for p in self.params],
        }


def _mode_for(params, definiteness: str) -> str:
    # keep "positive" only while it is still true
    if definiteness == "positive" and np.all(np.abs(params) < 1):
        return "positive"
    return "quasi" if definiteness == "quasi" else "auto"


def _compute_scalars(params: np.ndarray) -> DerivedScalars:
    N = len(params)
    mod2 = np.abs(params) ** 2
    rho = np.ones(N + 1)
    rho[1:] = np.sqrt(np.abs(1.0 - mod2))
    eps = np.ones(N + 1, dtype=int)
    eps[1:] = np.where(mod2 < 1.0, 1, -1)
    rhohat = eps * rho
    kappa = np.ones(N + 1)
    e = np.ones(N + 1, dtype=int)
    for n in range(1, N + 1):
        kappa[n] = kappa[n - 1] / rho[n]
        e[n] = e[n - 1] * eps[n]
    for arr in (rho, eps, rhohat, kappa, e):
        arr.flags.writeable = False
    return DerivedScalars(rho=rho, eps=eps, rhohat=rhohat, kappa=kappa, e=e)


def validate(raw: Iterable[complex], mode: str = "auto") -> SchurSequence:
    """Validate raw parameters ``a_1 .. a_N`` and build a :class:`SchurSequence`.

    ``mode="auto"`` flags the sequence positive definite iff every
    ``|a_k| < 1``.  Raises :class:`UnitModulusParameter` for parameters within
    ``UNIT_CIRCLE_TOL`` of the unit circle and :class:`ModeViolation` when
    ``mode="positive"`` is requested for a parameter outside the disk.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    params = np.array([complex(x) for x in raw], dtype=complex)
    if params.ndim != 1 or len(params) == 0:
        raise ValueError("a Schur sequence needs at least one parameter")
    if not np.all(np.isfinite(params)):
        raise ValueError("Schur parameters must be finite")
    mods = np.abs(params)
    for k, (m, p) in enumerate(zip(mods, params), start=1):
        if abs(m - 1.0) <= UNIT_CIRCLE_TOL:
            raise UnitModulusParameter(k, complex(p))
    inside = bool(np.all(mods < 1.0))
    if mode == "positive" and not inside:
        k = int(np.argmax(mods >= 1.0)) + 1
        raise ModeViolation(f"positive mode requires |a_k| < 1, but |a_{k}| = {mods[k - 1]!r}")
    if mode == "auto":
        mode = "positive" if inside else "quasi"
    return SchurSequence(params=params, definiteness=mode)


def derived(seq: SchurSequence) -> DerivedScalars:
    """Return the cached ``rho, eps, rhohat, kappa, e`` families of ``seq``."""
    return seq.scalars


# -- generators ---------------------------------------------------------------


def constant(a: complex, N: int, mode: str = "auto") -> SchurSequence:
    return validate([a] * N, mode=mode)


def random_params(
    rng: np.random.Generator, N: int, bands: Sequence[tuple[float, float]]
) -> np.ndarray:
    """Draw ``N`` complex values with uniform phase and modulus uniform in one
    of the ``bands`` (chosen uniformly per parameter).

    Moduli within ``UNIT_CIRCLE_TOL`` of 1 are redrawn.
    """
    out = np.empty(N, dtype=complex)
    for k in range(N):
        while True:
            lo, hi = bands[rng.integers(len(bands))]
            r = rng.uniform(lo, hi)
            if abs(r - 1.0) > UNIT_CIRCLE_TOL:
                break
        out[k] = r * np.exp(1j * rng.uniform(0.0, 2.0 * math.pi))
    return out


def disk_random(r_min: float, r_max: float, seed: int, N: int, mode: str = "auto") -> SchurSequence:
    if not 0 <= r_min <= r_max:
        raise ValueError("need 0 <= r_min <= r_max")
    if mode == "positive" and r_max >= 1:
        raise ModeViolation("positive mode requires r_max < 1")
    rng = np.random.default_rng(seed)
    return validate(random_params(rng, N, [(r_min, r_max)]), mode=mode)


def generate(kind: dict, N: int) -> SchurSequence:
    """Build a sequence from a generator description.

    ``kind`` is one of ``{"constant": a}``,
    ``{"disk_random": (r_min, r_max, seed)}`` or ``{"from_file": path}``.
    A file sequence longer than ``N`` is truncated; a shorter one is an error.
    """
    if len(kind) != 1:
        raise ValueError("generator spec must have exactly one key")
    (name, arg), = kind.items()
    if name == "constant":
        return constant(arg, N)
    if name == "disk_random":
        r_min, r_max, seed = arg
        return disk_random(r_min, r_max, seed, N)
    if name == "from_file":
        seq = load_json(arg)
        if seq.N < N:
            raise ValueError(f"{arg}: file holds {seq.N} parameters, {N} requested")
        return seq if seq.N == N else seq.truncated(N)
    raise ValueError(f"unknown generator {name!r}")


# -- JSON parameter files ------------------------------------------------------


def dump_json(seq: SchurSequence) -> str:
    # json emits repr(float), which round-trips doubles exactly
    return json.dumps(seq.to_json(), indent=2)


def save_json(seq: SchurSequence, path) -> None:
    Path(path).write_text(dump_json(seq) + "\n")


def _line_of_entry(text: str, index: int) -> int | None:
    """Best-effort line number of the ``index``-th element of "params"."""
    start = text.find('"params"')
    if start < 0:
        return None
    pos = text.find("[", start) + 1
    depth = 0
    count = -1
    for i in range(pos, len(text)):
        ch = text[i]
        if ch == "[":
            if depth == 0:
                count += 1
                if count == index:
                    return text.count("\n", 0, i) + 1
            depth += 1
        elif ch == "]":
            if depth == 0:
                return None
            depth -= 1
    return None


def loads_json(text: str, path="<string>") -> SchurSequence:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParameterFileError(path, exc.msg, line=exc.lineno) from exc
    if not isinstance(doc, dict) or "params" not in doc:
        raise ParameterFileError(path, 'expected an object with a "params" key', line=1)
    mode = doc.get("mode", "auto")
    if mode not in MODES:
        raise ParameterFileError(path, f"unknown mode {mode!r}", line=_find_line(text, '"mode"'))
    raw = doc["params"]
    if not isinstance(raw, list) or not raw:
        raise ParameterFileError(path, '"params" must be a non-empty list', line=_find_line(text, '"params"'))
    values = []
    for i, item in enumerate(raw):
        ok = (
            isinstance(item, list)
            and len(item) == 2
            and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in item)
        )
        if not ok:
            raise ParameterFileError(
                path, f"params[{i}] must be a [re, im] pair of numbers, got {item!r}",
                line=_line_of_entry(text, i),
            )
        values.append(complex(float(item[0]), float(item[1])))
    try:
        return validate(values, mode=mode)
    except (UnitModulusParameter, ModeViolation, ValueError) as exc:
        line = _line_of_entry(text, exc.k - 1) if isinstance(exc, UnitModulusParameter) else None
        raise ParameterFileError(path, str(exc), line=line) from exc


def _find_line(text: str, needle: str) -> int | None:
    i = text.find(needle)
    return None if i < 0 else text.count("\n", 0, i) + 1


def load_json(path) -> SchurSequence:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ParameterFileError(path, exc.strerror or str(exc)) from exc
    return loads_json(text, path=p)
