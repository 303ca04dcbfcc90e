"""Invariant suites run by ``cmvzeros verify``.

Each suite draws random Schur sequences, evaluates one family of identities and
reports the largest residual against its tolerance.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import geronimus as ger
from .cmv import build_F, build_Fstar, build_factors, build_H, signature
from .errors import MultipleZero, PathAmbiguity
from .laurent import five_term_residual, theta_block, theta_relations_residual
from .perturb import PerturbationSpec, derivative
from .poly import kernel, recurrence_residuals, szego_sequences
from .schur import SchurSequence, constant, random_params, validate
from .spectra import (
    charpoly_eval,
    gershgorin_annulus,
    matching_distance,
    matching_tolerance,
    product_law_holds,
    zeros,
)

POSITIVE_BANDS = [(0.1, 0.9)]
QUASI_BANDS = [(0.1, 0.9), (1.1, 2.0)]


@dataclass
class SuiteResult:
    name: str
    tolerance: float
    max_residual: float = 0.0
    checks: int = 0
    failures: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures and self.max_residual <= self.tolerance

    def record(self, value: float, label: str = "") -> None:
        value = float(value)
        self.checks += 1
        if not math.isfinite(value):
            self.failures.append(f"{label}: non-finite residual")
            return
        self.max_residual = max(self.max_residual, value)
        if value > self.tolerance and len(self.failures) < 10:
            self.failures.append(f"{label}: {value:.3e}")

    def to_json(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        return d


def random_sequences(rng: np.random.Generator, trials: int, max_n: int, quasi: bool) -> list[SchurSequence]:
    out = []
    for i in range(trials):
        n = int(rng.integers(1, max_n + 1))
        bands = QUASI_BANDS if quasi and i % 2 == 1 else POSITIVE_BANDS
        out.append(validate(random_params(rng, n, bands)))
    return out


def _points(rng, m=64):
    return rng.normal(size=m) + 1j * rng.normal(size=m)


def suite_recurrences(seqs, rng) -> SuiteResult:
    r = SuiteResult("recurrences", 1e-10)
    for i, s in enumerate(seqs):
        z = _points(rng)
        n = s.N
        for key, v in recurrence_residuals(s, n, z).items():
            r.record(v, f"seq {i} {key}")
        for key, v in theta_relations_residual(s, n, z).items():
            r.record(v, f"seq {i} {key}")
        if n >= 2:
            for key, v in five_term_residual(s, n, z).items():
                r.record(v, f"seq {i} five_term_{key}")
        y = _points(rng)
        k_sum = kernel(s, n, z, y, "sum")
        k_cd = kernel(s, n, z, y, "csd")
        r.record(np.max(np.abs(k_sum - k_cd) / (1 + np.abs(k_sum))), f"seq {i} kernel")
        # confluent branch: y just off 1/conj(z)
        yc = (1 + 1e-10) / np.conj(z)
        k_sum = kernel(s, n, z, yc, "sum")
        k_cd = kernel(s, n, z, yc, "csd")
        r.record(np.max(np.abs(k_sum - k_cd) / (1 + np.abs(k_sum))), f"seq {i} kernel_confluent")
    return r


def suite_charpoly(seqs, rng) -> SuiteResult:
    r = SuiteResult("charpoly", 1e-8)
    for i, s in enumerate(seqs):
        pair = szego_sequences(s, s.N)
        for n in range(1, s.N + 1):
            z = _points(rng, 16)
            d = charpoly_eval(build_F(s, n), z)
            p = pair.phi[n](z)
            r.record(np.max(np.abs(d - p) / (1 + np.abs(p))), f"seq {i} n {n}")
    return r


def suite_factorization(seqs, rng) -> SuiteResult:
    r = SuiteResult("factorization", 1e-12)
    for i, s in enumerate(seqs):
        for n in range(1, s.N + 1):
            F = build_F(s, n).dense
            fp = build_factors(s, n)
            Fs = build_Fstar(s, n).dense
            r.record(np.max(np.abs(F - fp.F2 @ fp.F1)), f"seq {i} n {n} F")
            r.record(np.max(np.abs(Fs - fp.F1 @ fp.F2)), f"seq {i} n {n} Fstar")
            E = signature(s, n).dense
            r.record(np.max(np.abs(E @ E - np.eye(n))), f"seq {i} n {n} E^2")
            i_idx, j_idx = np.nonzero(F)
            r.record(0.0 if np.all(np.abs(i_idx - j_idx) <= 2) else math.inf, f"seq {i} n {n} band")
            trunc = fp.F1 if n % 2 == 0 else fp.F2
            r.record(np.max(np.abs(trunc @ np.conj(trunc) - np.eye(n))), f"seq {i} n {n} trunc")
            H = build_H(s, n).dense
            sup = np.diagonal(H, 1)
            r.record(np.max(np.abs(sup - s.scalars.rho[1:n])) if n > 1 else 0.0, f"seq {i} n {n} H super")
            T = theta_block(s, n)
            r.record(np.max(np.abs(T @ np.conj(T) - np.eye(2))), f"seq {i} theta {n}")
        if s.definiteness == "positive" and s.N >= 3:
            for n in range(1, s.N - 1):
                F = build_F(s, n + 2).dense
                G = F @ F.conj().T
                r.record(np.max(np.abs(G[:n, :n] - np.eye(n))), f"seq {i} unitary rows {n}")
    return r


def suite_spectra(seqs, rng) -> tuple[SuiteResult, SuiteResult, SuiteResult]:
    agree = SuiteResult("backend_agreement", 1.0)  # residual = distance / tolerance
    eig = SuiteResult("eigenvector", 1e-8)
    bounds = SuiteResult("zero_bounds", 0.0)  # residual = count of violations
    for i, s in enumerate(seqs):
        for n in range(1, s.N + 1):
            res = [zeros(s, n, b) for b in ("cmv_eig", "hessenberg_eig", "companion")]
            base = res[0].eigenvalues
            tol = matching_tolerance(base, max_abs_param=float(np.max(np.abs(s.params[:n]))))
            for other in res[1:]:
                agree.record(matching_distance(base, other.eigenvalues) / tol, f"seq {i} n {n} {other.backend}")
            for lam, m, v in zip(res[0].refined, res[0].multiplicity, res[0].residuals):
                if m == 1:
                    eig.record(v, f"seq {i} n {n} lam {lam:.6g}")
            mods = np.abs(s.params[:n])
            ann = gershgorin_annulus(float(mods.min()), float(mods.max()))
            bounds.record(float(np.sum(~ann.contains(base))), f"seq {i} n {n} annulus")
            if s.definiteness == "positive":
                bounds.record(0.0 if product_law_holds(s, n, base) else 1.0, f"seq {i} n {n} product law")
    return agree, eig, bounds


def suite_perturb(seqs, rng, per_seq: int = 2) -> SuiteResult:
    r = SuiteResult("perturbation", 1e-5)
    for i, s in enumerate(seqs):
        n = s.N
        specs = [
            PerturbationSpec("rotate_all", s, n, float(rng.uniform(0, 2 * math.pi))),
            PerturbationSpec("rotate_one", s, n, float(rng.uniform(0, 2 * math.pi)), int(rng.integers(1, n + 1))),
        ]
        if n >= 2:
            t = complex(rng.normal(), rng.normal()) * 0.4
            specs.append(PerturbationSpec("extend_last", s.truncated(n - 1), n, t))
        for spec in specs:
            w = np.linalg.eigvals(spec.matrix())
            for lam in w[rng.permutation(len(w))[:per_seq]]:
                if abs(lam) < 1e-8:
                    continue
                try:
                    rep = derivative(spec, lam)
                except (MultipleZero, PathAmbiguity):
                    continue
                r.record(rep.rel_err, f"seq {i} {spec.kind} lam {lam:.6g}")
    return r


def suite_geronimus(a: complex, n_max: int = 30) -> SuiteResult:
    r = SuiteResult(f"geronimus[{a}]", 1e-8)
    ctx = ger.context(a)
    rng = np.random.default_rng(0)
    z = np.concatenate([_points(rng, 16), np.exp(2j * math.pi * rng.random(16))])
    from .poly import szego_values

    for n in range(0, n_max + 1):
        p, ps = ger.closed_form_phi(ctx, n, z)
        v = szego_values(constant(a, max(n, 1)), n, z)
        r.record(np.max(np.abs(p - v.phi[n]) / (1 + np.abs(v.phi[n]))), f"closed form phi n {n}")
        r.record(np.max(np.abs(ps - v.phistar[n]) / (1 + np.abs(v.phistar[n]))), f"closed form phi* n {n}")
    from .poly import kernel_on_inverse_conjugate

    for n in range(1, n_max + 1):
        s = constant(a, n)
        sp = zeros(s, n)
        for lam in sp.refined:
            r.record(abs(ger.zero_equation_residual(ctx, n, lam)), f"zero equation n {n}")
            if min(abs(lam - ctx.z_plus), abs(lam - ctx.z_minus)) > 1e-6:
                direct = kernel_on_inverse_conjugate(s, n, lam).direct_sum
                kc = ger.kernel_closed_form(ctx, n, lam)
                r.record(abs(kc - direct) / max(1.0, abs(direct)), f"kernel n {n}")
    if ctx.gap > 0:
        n_star = ger.simplicity_threshold(ctx)
        for n in range(n_star, n_star + 11):
            r.record(0.0 if zeros(constant(a, n), n).all_simple else math.inf, f"simple n {n}")
    return r


def run_all(seed: int = 0, trials: int = 20, quasi: bool = False, max_n: int = 16,
            geronimus_values=(), perturb: bool = True) -> dict:
    rng = np.random.default_rng(seed)
    seqs = random_sequences(rng, trials, max_n, quasi)
    suites = [suite_recurrences(seqs, rng), suite_charpoly(seqs, rng), suite_factorization(seqs, rng)]
    suites.extend(suite_spectra(seqs, rng))
    if perturb:
        suites.append(suite_perturb(seqs, rng))
    for a in geronimus_values:
        suites.append(suite_geronimus(a))
    return {
        "seed": seed,
        "trials": trials,
        "quasi": quasi,
        "max_n": max_n,
        "passed": all(s.passed for s in suites),
        "suites": [s.to_json() for s in suites],
    }
