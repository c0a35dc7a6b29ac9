"""Conditioned gap probabilities E_N(k; (s, inf)) through the generating
function Xi_N(s; zeta) = sum_k zeta^k E_N(k).

Xi at one zeta is a ratio of Pfaffians, Pf A(zeta) / Pf A(1), where
A(zeta) = H0 + zeta H1 + zeta^2 H2 (bordered by the nu column for odd N).
Evaluating Xi at the (N+1)-th roots of unity and folding with the inverse
discrete Fourier transform recovers every E_N(k) at once; conjugate roots
pair up, so only floor(N/2) nontrivial Pfaffians are needed besides the
calibration point zeta = 1.

Self-diagnostics per distribution: the analytic-prefactor defect
|prefactor * Pf A(1) - 1|, the largest imaginary residue left after the
fold, and the most negative raw probability.  Any of the three exceeding
its tolerance doubles the working precision, up to the escalation budget.
"""

from __future__ import annotations

import threading
from collections import OrderedDict
from dataclasses import dataclass
from typing import Optional

import gmpy2
import mpmath
from gmpy2 import mpc, mpfr

from ._mp import context, mpc_to_mpc, mpfr_to_mpf, to_mpc, to_mpfr
from .ensembles import EnsembleSpec
from .kernels import PfaffianIngredients, assemble_ingredients
from .pfaffian import _pfaffian_ltl
from .precision import PrecisionContext

__all__ = [
    "EscalationExhausted",
    "GeneratingFunctionSample",
    "GapDistribution",
    "xi",
    "gap_distribution",
    "trace_xi_curve",
    "clear_distribution_cache",
]


class EscalationExhausted(RuntimeError):
    """Raised when the diagnostics still fail at the final precision."""

    def __init__(self, message: str, diagnostics: dict):
        super().__init__(message)
        self.diagnostics = diagnostics


@dataclass(frozen=True)
class GeneratingFunctionSample:
    """One evaluation Xi(s; zeta), normalized so Xi(s; 1) = 1."""

    spec: EnsembleSpec
    s: mpmath.mpf
    zeta: mpmath.mpc
    value: mpmath.mpc
    bits: int
    normalization_defect: mpmath.mpf


@dataclass(frozen=True)
class GapDistribution:
    """All conditioned probabilities at one conditioning point.

    probabilities[k] = E_N(k; (s, inf)) for k = 0..N, clamped at zero.
    residual is |sum_k E_k - 1| as folded (identically tiny by construction
    since Xi(1) = 1 enters the fold); normalization_defect, imag_residue and
    min_signed are the diagnostics that actually gate escalation.
    """

    spec: EnsembleSpec
    s: mpmath.mpf
    probabilities: tuple
    residual: mpmath.mpf
    normalization_defect: mpmath.mpf
    imag_residue: mpmath.mpf
    min_signed: mpmath.mpf
    bits: int
    escalations: int

    def probability(self, k: int) -> mpmath.mpf:
        if not 0 <= k <= self.spec.N:
            raise ValueError(f"k must lie in 0..{self.spec.N}, got {k}")
        return self.probabilities[k]


def _combined_matrix(ing: PfaffianIngredients, z: mpc) -> list:
    """0-indexed A(zeta); (N+1) x (N+1) with the nu border for odd N."""
    N = ing.spec.N
    H0, H1, H2 = ing.H0, ing.H1, ing.H2
    z2 = z * z
    M = [[mpc(H0[j][k]) + z * H1[j][k] + z2 * H2[j][k]
          for k in range(1, N + 1)] for j in range(1, N + 1)]
    if ing.parity == "odd":
        nu = ing.nu_at(z)
        for j in range(N):
            M[j].append(nu[j + 1])
        M.append([-nu[j] for j in range(1, N + 1)] + [mpc(0)])
    return M


def _pf_at(ing: PfaffianIngredients, z: mpc) -> mpc:
    return _pfaffian_ltl(_combined_matrix(ing, z))


def xi(spec: EnsembleSpec, s, zeta, ctx: Optional[PrecisionContext] = None,
       route: str = "recurrence") -> GeneratingFunctionSample:
    """Xi(s; zeta) as Pf A(zeta) / Pf A(1)."""
    c = ctx if ctx is not None else spec.default_context()
    with context(c.bits):
        ing = assemble_ingredients(spec, s, 1, c, route)
        z = to_mpc(zeta, c.bits)
        pf1 = _pf_at(ing, mpc(1))
        if pf1 == 0:
            raise ArithmeticError(f"calibration Pfaffian vanished at s={s}")
        defect = abs(ing.prefactor * pf1 - 1)
        val = _pf_at(ing, z) / pf1
        return GeneratingFunctionSample(
            spec=spec, s=ing.s, zeta=mpc_to_mpc(z), value=mpc_to_mpc(val),
            bits=c.bits, normalization_defect=mpfr_to_mpf(defect))


def _fold(spec: EnsembleSpec, ing: PfaffianIngredients, bits: int):
    """Evaluate Xi at the nontrivial roots of unity and fold to E_N(k)."""
    N = spec.N
    m = N + 1
    pf1 = _pf_at(ing, mpc(1))
    if pf1 == 0:
        raise ArithmeticError(f"calibration Pfaffian vanished at s={ing.s}")
    defect = abs(ing.prefactor * pf1 - 1)
    # root-of-unity table omega^r, r = 0..N
    two_pi = 2 * gmpy2.const_pi()
    omega = [mpc(gmpy2.cos(two_pi * r / m), gmpy2.sin(two_pi * r / m))
             for r in range(m)]
    half = N // 2 if N % 2 == 0 else (N - 1) // 2
    vals = [_pf_at(ing, omega[l]) / pf1 for l in range(1, half + 1)]
    val_minus1 = _pf_at(ing, mpc(-1)) / pf1 if N % 2 == 1 else None
    E = []
    for k in range(m):
        acc = mpc(1)
        for l in range(1, half + 1):
            w = omega[(-k * l) % m]
            acc += 2 * (w * vals[l - 1]).real
        if val_minus1 is not None:
            acc += (-1) ** k * val_minus1
        E.append(acc / m)
    return E, defect


def _attempt(spec: EnsembleSpec, s, bits: int, target_digits: int, route: str):
    c = PrecisionContext(bits=bits, target_digits=target_digits)
    with context(bits):
        ing = assemble_ingredients(spec, s, 1, c, route)
        E, defect = _fold(spec, ing, bits)
        imag = max(abs(v.imag) for v in E)
        re = [v.real for v in E]
        min_signed = min(re)
        residual = abs(sum(re) - 1)
        return ing.s, re, defect, imag, min_signed, residual


_DIST_CACHE: "OrderedDict[tuple, GapDistribution]" = OrderedDict()
_DIST_LOCK = threading.Lock()
_DIST_CAP = 60000


def clear_distribution_cache() -> None:
    with _DIST_LOCK:
        _DIST_CACHE.clear()


def _cache_key(spec, s, c: PrecisionContext, route: str):
    v = to_mpfr(s, c.bits)
    sk = (0, 0) if v == 0 else tuple(int(t) for t in v.as_mantissa_exp())
    return (spec, sk, c.bits, c.target_digits, c.max_escalations, route)


def gap_distribution(spec: EnsembleSpec, s, ctx: Optional[PrecisionContext] = None,
                     route: str = "recurrence") -> GapDistribution:
    """All E_N(k; (s, inf)) for k = 0..N, with escalation on failed
    diagnostics and per-call caching."""
    c = ctx if ctx is not None else spec.default_context()
    key = _cache_key(spec, s, c, route)
    with _DIST_LOCK:
        hit = _DIST_CACHE.get(key)
        if hit is not None:
            _DIST_CACHE.move_to_end(key)
            return hit

    td = c.target_digits
    bits = c.bits
    escalations = 0
    while True:
        s_pub, re, defect, imag, min_signed, residual = _attempt(
            spec, s, bits, td, route)
        with context(bits):
            gate_defect = gmpy2.exp10(-(td + 2))
            gate = gmpy2.exp10(-td)
            ok = (defect <= gate_defect and imag <= gate and min_signed >= -gate)
        if ok:
            break
        if escalations >= c.max_escalations:
            diag = {
                "spec": spec.label(), "s": str(s), "bits": bits,
                "normalization_defect": float(defect),
                "imag_residue": float(imag),
                "min_signed": float(min_signed),
            }
            raise EscalationExhausted(
                f"diagnostics failed at {bits} bits after {escalations} "
                f"escalations for {spec.label()} at s={s}", diag)
        bits *= 2
        escalations += 1

    with context(bits):
        probs = tuple(mpfr_to_mpf(v if v > 0 else mpfr(0)) for v in re)
        dist = GapDistribution(
            spec=spec, s=s_pub, probabilities=probs,
            residual=mpfr_to_mpf(residual),
            normalization_defect=mpfr_to_mpf(defect),
            imag_residue=mpfr_to_mpf(imag),
            min_signed=mpfr_to_mpf(min_signed),
            bits=bits, escalations=escalations)

    with _DIST_LOCK:
        _DIST_CACHE[key] = dist
        while len(_DIST_CACHE) > _DIST_CAP:
            _DIST_CACHE.popitem(last=False)
    return dist


def trace_xi_curve(spec: EnsembleSpec, zeta, s_from, s_to, steps: int,
                   ctx: Optional[PrecisionContext] = None) -> list:
    """Xi(s; zeta) sampled on a uniform s grid from s_from to s_to.

    Tracks the continuity of the generating function along a path in s at a
    fixed root of unity; callers typically plot value and value^2 in the
    complex plane."""
    if steps < 2:
        raise ValueError("steps must be >= 2")
    c = ctx if ctx is not None else spec.default_context()
    with mpmath.workprec(c.bits):
        lo = mpmath.mpf(s_from)
        hi = mpmath.mpf(s_to)
        h = (hi - lo) / (steps - 1)
        grid = [lo + i * h for i in range(steps)]
    return [xi(spec, si, zeta, c) for si in grid]
