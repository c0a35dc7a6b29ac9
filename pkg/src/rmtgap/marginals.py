"""Marginal distributions of the k-th largest eigenvalue, and their cumulants.

The distribution function is a tail-count partial sum,

    F_N(k; s) = Pr(x_k <= s) = sum_{l=0}^{k-1} E_N(l; (s, inf)),

so one gap-probability evaluation at s serves every k at once (the per-s
cache in the gap layer makes that sharing automatic).  Densities come from
exact-rational finite-difference stencils on a uniform grid.

Cumulants are computed from survival-form moment integrals, which avoid the
cancellation of integrating s^p f(s) directly:

    m1   = c0 + int_c0^hi (1 - F) ds - int_lo^c0 F ds,
    mu_p = p [ int_c^hi (s-c)^{p-1} (1-F) ds - int_lo^c (s-c)^{p-1} F ds ],

with c = m1, after widening [lo, hi] until both tail masses are negligible.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import mpmath

from .ensembles import EnsembleSpec
from .gaps import gap_distribution
from .numerics import QuadratureSpec, differentiate_grid, integrate
from .precision import PrecisionContext

__all__ = ["MarginalGrid", "CumulantSummary", "marginal_cdf", "marginal_pdf",
           "cumulants"]


@dataclass(frozen=True)
class MarginalGrid:
    """Sampled distribution of the k-th largest eigenvalue on a uniform grid.
    pdf is None when only the distribution function was requested."""

    spec: EnsembleSpec
    k: int
    s: tuple
    cdf: tuple
    pdf: Optional[tuple]
    bits: int


@dataclass(frozen=True)
class CumulantSummary:
    """Mean, standard deviation and normalized cumulant ratios
    gamma_i = kappa_{i+2} / sigma^{i+2} for i = 1..4 of the k-th largest
    eigenvalue.  Entries beyond the requested order are None."""

    spec: EnsembleSpec
    k: int
    mean: mpmath.mpf
    variance: Optional[mpmath.mpf]
    sigma: Optional[mpmath.mpf]
    gammas: Optional[tuple]
    window: tuple
    bits: int


def _check_k(spec: EnsembleSpec, k: int) -> None:
    if not 1 <= k <= spec.N:
        raise ValueError(f"k must lie in 1..{spec.N}, got {k}")


def _cdf_fn(spec: EnsembleSpec, k: int, c: PrecisionContext):
    """Memoized F(s); the cache key is the exact mpf value."""
    memo: dict = {}

    def F(s):
        key = mpmath.mpf(s)._mpf_
        v = memo.get(key)
        if v is None:
            d = gap_distribution(spec, s, c)
            with mpmath.workprec(c.bits):
                v = sum(d.probabilities[l] for l in range(k))
            memo[key] = v
        return v

    return F


def marginal_cdf(spec: EnsembleSpec, k: int, s_grid: Sequence,
                 ctx: Optional[PrecisionContext] = None) -> MarginalGrid:
    """F_N(k; s) on the given grid (any monotone sequence of points)."""
    _check_k(spec, k)
    c = ctx if ctx is not None else spec.default_context()
    with mpmath.workprec(c.bits):
        s = tuple(mpmath.mpf(v) for v in s_grid)
        F = _cdf_fn(spec, k, c)
        cdf = tuple(F(v) for v in s)
    return MarginalGrid(spec=spec, k=k, s=s, cdf=cdf, pdf=None, bits=c.bits)


def marginal_pdf(spec: EnsembleSpec, k: int, s_grid: Sequence,
                 ctx: Optional[PrecisionContext] = None,
                 order: int = 5) -> MarginalGrid:
    """F and f = dF/ds on a uniform grid; the derivative uses width-`order`
    exact-rational stencils, so the grid must be uniform.  Stray negative
    densities from stencil noise in dead tails are clamped at zero."""
    _check_k(spec, k)
    c = ctx if ctx is not None else spec.default_context()
    grid = marginal_cdf(spec, k, s_grid, c)
    with mpmath.workprec(c.bits):
        deriv = differentiate_grid(list(zip(grid.s, grid.cdf)), order=order, ctx=c)
        pdf = tuple(max(v, mpmath.mpf(0)) for _, v in deriv)
    return MarginalGrid(spec=spec, k=k, s=grid.s, cdf=grid.cdf, pdf=pdf,
                        bits=c.bits)


def _window(spec: EnsembleSpec, F, eps, c: PrecisionContext):
    """Expand [lo, hi] until F(lo) < eps and 1 - F(hi) < eps.

    The scan starts from a crude support estimate (semicircle edge for the
    Gaussian family, 4N for the Laguerre one) and moves outward in doubling
    steps; the Laguerre lower end never crosses the hard edge at 0."""
    N = spec.N
    with mpmath.workprec(c.bits):
        if spec.kind == "goe":
            edge = mpmath.sqrt(2 * mpmath.mpf(N)) + 2
            lo_bound = None
        else:
            edge = 4 * mpmath.mpf(N) + 8
            lo_bound = mpmath.mpf(0)
        hi = edge
        step = mpmath.mpf(1)
        for _ in range(200):
            if 1 - F(hi) < eps:
                break
            hi += step
            step *= 2
        else:
            raise ArithmeticError("upper window search failed")
        lo = -edge if lo_bound is None else lo_bound
        # tighten both ends toward this k's transition region; an oversized
        # window is correct but starves the quadrature of resolution
        floor = mpmath.mpf(1) / 16
        step = (hi - lo) / 4
        while step >= floor:
            cand = lo + step
            if F(cand) < eps:
                lo = cand
            else:
                step /= 2
        step = (hi - lo) / 4
        while step >= floor:
            cand = hi - step
            if 1 - F(cand) < eps:
                hi = cand
            else:
                step /= 2
        if not F(lo) < eps:
            raise ArithmeticError("lower window search failed")
        return lo, hi


def cumulants(spec: EnsembleSpec, k: int, ctx: Optional[PrecisionContext] = None,
              orders: int = 6) -> CumulantSummary:
    """Cumulants of the k-th largest eigenvalue through the given order
    (1 = mean only, 2 adds the variance, 6 adds gamma_1..gamma_4)."""
    _check_k(spec, k)
    if orders not in (1, 2, 6):
        raise ValueError(f"orders must be 1, 2 or 6, got {orders}")
    c = ctx if ctx is not None else spec.default_context()
    F = _cdf_fn(spec, k, c)
    td = c.target_digits
    qs = QuadratureSpec(scheme="gauss-legendre",
                        rel_tol=10.0 ** (-(td + 6)),
                        abs_tol=10.0 ** (-(td + 20)),
                        max_level=6, nodes=48)
    with mpmath.workprec(c.bits):
        eps = mpmath.mpf(10) ** (-(td + 14))
        lo, hi = _window(spec, F, eps, c)
        one = mpmath.mpf(1)
        # F(lo) < eps, so the survival integral over the whole window is the
        # mean up to a tail error far below tolerance
        mean = lo + integrate(lambda s: one - F(s), (lo, hi), qs, c)
        if orders == 1:
            return CumulantSummary(spec=spec, k=k, mean=mean, variance=None,
                                   sigma=None, gammas=None, window=(lo, hi),
                                   bits=c.bits)

        mu = {}
        for p in range(2, orders + 1):
            up = integrate(lambda s: (s - mean) ** (p - 1) * (one - F(s)),
                           (mean, hi), qs, c)
            down = integrate(lambda s: (s - mean) ** (p - 1) * F(s),
                             (lo, mean), qs, c)
            mu[p] = p * (up - down)
        var = mu[2]
        if var <= 0:
            raise ArithmeticError(f"nonpositive variance for {spec.label()} k={k}")
        if orders == 2:
            return CumulantSummary(spec=spec, k=k, mean=mean, variance=var,
                                   sigma=mpmath.sqrt(var), gammas=None,
                                   window=(lo, hi), bits=c.bits)
        kap = {
            3: mu[3],
            4: mu[4] - 3 * mu[2] ** 2,
            5: mu[5] - 10 * mu[3] * mu[2],
            6: mu[6] - 15 * mu[4] * mu[2] - 10 * mu[3] ** 2 + 30 * mu[2] ** 3,
        }
        sigma = mpmath.sqrt(var)
        gammas = tuple(kap[p] / sigma ** p for p in range(3, 7))
        return CumulantSummary(spec=spec, k=k, mean=mean, variance=var,
                               sigma=sigma, gammas=gammas, window=(lo, hi),
                               bits=c.bits)
