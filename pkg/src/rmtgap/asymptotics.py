"""Counting-statistic summaries and large-N comparison quantities:
variance expansions, local central limit checks, zero-count large
deviations, Marchenko-Pastur functionals, bulk scaling probes and
mean/zero interlacing reports.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import mpmath

from .ensembles import EnsembleSpec
from .gaps import gap_distribution, xi
from .marginals import cumulants, marginal_pdf
from .numerics import QuadratureSpec, find_root, integrate, orthopoly_zeros
from .precision import PrecisionContext, default_bits

__all__ = [
    "CountingStats",
    "LocalCltRow",
    "LargeDevExpansion",
    "MPLaw",
    "BulkProbe",
    "BulkLawLoe",
    "InterlacingReport",
    "counting_stats",
    "variance_ansatz_fit",
    "gue_variance_expansion",
    "local_clt_table",
    "large_deviation_check",
    "mp_density",
    "mp_tail_mass",
    "mp_quantile",
    "bulk_probe_goe",
    "bulk_law_loe",
    "interlacing_report",
]


# ----------------------------------------------------------------------
# counting statistics

@dataclass(frozen=True)
class CountingStats:
    """Mean and variance of the number of eigenvalues above s."""

    spec: EnsembleSpec
    s: mpmath.mpf
    mean: mpmath.mpf
    variance: mpmath.mpf
    bits: int


def counting_stats(spec: EnsembleSpec, s,
                   ctx: Optional[PrecisionContext] = None) -> CountingStats:
    c = ctx if ctx is not None else spec.default_context()
    d = gap_distribution(spec, s, c)
    with mpmath.workprec(d.bits):
        mean = sum(k * p for k, p in enumerate(d.probabilities))
        var = sum((k - mean) ** 2 * p for k, p in enumerate(d.probabilities))
    return CountingStats(spec=spec, s=d.s, mean=mean, variance=var, bits=d.bits)


def variance_ansatz_fit(rows: Sequence[tuple],
                        ctx: Optional[PrecisionContext] = None) -> tuple:
    """Fit pi^2 Var - log N = c1 + c2 log N / N + c3 / N through three rows
    (N, Var).  Given more than three rows, the first, middle and last are
    used; the system is solved exactly, not least-squares."""
    if len(rows) < 3:
        raise ValueError("need at least three (N, variance) rows")
    if len(rows) > 3:
        rows = [rows[0], rows[len(rows) // 2], rows[-1]]
    c = ctx if ctx is not None else PrecisionContext()
    with mpmath.workprec(c.bits):
        A = mpmath.matrix(3, 3)
        b = mpmath.matrix(3, 1)
        for i, (N, var) in enumerate(rows):
            lg = mpmath.log(mpmath.mpf(N))
            A[i, 0] = mpmath.mpf(1)
            A[i, 1] = lg / N
            A[i, 2] = mpmath.mpf(1) / N
            b[i] = mpmath.pi ** 2 * mpmath.mpf(var) - lg
        x = mpmath.lu_solve(A, b)
        return (x[0], x[1], x[2])


def gue_variance_expansion(N: int, ctx: Optional[PrecisionContext] = None) -> mpmath.mpf:
    """Five-term large-N expansion of the GUE positive-eigenvalue count
    variance (N even in its derivation)."""
    c = ctx if ctx is not None else PrecisionContext()
    with mpmath.workprec(c.bits):
        n = mpmath.mpf(N)
        L = mpmath.log(4 * n) + mpmath.euler
        pi2 = mpmath.pi ** 2
        return ((L + 1) / (2 * pi2)
                - L / (4 * pi2 * n)
                + mpmath.mpf(7) / (96 * pi2 * n ** 2)
                + (24 * L - 41) / (192 * pi2 * n ** 3)
                - mpmath.mpf(219) / (5120 * pi2 * n ** 4))


# ----------------------------------------------------------------------
# local central limit comparison

@dataclass(frozen=True)
class LocalCltRow:
    """One offset k: exact point probability against the Gaussian density
    at the matching point, using the computed mean and variance."""

    k: int
    p_exact: mpmath.mpf
    p_approx: mpmath.mpf
    delta: mpmath.mpf


def local_clt_table(spec: EnsembleSpec, s, ks: Sequence[int],
                    ctx: Optional[PrecisionContext] = None) -> list:
    """Compare Pr(count - floor(mean) = k) with the normal density
    phi_Var(floor(mean) + k - mean) for each requested offset k.

    When the mean is an exact half-integer count (the symmetric Gaussian
    case at s = 0 with N even), floor(mean) equals the mean and this
    reduces to the textbook local CLT comparison."""
    c = ctx if ctx is not None else spec.default_context()
    st = counting_stats(spec, s, c)
    with mpmath.workprec(st.bits):
        # nudge guards the floor against a mean that is integer up to noise
        anchor = int(mpmath.floor(st.mean + mpmath.mpf(10) ** (-c.target_digits)))
        d = gap_distribution(spec, s, c)
        rows = []
        for k in ks:
            idx = anchor + k
            if not 0 <= idx <= spec.N:
                raise ValueError(f"offset {k} leaves the support (count {idx})")
            p_exact = d.probabilities[idx]
            z = anchor + k - st.mean
            p_approx = mpmath.e ** (-z * z / (2 * st.variance)) / mpmath.sqrt(
                2 * mpmath.pi * st.variance)
            rows.append(LocalCltRow(k=k, p_exact=p_exact, p_approx=p_approx,
                                    delta=p_exact - p_approx))
        return rows


# ----------------------------------------------------------------------
# zero-count large deviation

@dataclass(frozen=True)
class LargeDevExpansion:
    """log of the no-positive-eigenvalue probability for the symmetric
    Gaussian family against its quartic-coefficient expansion."""

    N: int
    log_exact: mpmath.mpf
    log_predicted: mpmath.mpf
    delta: mpmath.mpf
    bits: int


def _large_dev_predicted(N: int) -> mpmath.mpf:
    n = mpmath.mpf(N)
    l3 = mpmath.log(mpmath.mpf(3))
    lr = mpmath.log(1 + 2 / mpmath.sqrt(mpmath.mpf(3)))
    c1 = -l3 / 4
    c2 = -lr / 2
    c3 = -mpmath.mpf(1) / 24
    c4 = (-mpmath.log(mpmath.mpf(2)) / 12 - l3 / 16 + lr / 4
          + mpmath.zeta(-1, derivative=1) / 2)
    return c1 * n ** 2 + c2 * n + c3 * mpmath.log(n) + c4


def large_deviation_check(N: int, ctx: Optional[PrecisionContext] = None) -> LargeDevExpansion:
    """log E_N(0; (0, inf)) for the Gaussian family, exactly via the
    generating function at zeta = 0, against the asymptotic expansion.

    The probability shrinks like exp(-N^2 log 3 / 4), so the working
    precision is raised in proportion to the predicted magnitude."""
    spec = EnsembleSpec.goe(N)
    base = ctx if ctx is not None else spec.default_context()
    with mpmath.workprec(max(base.bits, 128)):
        predicted = _large_dev_predicted(N)
        extra = int(-predicted / mpmath.log(2) * mpmath.mpf("1.2")) + 64
    c = base.with_bits(max(base.bits, default_bits(N) + max(extra, 0)))
    sample = xi(spec, 0, 0, c)
    with mpmath.workprec(c.bits):
        val = sample.value.real
        if not val > 0:
            raise ArithmeticError(f"nonpositive zero-count probability at N={N}")
        log_exact = mpmath.log(val)
        predicted = _large_dev_predicted(N)
        return LargeDevExpansion(N=N, log_exact=log_exact,
                                 log_predicted=predicted,
                                 delta=log_exact - predicted, bits=c.bits)


# ----------------------------------------------------------------------
# Marchenko-Pastur law

@dataclass(frozen=True)
class MPLaw:
    """Limiting density of Wishart eigenvalues over N, aspect c = N/n."""

    c: Fraction

    def __post_init__(self):
        if not 0 < self.c <= 1:
            raise ValueError(f"aspect must lie in (0, 1], got {self.c}")

    def _cf(self, bits):
        with mpmath.workprec(bits):
            cc = mpmath.mpf(self.c.numerator) / self.c.denominator
            r = mpmath.sqrt(cc)
            return cc, (1 - r) ** 2, (1 + r) ** 2

    def density(self, x, ctx: Optional[PrecisionContext] = None) -> mpmath.mpf:
        c = ctx if ctx is not None else PrecisionContext()
        cc, lo, hi = self._cf(c.bits)
        with mpmath.workprec(c.bits):
            xv = mpmath.mpf(x)
            if not lo < xv < hi:
                return mpmath.mpf(0)
            return mpmath.sqrt((hi - xv) * (xv - lo)) / (2 * mpmath.pi * cc * xv)

    def tail_mass(self, s, ctx: Optional[PrecisionContext] = None) -> mpmath.mpf:
        """Integral of the density from s to the upper edge."""
        c = ctx if ctx is not None else PrecisionContext()
        cc, lo, hi = self._cf(c.bits)
        with mpmath.workprec(c.bits):
            sv = mpmath.mpf(s)
            if sv >= hi:
                return mpmath.mpf(0)
            sv = max(sv, lo)
            qs = QuadratureSpec(rel_tol=10.0 ** (-(c.target_digits + 6)))
            return integrate(lambda t: self.density(t, c), (sv, hi), qs, c)

    def quantile(self, p, ctx: Optional[PrecisionContext] = None) -> mpmath.mpf:
        """Point with the given mass above it: tail_mass(quantile(p)) = p."""
        c = ctx if ctx is not None else PrecisionContext()
        cc, lo, hi = self._cf(c.bits)
        with mpmath.workprec(c.bits):
            pv = mpmath.mpf(p)
            if not 0 < pv < 1:
                raise ValueError(f"quantile mass must lie in (0, 1), got {p}")
            return find_root(lambda x: self.tail_mass(x, c) - pv, lo, hi, c)


def mp_density(x, c, ctx: Optional[PrecisionContext] = None) -> mpmath.mpf:
    return MPLaw(Fraction(c)).density(x, ctx)


def mp_tail_mass(s, c, ctx: Optional[PrecisionContext] = None) -> mpmath.mpf:
    return MPLaw(Fraction(c)).tail_mass(s, ctx)


def mp_quantile(p, c, ctx: Optional[PrecisionContext] = None) -> mpmath.mpf:
    return MPLaw(Fraction(c)).quantile(p, ctx)


# ----------------------------------------------------------------------
# bulk scaling probes

@dataclass(frozen=True)
class BulkProbe:
    """Scaled middle-eigenvalue density for the symmetric Gaussian family
    against the standard normal, plus the shape (1 + X^2) e^{-X^2/2}
    matched at the origin."""

    N: int
    xs: tuple
    pdf: tuple
    gauss: tuple
    diff: tuple
    fit: tuple
    c0: mpmath.mpf
    bits: int


def bulk_probe_goe(N: int, xs: Optional[Sequence] = None,
                   ctx: Optional[PrecisionContext] = None) -> BulkProbe:
    """Density of X = (2N / log N)^(1/2) x_k at the middle index
    k = (N+1)/2 (N odd), sampled on a uniform symmetric grid."""
    if N % 2 != 1 or N < 3:
        raise ValueError(f"bulk probe needs odd N >= 3, got {N}")
    spec = EnsembleSpec.goe(N)
    c = ctx if ctx is not None else spec.default_context()
    k = (N + 1) // 2
    with mpmath.workprec(c.bits):
        if xs is None:
            h = mpmath.mpf(1) / 5
            xs = [i * h for i in range(-20, 21)]
        else:
            xs = [mpmath.mpf(v) for v in xs]
        if not any(v == 0 for v in xs):
            raise ValueError("grid must contain the origin for the shape match")
        lam = mpmath.sqrt(mpmath.log(mpmath.mpf(N)) / (2 * N))
        grid = marginal_pdf(spec, k, [lam * v for v in xs], c)
        pdf = tuple(lam and lam * 0 + lam * 1 * p / 1 for p in grid.pdf)  # scaled below
        pdf = tuple(lam * p for p in grid.pdf)
        gauss = tuple(mpmath.e ** (-v * v / 2) / mpmath.sqrt(2 * mpmath.pi)
                      for v in xs)
        diff = tuple(p - g for p, g in zip(pdf, gauss))
        c0 = diff[xs.index(mpmath.mpf(0))]
        fit = tuple(c0 * (1 + v * v) * mpmath.e ** (-v * v / 2) for v in xs)
        return BulkProbe(N=N, xs=tuple(xs), pdf=pdf, gauss=gauss, diff=diff,
                         fit=fit, c0=c0, bits=c.bits)


@dataclass(frozen=True)
class BulkLawLoe:
    """Density of the standardized l-th largest Wishart-family eigenvalue
    Z = (x_l - mu_l)/sigma_l against the standard normal."""

    spec: EnsembleSpec
    l: int
    mu: mpmath.mpf
    sigma: mpmath.mpf
    zs: tuple
    pdf: tuple
    gauss: tuple
    sup_dev: mpmath.mpf
    bits: int


def bulk_law_loe(N: int, a, l: int, zs: Optional[Sequence] = None,
                 ctx: Optional[PrecisionContext] = None) -> BulkLawLoe:
    spec = EnsembleSpec.loe(N, a)
    c = ctx if ctx is not None else spec.default_context()
    if not 1 <= l <= N:
        raise ValueError(f"l must lie in 1..{N}, got {l}")
    cs = cumulants(spec, l, c, orders=2)
    with mpmath.workprec(c.bits):
        if zs is None:
            h = mpmath.mpf(1) / 4
            zs = [i * h for i in range(-16, 17)]
        else:
            zs = [mpmath.mpf(v) for v in zs]
        mu, sigma = cs.mean, cs.sigma
        grid = marginal_pdf(spec, l, [mu + sigma * z for z in zs], c)
        pdf = tuple(sigma * p for p in grid.pdf)
        gauss = tuple(mpmath.e ** (-z * z / 2) / mpmath.sqrt(2 * mpmath.pi)
                      for z in zs)
        sup = max(abs(p - g) for p, g in zip(pdf, gauss))
        return BulkLawLoe(spec=spec, l=l, mu=mu, sigma=sigma, zs=tuple(zs),
                          pdf=pdf, gauss=gauss, sup_dev=sup, bits=c.bits)


# ----------------------------------------------------------------------
# interlacing of marginal means with comparator polynomial zeros

@dataclass(frozen=True)
class InterlacingReport:
    """Means of the k-th largest eigenvalue (descending in k) next to the
    zeros of the comparator polynomial: Hermite H_N for the Gaussian
    family, Laguerre L_N^{2a-1} for the Wishart family.  checks[k-1] holds
    (k, mean_k > zero_k, zero_k > mean_{k+1}) over the tested range."""

    spec: EnsembleSpec
    means: tuple
    zeros: tuple
    checks: tuple
    all_ok: bool
    bits: int


def interlacing_report(spec: EnsembleSpec,
                       ctx: Optional[PrecisionContext] = None) -> InterlacingReport:
    c = ctx if ctx is not None else spec.default_context()
    N = spec.N
    with mpmath.workprec(c.bits):
        if spec.kind == "goe":
            # symmetric family: means mirror as mu_{N+1-k} = -mu_k
            half = (N + 1) // 2
            top = [cumulants(spec, k, c, orders=1).mean for k in range(1, half + 1)]
            if N % 2 == 1:
                top[-1] = mpmath.mpf(0)
            means = list(top)
            for k in range(half + 1, N + 1):
                means.append(-top[N - k])
            zeros = list(reversed(orthopoly_zeros("hermite", N, ctx=c)))
            kmax = N // 2
        else:
            if spec.a <= 0:
                raise ValueError(
                    "interlacing comparator needs a > 0 (Laguerre parameter 2a-1 > -1)")
            means = [cumulants(spec, k, c, orders=1).mean for k in range(1, N + 1)]
            alpha = mpmath.mpf(spec.a.numerator) / spec.a.denominator
            zeros = list(reversed(orthopoly_zeros("laguerre", N, 2 * alpha - 1, ctx=c)))
            kmax = N
        checks = []
        ok = True
        for k in range(1, kmax + 1):
            above = means[k - 1] > zeros[k - 1]
            below = zeros[k - 1] > means[k] if k < N else True
            checks.append((k, above, below))
            ok = ok and above and below
        return InterlacingReport(spec=spec, means=tuple(means),
                                 zeros=tuple(zeros), checks=tuple(checks),
                                 all_ok=ok, bits=c.bits)
