"""Recurrence-built kernel tables and Pfaffian matrix ingredients.

For each ensemble the generating-function Pfaffian needs three families of
quantities at the conditioning point s:

  psi(j), psi_tilde(j)  normalized one-sided weight integrals (below / above s),
  I(j,k), I_tilde(j,k)  normalized ordered double integrals (both below /
                        both above s),

all produced by two-term recurrences seeded by erf (Gaussian) or regularized
incomplete gamma (Laguerre) evaluations, plus companion tables at a rescaled
argument (sqrt(2) s, resp. 2x) that feed the double-integral recurrences.

Everything here runs on gmpy2 mpfr inside an explicit precision context; the
KernelTables accessors hand out mpmath values for inspection and testing.

Laguerre convention: the public conditioning point s lives on the eigenvalue
scale of the weight x^a e^{-x/2}; the recurrences run at the internal
argument x = s/2 where the weight is x^a e^{-x}.
"""

from __future__ import annotations

import threading
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Optional

import gmpy2
import mpmath
from gmpy2 import mpfr

from ._mp import context, mpfr_to_mpf, to_mpfr
from .ensembles import EnsembleSpec
from .precision import PrecisionContext

__all__ = [
    "KernelTables",
    "PfaffianIngredients",
    "build_gaussian_psi",
    "build_gaussian_I",
    "build_laguerre_tables",
    "assemble_ingredients",
    "clear_cache",
]


@dataclass
class KernelTables:
    """Recurrence output for one (ensemble, s, bits) triple.

    Arrays are 1-indexed python lists of mpfr (slot 0 unused).  'psi' tables
    run at the conditioning argument, 'psi_r' at the rescaled argument used
    inside the double-integral recurrences.  For the Gaussian family index j
    of psi means weight x^{j-1} e^{-x^2/2} normalized by Gamma(j/2); for the
    Laguerre family it means x^{a+j-1} e^{-x} normalized by Gamma(a+j), and
    index m of psi_r means x^{2a+m-1} e^{-x} at argument 2x.
    """

    spec: EnsembleSpec
    s: mpmath.mpf          # public-scale conditioning point
    bits: int
    _psi: list = field(repr=False, default_factory=list)
    _psi_t: list = field(repr=False, default_factory=list)
    _psi_r: list = field(repr=False, default_factory=list)
    _psi_tr: list = field(repr=False, default_factory=list)
    _u: list = field(repr=False, default_factory=list)        # Gaussian full-line moments
    _I: list = field(repr=False, default_factory=list)
    _It: list = field(repr=False, default_factory=list)

    def psi(self, j: int) -> mpmath.mpf:
        return mpfr_to_mpf(self._psi[j])

    def psi_tilde(self, j: int) -> mpmath.mpf:
        return mpfr_to_mpf(self._psi_t[j])

    def psi_rescaled(self, m: int) -> mpmath.mpf:
        return mpfr_to_mpf(self._psi_r[m])

    def psi_tilde_rescaled(self, m: int) -> mpmath.mpf:
        return mpfr_to_mpf(self._psi_tr[m])

    def integral(self, j: int, k: int) -> mpmath.mpf:
        return mpfr_to_mpf(self._I[j][k])

    def integral_tilde(self, j: int, k: int) -> mpmath.mpf:
        return mpfr_to_mpf(self._It[j][k])


@dataclass
class PfaffianIngredients:
    """Everything the gap layer needs to form A(zeta) = H0 + zeta H1 +
    zeta^2 H2 (bordered by nu for odd N) and normalize the Pfaffian.

    H matrices are 1-indexed nested lists of mpfr, antisymmetric on
    j,k = 1..N.  nu is the border column evaluated at the zeta passed to
    assemble_ingredients; border_parts holds the (psi, psi_tilde) pair so
    other zeta values can be formed without rebuilding tables.
    """

    spec: EnsembleSpec
    s: mpmath.mpf
    bits: int
    parity: str                      # 'even' or 'odd'
    H0: list = field(repr=False, default=None)
    H1: list = field(repr=False, default=None)
    H2: list = field(repr=False, default=None)
    border_parts: tuple = field(repr=False, default=None)
    nu: list = field(repr=False, default=None)
    prefactor: object = field(repr=False, default=None)
    tables: KernelTables = field(repr=False, default=None)

    def nu_at(self, zeta) -> list:
        """Border column [nu_j(zeta)]_{j=1}^{N+1} as 1-indexed mpc list."""
        psi, psi_t = self.border_parts
        z = zeta if isinstance(zeta, gmpy2.mpc) else gmpy2.mpc(to_mpfr(zeta, self.bits))
        out = [gmpy2.mpc(0)] * (self.spec.N + 2)
        for j in range(1, self.spec.N + 1):
            out[j] = gmpy2.mpc(psi[j]) + z * psi_t[j]
        return out


def _zeros1(n: int) -> list:
    return [mpfr(0)] * (n + 1)


def _zeros2(n: int) -> list:
    return [[mpfr(0)] * (n + 1) for _ in range(n + 1)]


# ----------------------------------------------------------------------
# Gaussian recurrences

def _gaussian_psi_ladder(x, jmax: int):
    """psi, psi_tilde, u up to index jmax at argument x.

    Upward ladder on psi_tilde (numerically benign: all terms positive for
    the dominant regime), psi recovered from the full-line moment u.
    """
    psi = _zeros1(jmax)
    psi_t = _zeros1(jmax)
    u = _zeros1(jmax)
    e = gmpy2.exp(-x * x / 2)
    rt2 = gmpy2.sqrt(mpfr(2))
    u[1] = rt2
    psi_t[1] = (1 - gmpy2.erf(x / rt2)) / rt2
    psi[1] = u[1] - psi_t[1]
    if jmax >= 2:
        u[2] = mpfr(0)
        psi_t[2] = e
        psi[2] = -e
    for j in range(3, jmax + 1):
        term = x ** (j - 2) * e / gmpy2.gamma(mpfr(j) / 2)
        psi_t[j] = term + 2 * psi_t[j - 2]
        u[j] = 2 * u[j - 2]
        psi[j] = u[j] - psi_t[j]
    return psi, psi_t, u


def build_gaussian_psi(N: int, s, ctx: Optional[PrecisionContext] = None) -> KernelTables:
    """One-sided weight integrals for the Gaussian family, at arguments s
    and sqrt(2) s, up to index 2N."""
    c = ctx if ctx is not None else PrecisionContext.for_matrix_size(N)
    spec = EnsembleSpec.goe(N)
    with context(c.bits):
        x = to_mpfr(s, c.bits) * 1
        psi, psi_t, u = _gaussian_psi_ladder(x, 2 * N)
        xr = gmpy2.sqrt(mpfr(2)) * x
        psi_r, psi_tr, _ = _gaussian_psi_ladder(xr, 2 * N)
        t = KernelTables(spec=spec, s=mpfr_to_mpf(x), bits=c.bits)
        t._psi, t._psi_t, t._u = psi, psi_t, u
        t._psi_r, t._psi_tr = psi_r, psi_tr
        return t


def build_gaussian_I(tables: KernelTables, ctx: Optional[PrecisionContext] = None) -> KernelTables:
    """Fill the ordered double-integral arrays I, I_tilde on 1..N.

    Recurrence raises the first index by 2 from a zero row at index 0;
    column 1 first, then row 1 via I(j,k) + I(k,j) = psi(j) psi(k), then
    the remaining columns.  The tilde array uses the above-s tables with
    the two inhomogeneous terms' signs swapped.
    """
    c = ctx if ctx is not None else PrecisionContext(bits=tables.bits)
    N = tables.spec.N
    with context(c.bits):
        x = to_mpfr(tables.s, c.bits) * 1
        e = gmpy2.exp(-x * x / 2)

        def fill(psi_s, psi_r, tilde):
            sgn = 1 if tilde else -1     # sign of the single-integral term
            sg3 = -1 if tilde else 1     # sign of the rescaled-psi term
            I = _zeros2(N)
            if N >= 1:
                I[1][1] = psi_s[1] ** 2 / 2

            def raised(j, k):
                g1 = gmpy2.gamma(mpfr(j) / 2 + 1)
                t2 = (x ** j) * e * psi_s[k] / g1
                t3 = (gmpy2.exp2(mpfr(-(j + k)) / 2) * gmpy2.gamma(mpfr(j + k) / 2)
                      / (g1 * gmpy2.gamma(mpfr(k) / 2)) * psi_r[j + k])
                return 2 * I[j][k] + sgn * t2 + sg3 * t3

            for j in range(0, N - 1):
                I[j + 2][1] = raised(j, 1)
            for k in range(2, N + 1):
                I[1][k] = psi_s[1] * psi_s[k] - I[k][1]
            for k in range(2, N + 1):
                for j in range(0, N - 1):
                    I[j + 2][k] = raised(j, k)
            return I

        tables._I = fill(tables._psi, tables._psi_r, tilde=False)
        tables._It = fill(tables._psi_t, tables._psi_tr, tilde=True)
        return tables


# ----------------------------------------------------------------------
# Laguerre recurrences

def build_laguerre_tables(N: int, a, x, ctx: Optional[PrecisionContext] = None) -> KernelTables:
    """Complete kernel tables for the Laguerre family at internal argument x
    (the weight there is t^{alpha-1} e^{-t}; callers pass x = s/2).

    psi(j) = P(a+j, x) and psi_tilde(j) = Q(a+j, x) with P/Q the regularized
    incomplete gamma pair; the rescaled tables run at argument 2x with
    parameter 2a+m.  The double-integral recurrence raises the first
    parameter by one.
    """
    c = ctx if ctx is not None else PrecisionContext.for_matrix_size(N)
    spec = EnsembleSpec.loe(N, a)
    with context(c.bits):
        af = to_mpfr(spec.a.numerator, c.bits) / to_mpfr(spec.a.denominator, c.bits)
        xx = to_mpfr(x, c.bits) * 1
        if xx < 0:
            raise ValueError(f"Laguerre argument must be >= 0, got {x}")
        e = gmpy2.exp(-xx)

        def pq(alpha, arg):
            q = gmpy2.gamma_inc(alpha, arg) / gmpy2.gamma(alpha)
            return 1 - q, q

        psi, psi_t = _zeros1(N), _zeros1(N)
        for j in range(1, N + 1):
            psi[j], psi_t[j] = pq(af + j, xx)
        psi_r, psi_tr = _zeros1(2 * N), _zeros1(2 * N)
        for m in range(2, 2 * N + 1):
            psi_r[m], psi_tr[m] = pq(2 * af + m, 2 * xx)

        def fill(psi_a, psi_b, tilde):
            sgn = 1 if tilde else -1
            sg3 = -1 if tilde else 1
            I = _zeros2(N)
            if N >= 1:
                I[1][1] = psi_a[1] ** 2 / 2

            def raised(j, k):
                al = af + j
                g1 = gmpy2.gamma(al + 1)
                t2 = xx ** al * e * psi_a[k] / g1
                t3 = (gmpy2.exp2(-(2 * af + j + k)) * gmpy2.gamma(2 * af + j + k)
                      / (g1 * gmpy2.gamma(af + k)) * psi_b[j + k])
                return I[j][k] + sgn * t2 + sg3 * t3

            for j in range(1, N):
                I[j + 1][1] = raised(j, 1)
            for k in range(2, N + 1):
                I[1][k] = psi_a[1] * psi_a[k] - I[k][1]
            for k in range(2, N + 1):
                for j in range(1, N):
                    I[j + 1][k] = raised(j, k)
            return I

        t = KernelTables(spec=spec, s=mpfr_to_mpf(2 * xx), bits=c.bits)
        t._psi, t._psi_t = psi, psi_t
        t._psi_r, t._psi_tr = psi_r, psi_tr
        t._I = fill(psi, psi_r, tilde=False)
        t._It = fill(psi_t, psi_tr, tilde=True)
        return t


def _laguerre_direct_H(N, af, xx, psi_arg, psi_2arg):
    """Direct recurrence for an H block: raise the column index from a zero
    diagonal, lower triangle by antisymmetry.  Used as a cross-check route
    against the double-integral assembly."""
    e = gmpy2.exp(-xx)
    H = _zeros2(N)
    for j in range(1, N + 1):
        for k in range(j, N):
            g1 = gmpy2.gamma(af + k + 1)
            t2 = xx ** (af + k) * e * psi_arg[j] / g1
            t3 = (gmpy2.exp2(-(2 * af + j + k - 1)) * gmpy2.gamma(2 * af + j + k)
                  / (g1 * gmpy2.gamma(af + j)) * psi_2arg[j + k])
            H[j][k + 1] = H[j][k] - t2 + t3
        for k in range(1, j):
            H[j][k] = -H[k][j]
    return H


# ----------------------------------------------------------------------
# assembly and cache

_CACHE: "OrderedDict[tuple, PfaffianIngredients]" = OrderedDict()
_CACHE_LOCK = threading.Lock()
_CACHE_CAP = 16


def clear_cache() -> None:
    with _CACHE_LOCK:
        _CACHE.clear()


def _s_key(s, bits):
    v = to_mpfr(s, bits)
    if v == 0:
        return (0, 0)
    return tuple(int(t) for t in v.as_mantissa_exp())


def assemble_ingredients(spec: EnsembleSpec, s, zeta=1,
                         ctx: Optional[PrecisionContext] = None,
                         route: str = "recurrence") -> PfaffianIngredients:
    """Build (or fetch from cache) the H matrices, border column parts and
    normalization prefactor for the given ensemble and conditioning point.

    route 'recurrence' assembles H0/H2 from the ordered double-integral
    arrays; 'direct' (Laguerre only) runs the column-raising recurrence on
    the H entries themselves.  Both must agree to working precision; tests
    hold them to that.
    """
    if route not in ("recurrence", "direct"):
        raise ValueError(f"unknown route {route!r}")
    if route == "direct" and spec.kind != "loe":
        raise ValueError("direct route exists for the Laguerre family only")
    c = ctx if ctx is not None else spec.default_context()
    N = spec.N
    key = (spec, _s_key(s, c.bits), c.bits, route)
    with _CACHE_LOCK:
        hit = _CACHE.get(key)
        if hit is not None:
            _CACHE.move_to_end(key)
    if hit is not None:
        hit.nu = hit.nu_at(zeta) if hit.parity == "odd" else None
        return hit

    with context(c.bits):
        if spec.kind == "goe":
            tables = build_gaussian_psi(N, s, c)
            build_gaussian_I(tables, c)
            psi, psi_t, u = tables._psi, tables._psi_t, tables._u
            I, It = tables._I, tables._It
            H0, H1, H2 = _zeros2(N), _zeros2(N), _zeros2(N)
            for j in range(1, N + 1):
                for k in range(1, N + 1):
                    H0[j][k] = I[k][j] - I[j][k]
                    H1[j][k] = u[k] * psi[j] - u[j] * psi[k]
                    H2[j][k] = It[j][k] - It[k][j]
            prefactor = gmpy2.exp2(mpfr(-N) / 2)
            s_pub = tables.s
        else:
            s_m = to_mpfr(s, c.bits)
            if s_m < 0:
                raise ValueError(f"Laguerre conditioning point must be >= 0, got {s}")
            xx = s_m / 2
            tables = build_laguerre_tables(N, spec.a, xx, c)
            af = to_mpfr(spec.a.numerator, c.bits) / to_mpfr(spec.a.denominator, c.bits)
            psi, psi_t = tables._psi, tables._psi_t
            H1 = _zeros2(N)
            for j in range(1, N + 1):
                for k in range(1, N + 1):
                    H1[j][k] = psi[j] - psi[k]
            if route == "recurrence":
                I, It = tables._I, tables._It
                H0, H2 = _zeros2(N), _zeros2(N)
                for j in range(1, N + 1):
                    for k in range(1, N + 1):
                        H0[j][k] = I[k][j] - I[j][k]
                        H2[j][k] = It[j][k] - It[k][j]
            else:
                H0 = _laguerre_direct_H(N, af, xx, psi, tables._psi_r)
                H2 = _laguerre_direct_H(N, af, xx, psi_t, tables._psi_tr)
            pref = mpfr(1)
            rtpi = gmpy2.sqrt(gmpy2.const_pi())
            for j in range(1, N + 1):
                pref *= rtpi * gmpy2.gamma(af + j) / (
                    gmpy2.gamma(mpfr(j) / 2) * gmpy2.gamma(af + (mpfr(j) + 1) / 2))
            prefactor = pref
            s_pub = tables.s

        ing = PfaffianIngredients(
            spec=spec, s=s_pub, bits=c.bits,
            parity="even" if N % 2 == 0 else "odd",
            H0=H0, H1=H1, H2=H2,
            border_parts=(psi, psi_t),
            prefactor=prefactor,
            tables=tables,
        )
        ing.nu = ing.nu_at(zeta) if ing.parity == "odd" else None

    with _CACHE_LOCK:
        _CACHE[key] = ing
        while len(_CACHE) > _CACHE_CAP:
            _CACHE.popitem(last=False)
    return ing
