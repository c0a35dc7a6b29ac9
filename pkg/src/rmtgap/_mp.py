"""Internal bridge between the gmpy2 compute layer and the mpmath public layer.

All heavy arithmetic (kernel tables, Pfaffians, Fourier folds) runs on gmpy2
mpfr/mpc values inside an explicit precision context.  Public API values are
mpmath mpf/mpc.  Conversions in both directions are exact: they move the raw
(mantissa, exponent) pair, never a decimal string or a double.
"""

from __future__ import annotations

from fractions import Fraction

import gmpy2
import mpmath

__all__ = [
    "context",
    "to_mpfr",
    "to_mpc",
    "mpfr_to_mpf",
    "mpc_to_mpc",
    "to_mpf_any",
]


def context(bits: int):
    """gmpy2 context manager at the given mantissa precision."""
    return gmpy2.context(precision=bits)


def _mpf_backing(x: mpmath.mpf):
    # mpmath internal: (sign, man, exp, bc) with value (-1)^sign * man * 2^exp
    sign, man, exp, bc = x._mpf_
    return sign, int(man), int(exp), int(bc)


def to_mpfr(x, bits: int):
    """Convert int/float/str/Fraction/mpmath.mpf/gmpy2.mpfr to mpfr, exactly
    when the input is exactly representable, else rounded at `bits`."""
    if isinstance(x, gmpy2.mpfr):
        return x
    if isinstance(x, mpmath.mpf):
        sign, man, exp, bc = _mpf_backing(x)
        if man == 0:
            if x == 0:
                return gmpy2.mpfr(0)
            # infinities/nans never enter the compute layer
            raise ValueError(f"non-finite value {x!r}")
        with gmpy2.context(precision=max(bc + 2, 64)):
            v = gmpy2.mpfr(gmpy2.mpz(man))
            v = gmpy2.mul_2exp(v, exp) if exp >= 0 else gmpy2.div_2exp(v, -exp)
        return -v if sign else v
    if isinstance(x, (int, str)):
        with gmpy2.context(precision=bits):
            return gmpy2.mpfr(x)
    if isinstance(x, float):
        return gmpy2.mpfr(x)  # binary64 embeds exactly
    if isinstance(x, Fraction):
        with gmpy2.context(precision=bits):
            return gmpy2.mpfr(x.numerator) / gmpy2.mpfr(x.denominator)
    raise TypeError(f"cannot convert {type(x).__name__} to mpfr")


def to_mpc(x, bits: int):
    """Convert a real or complex input to gmpy2.mpc."""
    if isinstance(x, gmpy2.mpc):
        return x
    if isinstance(x, (complex, mpmath.mpc)):
        re = to_mpfr(x.real, bits)
        im = to_mpfr(x.imag, bits)
        return gmpy2.mpc(re, im)
    return gmpy2.mpc(to_mpfr(x, bits), gmpy2.mpfr(0))


def mpfr_to_mpf(v) -> mpmath.mpf:
    """Exact mpfr -> mpmath.mpf."""
    if gmpy2.is_nan(v) or gmpy2.is_infinite(v):
        raise ValueError(f"non-finite value {v!r}")
    if v == 0:
        return mpmath.mpf(0)
    man, exp = v.as_mantissa_exp()  # signed mantissa
    man = int(man)
    with mpmath.workprec(max(abs(man).bit_length() + 2, 64)):
        return mpmath.mpf((man, int(exp)))


def mpc_to_mpc(v) -> mpmath.mpc:
    """Exact gmpy2.mpc -> mpmath.mpc."""
    return mpmath.mpc(mpfr_to_mpf(v.real), mpfr_to_mpf(v.imag))


def to_mpf_any(v):
    """Map a compute-layer value (mpfr or mpc) to the matching mpmath type."""
    if isinstance(v, gmpy2.mpc):
        return mpc_to_mpc(v)
    return mpfr_to_mpf(v)
