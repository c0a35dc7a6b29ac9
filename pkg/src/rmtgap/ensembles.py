"""Ensemble descriptors for the two orthogonal families handled here.

'goe': N x N real symmetric Gaussian matrices, weight e^{-x^2/2} per
eigenvalue.  'loe': N x N real Wishart matrices W = B B^T with B of shape
N x n, weight x^a e^{-x/2} per eigenvalue where a = (n - N - 1)/2.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import mpmath

from .precision import PrecisionContext, default_bits

__all__ = ["EnsembleSpec"]


def _as_fraction(a) -> Fraction:
    if isinstance(a, Fraction):
        return a
    if isinstance(a, int):
        return Fraction(a)
    if isinstance(a, str):
        return Fraction(a)
    if isinstance(a, float):
        return Fraction(a).limit_denominator(10**12)
    raise TypeError(f"cannot interpret exponent a of type {type(a).__name__}")


@dataclass(frozen=True)
class EnsembleSpec:
    """kind: 'goe' or 'loe'; N: matrix size; a: Laguerre weight exponent
    (None for GOE), stored exactly as a Fraction so cache keys are stable."""

    kind: str
    N: int
    a: Optional[Fraction] = None

    def __post_init__(self):
        if self.kind not in ("goe", "loe"):
            raise ValueError(f"kind must be 'goe' or 'loe', got {self.kind!r}")
        if self.N < 1:
            raise ValueError(f"N must be >= 1, got {self.N}")
        if self.kind == "goe":
            if self.a is not None:
                raise ValueError("GOE takes no exponent a")
        else:
            if self.a is None:
                raise ValueError("LOE requires the weight exponent a")
            object.__setattr__(self, "a", _as_fraction(self.a))
            if self.a <= -1:
                raise ValueError(f"a must exceed -1, got {self.a}")

    @classmethod
    def goe(cls, N: int) -> "EnsembleSpec":
        return cls("goe", N)

    @classmethod
    def loe(cls, N: int, a) -> "EnsembleSpec":
        return cls("loe", N, _as_fraction(a))

    @property
    def wishart_n(self) -> Fraction:
        """Number of columns n of the rectangular factor: n = 2a + N + 1."""
        if self.kind != "loe":
            raise ValueError("wishart_n is defined for LOE only")
        return 2 * self.a + self.N + 1

    @property
    def aspect_c(self) -> Fraction:
        """Aspect ratio c = N/n of the Wishart factor."""
        return Fraction(self.N) / self.wishart_n

    def a_mpf(self, bits: int = 128) -> mpmath.mpf:
        with mpmath.workprec(bits):
            return mpmath.mpf(self.a.numerator) / self.a.denominator

    def default_context(self, target_digits: int = 20,
                        max_escalations: int = 3) -> PrecisionContext:
        return PrecisionContext(bits=default_bits(self.N),
                                target_digits=target_digits,
                                max_escalations=max_escalations)

    def label(self) -> str:
        if self.kind == "goe":
            return f"goe(N={self.N})"
        return f"loe(N={self.N}, a={self.a})"
