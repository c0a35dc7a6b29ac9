"""Working-precision policy shared by every numerical routine in the package.

A PrecisionContext carries the mantissa bit count, the accuracy target in
decimal digits, and the escalation budget used when self-diagnostics (sum
rules, imaginary residues, negative probabilities) show the current precision
is not enough.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import mpmath

__all__ = ["PrecisionContext", "default_bits"]


def default_bits(n: int) -> int:
    """Default mantissa bits for matrix size n: generous linear growth.

    The Pfaffian recurrences lose a slowly growing number of bits with n;
    10 bits per row plus a fixed pad keeps terminal residuals far below
    any tolerance used in this package.
    """
    return max(128, 10 * int(n) + 64)


@dataclass(frozen=True)
class PrecisionContext:
    """bits: mpfr mantissa size; target_digits: decimal accuracy goal;
    max_escalations: how many precision doublings are allowed."""

    bits: int = 128
    target_digits: int = 20
    max_escalations: int = 3

    def __post_init__(self):
        if self.bits < 64:
            raise ValueError(f"bits must be >= 64, got {self.bits}")
        if self.target_digits < 1:
            raise ValueError("target_digits must be positive")
        if self.max_escalations < 0:
            raise ValueError("max_escalations must be >= 0")

    @classmethod
    def for_matrix_size(cls, n: int, target_digits: int = 20,
                        max_escalations: int = 3) -> "PrecisionContext":
        return cls(bits=default_bits(n), target_digits=target_digits,
                   max_escalations=max_escalations)

    def escalate(self) -> "PrecisionContext":
        """Double the mantissa; the caller decrements its own budget."""
        return replace(self, bits=2 * self.bits)

    def with_bits(self, bits: int) -> "PrecisionContext":
        return replace(self, bits=bits)

    @property
    def tolerance(self) -> mpmath.mpf:
        """10^(-target_digits) as an mpf at comfortable precision."""
        with mpmath.workprec(max(self.bits, 64)):
            return mpmath.mpf(10) ** (-self.target_digits)

    @property
    def dps(self) -> int:
        """Decimal digits carried by the mantissa (floor)."""
        return int(self.bits * 0.30102999566398119) - 1
