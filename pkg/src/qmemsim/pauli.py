"""n-qubit Pauli operators as pairs of bit vectors, signs discarded.

Bit vectors are plain Python ints used as little-endian bitmasks: bit i
addresses qubit i. All observables downstream are parity data, so global
phases are never tracked.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

_CHAR_TO_BITS = {"I": (0, 0), "X": (1, 0), "Z": (0, 1), "Y": (1, 1)}
_BITS_TO_CHAR = {v: k for k, v in _CHAR_TO_BITS.items()}


def parity(mask: int) -> int:
    return mask.bit_count() & 1


@dataclass(frozen=True, slots=True)
class PauliOperator:
    """Pauli on ``n`` qubits; ``x_bits``/``z_bits`` hold the X/Z parts."""

    n: int
    x_bits: int = 0
    z_bits: int = 0

    def __post_init__(self) -> None:
        if self.n < 0:
            raise ValueError(f"negative qubit count {self.n}")
        limit = 1 << self.n
        if not (0 <= self.x_bits < limit and 0 <= self.z_bits < limit):
            raise ValueError(f"bit vector out of range for n={self.n}")

    @classmethod
    def identity(cls, n: int) -> "PauliOperator":
        return cls(n)

    @classmethod
    def single(cls, n: int, qubit: int, kind: str) -> "PauliOperator":
        if not 0 <= qubit < n:
            raise ValueError(f"qubit {qubit} out of range for n={n}")
        x, z = _CHAR_TO_BITS[kind]
        return cls(n, x << qubit, z << qubit)

    @classmethod
    def from_support(cls, n: int, qubits: Iterable[int], kind: str) -> "PauliOperator":
        x, z = _CHAR_TO_BITS[kind]
        mask = 0
        for q in qubits:
            if not 0 <= q < n:
                raise ValueError(f"qubit {q} out of range for n={n}")
            mask |= 1 << q
        return cls(n, mask if x else 0, mask if z else 0)

    @classmethod
    def from_string(cls, s: str) -> "PauliOperator":
        x = z = 0
        for i, ch in enumerate(s):
            try:
                xb, zb = _CHAR_TO_BITS[ch]
            except KeyError:
                raise ValueError(f"invalid Pauli character {ch!r}") from None
            x |= xb << i
            z |= zb << i
        return cls(len(s), x, z)

    def to_string(self) -> str:
        return "".join(
            _BITS_TO_CHAR[(self.x_bits >> i & 1, self.z_bits >> i & 1)]
            for i in range(self.n)
        )

    @property
    def weight(self) -> int:
        return (self.x_bits | self.z_bits).bit_count()

    @property
    def support(self) -> tuple[int, ...]:
        mask = self.x_bits | self.z_bits
        return tuple(i for i in range(self.n) if mask >> i & 1)

    def is_identity(self) -> bool:
        return self.x_bits == 0 and self.z_bits == 0

    def commutes(self, other: "PauliOperator") -> bool:
        """True iff the symplectic product x_a.z_b + z_a.x_b vanishes mod 2."""
        if self.n != other.n:
            raise ValueError(f"dimension mismatch: {self.n} != {other.n}")
        return (parity(self.x_bits & other.z_bits) ^ parity(self.z_bits & other.x_bits)) == 0

    def __mul__(self, other: "PauliOperator") -> "PauliOperator":
        if self.n != other.n:
            raise ValueError(f"dimension mismatch: {self.n} != {other.n}")
        return PauliOperator(self.n, self.x_bits ^ other.x_bits, self.z_bits ^ other.z_bits)

    def symplectic(self) -> int:
        """Pack as a 2n-bit row: x block in low bits, z block in high bits."""
        return self.x_bits | (self.z_bits << self.n)

    @classmethod
    def from_symplectic(cls, n: int, row: int) -> "PauliOperator":
        mask = (1 << n) - 1
        return cls(n, row & mask, row >> n)

    def __repr__(self) -> str:
        if self.n <= 64:
            return f"PauliOperator({self.to_string()!r})"
        return f"PauliOperator(n={self.n}, weight={self.weight})"


def commutes(a: PauliOperator, b: PauliOperator) -> bool:
    return a.commutes(b)


def multiply(a: PauliOperator, b: PauliOperator) -> PauliOperator:
    return a * b
