"""Coefficient rings: the integers, the rationals and prime fields."""
from __future__ import annotations

from dataclasses import dataclass

from gmpy2 import mpq


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p % 2 == 0:
        return p == 2
    f = 3
    while f * f <= p:
        if p % f == 0:
            return False
        f += 2
    return True


@dataclass(frozen=True)
class Ring:
    """``kind`` is ``"Z"``, ``"Q"`` or ``"Fp"`` (with prime ``p``)."""

    kind: str
    p: int = 0

    def __post_init__(self):
        if self.kind not in ("Z", "Q", "Fp"):
            raise ValueError(f"unknown ring {self.kind!r}")
        if self.kind == "Fp" and not _is_prime(self.p):
            raise ValueError(f"{self.p} is not prime")

    @property
    def is_field(self) -> bool:
        return self.kind != "Z"

    @property
    def name(self) -> str:
        return f"F{self.p}" if self.kind == "Fp" else self.kind

    def __str__(self) -> str:
        return self.name

    # element handling; Q uses gmpy2 rationals, Fp reduced ints, Z plain ints
    def elem(self, x):
        if self.kind == "Q":
            return mpq(x)
        if self.kind == "Fp":
            return int(x) % self.p
        return int(x)

    def inv(self, x):
        if self.kind == "Q":
            return 1 / x
        if self.kind == "Fp":
            return pow(int(x), -1, self.p)
        if x in (1, -1):
            return x
        raise ZeroDivisionError(f"{x} is not a unit in Z")

    def norm(self, x):
        return x % self.p if self.kind == "Fp" else x

    @property
    def zero(self):
        return self.elem(0)

    @property
    def one(self):
        return self.elem(1)

    def to_json(self, x):
        """Exact JSON-friendly rendering of an element."""
        if self.kind == "Q":
            x = mpq(x)
            return int(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
        return int(x)


Z = Ring("Z")
Q = Ring("Q")


def GF(p: int) -> Ring:
    return Ring("Fp", p)


def parse_ring(text: str) -> Ring:
    t = text.strip()
    if t in ("Z", "ZZ", "integers"):
        return Z
    if t in ("Q", "QQ", "rationals"):
        return Q
    if t.upper().startswith("F") and t[1:].isdigit():
        return GF(int(t[1:]))
    if t.upper().startswith("GF") and t[2:].isdigit():
        return GF(int(t[2:]))
    raise ValueError(f"unknown ring {text!r}; use Z, Q or Fp such as F2")
