"""Finite probability tables on a contiguous run of integers."""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import ValidationError

FLOAT_TOL = 1e-12


class Pmf:
    """Probabilities ``probs[i] = P(X = offset + i)``.

    ``exact=True`` keeps :class:`fractions.Fraction` values and requires them
    to sum to exactly 1; ``exact=False`` stores floats and allows a 1e-12 slack.
    Pass ``truncated=True`` for float tables that deliberately omit a tail.
    """

    __slots__ = ("offset", "probs", "exact", "truncated")

    def __init__(self, probs: Sequence, offset: int = 0, *, exact: bool | None = None,
                 truncated: bool = False):
        probs = list(probs)
        if exact is None:
            exact = all(isinstance(p, (int, Fraction)) for p in probs)
        if exact:
            probs = [Fraction(p) for p in probs]
        else:
            probs = [float(p) for p in probs]
        # trim zero ends so equal laws compare equal
        lo, hi = 0, len(probs)
        while lo < hi and probs[lo] == 0:
            lo += 1
        while hi > lo and probs[hi - 1] == 0:
            hi -= 1
        self.offset = int(offset) + lo
        self.probs = tuple(probs[lo:hi])
        self.exact = bool(exact)
        self.truncated = bool(truncated)
        self._validate()

    def _validate(self) -> None:
        if not self.probs:
            raise ValidationError("empty pmf")
        if any(p < 0 for p in self.probs):
            if self.exact or min(self.probs) < -FLOAT_TOL:
                raise ValidationError("negative probability")
        total = self.total()
        if self.exact:
            if total != 1:
                raise ValidationError(f"probabilities sum to {total}, not 1")
        elif self.truncated:
            if total > 1 + FLOAT_TOL:
                raise ValidationError(f"truncated pmf has mass {total} > 1")
        elif abs(total - 1.0) > FLOAT_TOL:
            raise ValidationError(f"probabilities sum to {total!r}, not 1")

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_mapping(cls, table: Mapping[int, object], **kw) -> "Pmf":
        lo, hi = min(table), max(table)
        return cls([table.get(k, 0) for k in range(lo, hi + 1)], lo, **kw)

    @classmethod
    def from_counts(cls, counts: Mapping[int, int] | Sequence[int], offset: int = 0,
                    *, exact: bool = False) -> "Pmf":
        if isinstance(counts, Mapping):
            lo, hi = min(counts), max(counts)
            counts = [counts.get(k, 0) for k in range(lo, hi + 1)]
            offset = lo
        counts = [int(c) for c in counts]
        total = sum(counts)
        if exact:
            return cls([Fraction(c, total) for c in counts], offset, exact=True)
        return cls([c / total for c in counts], offset, exact=False)

    @classmethod
    def from_samples(cls, values: Iterable[int]) -> "Pmf":
        arr = np.asarray(values, dtype=np.int64).ravel()
        lo = int(arr.min())
        return cls.from_counts(np.bincount(arr - lo).tolist(), lo)

    @classmethod
    def point(cls, k: int, exact: bool = True) -> "Pmf":
        return cls([1 if exact else 1.0], k, exact=exact)

    # -- access ------------------------------------------------------------

    @property
    def lo(self) -> int:
        return self.offset

    @property
    def hi(self) -> int:
        return self.offset + len(self.probs) - 1

    @property
    def support(self) -> range:
        return range(self.lo, self.hi + 1)

    def __getitem__(self, k: int):
        i = k - self.offset
        if 0 <= i < len(self.probs):
            return self.probs[i]
        return Fraction(0) if self.exact else 0.0

    def __iter__(self) -> Iterator[int]:
        return iter(self.support)

    def __len__(self) -> int:
        return len(self.probs)

    def items(self) -> Iterator[tuple[int, object]]:
        return zip(self.support, self.probs)

    def as_dict(self) -> dict[int, object]:
        return {k: p for k, p in self.items() if p}

    def array(self, lo: int | None = None, hi: int | None = None) -> np.ndarray:
        lo = self.lo if lo is None else lo
        hi = self.hi if hi is None else hi
        return np.array([float(self[k]) for k in range(lo, hi + 1)])

    def __eq__(self, other) -> bool:
        if not isinstance(other, Pmf):
            return NotImplemented
        return self.offset == other.offset and self.probs == other.probs

    def __hash__(self):
        return hash((self.offset, self.probs))

    def __repr__(self) -> str:
        kind = "exact" if self.exact else "float"
        body = ", ".join(f"{k}: {p}" for k, p in list(self.items())[:8])
        more = ", ..." if len(self.probs) > 8 else ""
        return f"Pmf[{kind}]({{{body}{more}}})"

    # -- conversions ---------------------------------------------------------

    def to_float(self) -> "Pmf":
        if not self.exact:
            return self
        return Pmf([float(p) for p in self.probs], self.offset, exact=False,
                   truncated=self.truncated)

    def shift(self, d: int) -> "Pmf":
        return Pmf(self.probs, self.offset + d, exact=self.exact, truncated=self.truncated)

    def size_biased(self) -> "Pmf":
        """Law reweighted by ``k / E[X]`` (support must be non-negative)."""
        if self.lo < 0:
            raise ValidationError("size-biasing needs a non-negative support")
        mu = self.mean()
        return Pmf([k * p / mu for k, p in self.items()], self.offset, exact=self.exact)

    # -- functionals -------------------------------------------------------

    def total(self):
        return sum(self.probs) if self.exact else math.fsum(self.probs)

    def _sum(self, terms):
        return sum(terms) if self.exact else math.fsum(terms)

    def expect(self, f):
        return self._sum(f(k) * p for k, p in self.items())

    def mean(self):
        return self.expect(lambda k: k)

    def var(self):
        mu = self.mean()
        return self.expect(lambda k: (k - mu) ** 2)

    def factorial_moment(self, order: int):
        """``E[X (X - 1) ... (X - order + 1)]``."""
        return self.expect(lambda k: math.perm(k, order) if k >= 0 else 0)

    def pgf(self, z):
        """``E[z^X]``, evaluated by Horner's rule."""
        acc = 0
        for p in reversed(self.probs):
            acc = acc * z + p
        return acc * z**self.offset

    def cdf(self, k: int):
        return self._sum(p for j, p in self.items() if j <= k)

    def sf(self, k: int):
        """``P(X >= k)``."""
        return self._sum(p for j, p in self.items() if j >= k)

    def tv(self, other: "Pmf"):
        lo, hi = min(self.lo, other.lo), max(self.hi, other.hi)
        exact = self.exact and other.exact
        diffs = [abs(self[k] - other[k]) for k in range(lo, hi + 1)]
        if exact:
            return sum(diffs) / 2
        return math.fsum(float(d) for d in diffs) / 2

    def ks(self, other: "Pmf") -> float:
        lo, hi = min(self.lo, other.lo), max(self.hi, other.hi)
        a = np.cumsum([float(self[k]) for k in range(lo, hi + 1)])
        b = np.cumsum([float(other[k]) for k in range(lo, hi + 1)])
        return float(np.max(np.abs(a - b)))


def convolve(a: Pmf, b: Pmf) -> Pmf:
    exact = a.exact and b.exact
    out = [Fraction(0) if exact else 0.0] * (len(a) + len(b) - 1)
    for i, p in enumerate(a.probs):
        if p:
            for j, q in enumerate(b.probs):
                out[i + j] += p * q
    return Pmf(out, a.offset + b.offset, exact=exact)


def mixture(weights: Sequence, parts: Sequence[Pmf]) -> Pmf:
    exact = all(p.exact for p in parts) and all(isinstance(w, (int, Fraction)) for w in weights)
    lo = min(p.lo for p in parts)
    hi = max(p.hi for p in parts)
    out = [Fraction(0) if exact else 0.0] * (hi - lo + 1)
    for w, part in zip(weights, parts):
        for k, p in part.items():
            out[k - lo] += w * p
    return Pmf(out, lo, exact=exact)
