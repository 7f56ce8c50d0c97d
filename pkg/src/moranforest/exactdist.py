"""Exact finite-n laws, limiting laws, bounds and centering sequences.

Most functions take ``backend="rational"`` (Fractions over big integers, the
ground truth for moderate ``n``) or ``backend="float"`` (numpy, for large
``n``).  Everything returns :class:`~moranforest.pmf.Pmf` objects or floats.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator

import numpy as np
from scipy import integrate, special, stats

from .errors import DomainError, InvalidN, TruncationWarning, ValidationError
from .pmf import Pmf

TAIL_CUTOFF = 1e-15
ALPHA = -1.0 / math.log1p(-math.exp(-1.0))  # about 2.18019

_BACKENDS = ("rational", "float")


def _backend(name: str) -> bool:
    if name not in _BACKENDS:
        raise ValidationError(f"backend must be one of {_BACKENDS}, got {name!r}")
    return name == "rational"


def _check_n(n: int, least: int = 2) -> None:
    if n < least:
        raise InvalidN(f"need n >= {least}, got n={n}")


def _int_poly_product(factors) -> list[int]:
    """Coefficients of the product of integer linear factors ``a + b z``."""
    coef = [1]
    for a, b in factors:
        nxt = [0] * (len(coef) + 1)
        for i, c in enumerate(coef):
            if c:
                nxt[i] += c * a
                nxt[i + 1] += c * b
        coef = nxt
    return coef


# -- number of trees -----------------------------------------------------------


def ntrees_pmf(n: int, backend: str = "rational") -> Pmf:
    """Law of the number of trees: a sum of independent Bernoulli(k/(n-1)), k=1..n-1."""
    _check_n(n)
    exact = _backend(backend)
    m = n - 1
    if exact:
        coef = _int_poly_product((m - k, k) for k in range(1, n))
        den = m**m
        return Pmf([Fraction(c, den) for c in coef], 0, exact=True)
    p = np.zeros(n + 1)
    p[0] = 1.0
    for k in range(1, n):
        q = k / m
        p[1 : k + 1] = p[1 : k + 1] * (1.0 - q) + p[:k] * q
        p[0] *= 1.0 - q
    return Pmf(p, 0, exact=False)


@lru_cache(maxsize=64)
def a_table(m: int) -> tuple[int, ...]:
    """Rooted trees on ``m`` labeled vertices counted by increasing edges."""
    if m < 1:
        raise InvalidN(f"need m >= 1, got m={m}")
    return tuple(_int_poly_product((m - j, j) for j in range(1, m)))


def ntrees_pmf_via_a(n: int) -> Pmf:
    _check_n(n)
    a = a_table(n - 1)
    den = (n - 1) ** (n - 2)
    return Pmf([Fraction(c, den) for c in a], 1, exact=True)


# -- degree of a fixed vertex ----------------------------------------------------


def degree_pmf(n: int, backend: str = "rational") -> Pmf:
    """Degree of a fixed vertex, mixing over the uniform number ``L`` of later arrivals.

    Given ``L``, the in-degree is Bernoulli(1 - L/(n-1)) and the out-degree is
    Binomial(L, 1/(n-1)), independently.
    """
    _check_n(n)
    exact = _backend(backend)
    m = n - 1
    if exact:
        # common denominator n * m^(L+1) raised to n * m^n
        num = [0] * (n + 1)
        for L in range(n):
            scale = m ** (m - L)  # lift m^(L+1) to m^n
            for j in range(L + 1):
                b = math.comb(L, j) * (m - 1) ** (L - j)  # Bin(L, 1/m) times m^L
                num[j + 1] += scale * (m - L) * b
                num[j] += scale * L * b
        den = n * m**n
        return Pmf([Fraction(c, den) for c in num], 0, exact=True)
    kmax = n if n <= 400 else 60
    k = np.arange(kmax + 1)
    L = np.arange(n)
    pin = 1.0 - L / m
    binom = stats.binom.pmf(k[:, None], L[None, :], 1.0 / m)
    shifted = np.vstack([np.zeros((1, n)), binom[:-1]])
    probs = (binom * (1.0 - pin) + shifted * pin).mean(axis=1)
    return Pmf(probs, 0, exact=False, truncated=kmax < n)


def degree_pgf_closed(n: int, z: float) -> float:
    _check_n(n)
    if z == 1:
        return 1.0
    m = n - 1
    return 2.0 * (1.0 - 1.0 / n) * ((1.0 + (z - 1.0) / m) ** n - 1.0) / (z - 1.0) - 1.0


def degree_limit_point(k: int) -> float:
    """``P(D = k)`` for the limiting degree law."""
    if k < 0:
        return 0.0
    if k == 0:
        return 1.0 - 2.0 / math.e
    # (2/e) sum_{j>k} 1/j!  equals 2 * P(k+1, 1) (regularized lower gamma)
    return float(2.0 * special.gammainc(k + 1, 1.0))


def degree_limit_pmf(kmax: int) -> Pmf:
    if kmax < 0:
        raise DomainError("kmax must be >= 0")
    probs = [degree_limit_point(k) for k in range(kmax + 1)]
    left = degree_limit_tail(kmax + 1)
    if left > TAIL_CUTOFF:
        warnings.warn(
            f"limit degree law truncated at {kmax}; omitted mass {left:.3g}",
            TruncationWarning,
            stacklevel=2,
        )
    return Pmf(probs, 0, exact=False, truncated=True)


def degree_limit_tail(k: int) -> float:
    """``P(D >= k) = (2/e) sum_{l >= k+1} (l - k)/l!`` for ``k >= 1``."""
    if k <= 0:
        return 1.0
    terms = []
    term = 1.0 / math.factorial(k + 1)
    for ell in range(k + 1, k + 60):
        terms.append((ell - k) * term)
        term /= ell + 1
        if term < 1e-300:
            break
    return 2.0 / math.e * math.fsum(terms)


def degree_tail_bounds(k: int) -> tuple[float, float]:
    if k < 1:
        raise DomainError(f"tail bounds need k >= 1, got {k}")
    base = 2.0 / math.e / math.factorial(k + 1)
    return base, (1.0 + 1.0 / k) ** 2 * base


# -- pure-birth chain ---------------------------------------------------------------


@dataclass(frozen=True)
class YuleChainLaw:
    """Law of the pure-birth chain started at 1.

    ``plain``: from ``i`` step to ``i+1`` with probability ``i/(n-1)``.
    ``size_biased``: step up with probability ``(i+1)/n``.
    """

    n: int
    variant: str = "plain"
    backend: str = "rational"

    def __post_init__(self):
        _check_n(self.n)
        if self.variant not in ("plain", "size_biased"):
            raise ValidationError(f"unknown variant {self.variant!r}")
        _backend(self.backend)

    @property
    def _den(self) -> int:
        return self.n - 1 if self.variant == "plain" else self.n

    def _int_rows(self) -> Iterator[list[int]]:
        """Numerators ``c[i]``, ``i = 0..n``, over ``den**ell``, for ell = 0, 1, ..."""
        n, den = self.n, self._den
        plain = self.variant == "plain"
        c = [0] * (n + 1)
        c[1] = 1
        yield c
        for _ in range(n - 1):
            nxt = [0] * (n + 1)
            for i in range(1, n + 1):
                stay = c[i] * (den - i if plain else n - i - 1) if i < n else 0
                up = c[i - 1] * ((i - 1) if plain else i) if i >= 2 else 0
                nxt[i] = stay + up
            c = nxt
            yield c

    def _float_rows(self) -> Iterator[np.ndarray]:
        n = self.n
        i = np.arange(n + 1, dtype=np.float64)
        up = i / (n - 1) if self.variant == "plain" else (i + 1) / n
        up[n] = 0.0
        up[0] = 0.0
        p = np.zeros(n + 1)
        p[1] = 1.0
        yield p
        for _ in range(n - 1):
            nxt = p * (1.0 - up)
            nxt[1:] += p[:-1] * up[:-1]
            p = nxt
            yield p

    def rows(self) -> Iterator[Pmf]:
        """Successive laws at ``ell = 0, 1, ..., n - 1``."""
        if self.backend == "rational":
            for ell, c in enumerate(self._int_rows()):
                den = self._den**ell
                yield Pmf([Fraction(x, den) for x in c], 0, exact=True)
        else:
            for p in self._float_rows():
                yield Pmf(p, 0, exact=False)

    def pmf_at(self, ell: int) -> Pmf:
        if not 0 <= ell <= self.n - 1:
            raise DomainError(f"ell must lie in 0..{self.n - 1}, got {ell}")
        for i, row in enumerate(self.rows()):
            if i == ell:
                return row
        raise AssertionError("unreachable")


def yule_law(n: int, variant: str = "plain", backend: str = "rational") -> YuleChainLaw:
    return YuleChainLaw(n, variant, backend)


def _yule_tail(t: float, k: int) -> float:
    """``P(Y(t) > k)`` for a Yule process started at 1 (geometric law)."""
    return (-math.expm1(-max(t, 0.0))) ** k


def yule_rate_factor(n: int, k: int) -> float:
    """``-((n-1)/k) log(1 - k/(n-1))``."""
    if k >= n - 1:
        raise DomainError(f"rate factor undefined for k={k} >= n-1={n - 1}")
    m = n - 1
    return -(m / k) * math.log1p(-k / m)


def yule_sandwich(n: int, ell: int, k: int) -> tuple[float, float]:
    """Lower and upper bounds on ``P(chain at step ell > k)`` from Yule processes."""
    _check_n(n)
    if not 0 <= ell <= n - 1:
        raise DomainError(f"ell must lie in 0..{n - 1}, got {ell}")
    if k < 0:
        raise DomainError("k must be >= 0")
    if k == 0:
        return 1.0, 1.0
    lam = yule_rate_factor(n, k)
    lower = _yule_tail((ell - k + 1) / (n - 1), k)
    upper = _yule_tail(lam * ell / (n - 1), k)
    return lower, upper


def tree_tail_exact(n: int, k: int) -> float:
    """``P(chain at a uniform step L in 0..n-1 exceeds k)``, by a truncated DP."""
    _check_n(n)
    if k < 0:
        raise DomainError("k must be >= 0")
    m = n - 1
    # states 1..k kept explicitly; mass beyond k is absorbing
    p = np.zeros(k + 1)
    if k >= 1:
        p[1] = 1.0
    over = 0.0 if k >= 1 else 1.0
    i = np.arange(k + 1, dtype=np.float64)
    up = i / m
    acc = []
    for _ in range(n):
        acc.append(over)
        leave = p[k] * up[k] if k >= 1 else 0.0
        nxt = p * (1.0 - up)
        nxt[1:] += p[:-1] * up[:-1]
        p = nxt
        over += leave
    return math.fsum(acc) / n


def tree_tail_asymptotic(k: int) -> float:
    if k < 1:
        raise DomainError(f"need k >= 1, got {k}")
    return math.e / k * (1.0 - 1.0 / math.e) ** (k + 1)


# -- the tree containing vertex 1 ------------------------------------------------


def h1_pmf(n: int) -> Pmf:
    """Steps elapsed since the arrival of the root of vertex 1's tree."""
    _check_n(n)
    m = n - 1
    # h/(n m) * (n/m)^h over the common denominator m^(m+1)
    den = m ** (m + 1)
    return Pmf([Fraction(h * n ** (h - 1) * m ** (m - h), den) if h else 0 for h in range(n)],
               0, exact=True)


def t1_conditional(n: int, h: int, backend: str = "rational") -> Pmf:
    if not 0 <= h <= n - 1:
        raise DomainError(f"h must lie in 0..{n - 1}, got {h}")
    return YuleChainLaw(n, "size_biased", backend).pmf_at(h)


def t1_pmf(n: int, backend: str = "rational") -> Pmf:
    """Size of the tree containing vertex 1, mixing ``t1_conditional`` over ``h1_pmf``."""
    _check_n(n)
    exact = _backend(backend)
    m = n - 1
    if exact:
        # P(H=h) P(Y*=k) = h n^(h-1) m^(m-h) / m^(m+1) * c_h(k) / n^h
        num = [0] * (n + 1)
        for h, c in enumerate(YuleChainLaw(n, "size_biased")._int_rows()):
            w = h * m ** (m - h)
            if w:
                for k, x in enumerate(c):
                    if x:
                        num[k] += w * x
        den = n * m ** (m + 1)
        return Pmf([Fraction(x, den) for x in num], 0, exact=True)
    acc = np.zeros(n + 1)
    hs = np.arange(n, dtype=np.float64)
    weights = hs / (n * m) * np.exp(hs * math.log1p(1.0 / m))
    for h, p in enumerate(YuleChainLaw(n, "size_biased", "float")._float_rows()):
        acc += weights[h] * p
    return Pmf(acc, 0, exact=False)


# -- limits of tree sizes -----------------------------------------------------------

_CLOSED_FORM_MAX_K = 20


def _xexp_integral(a: float) -> float:
    """``int_0^1 x e^{-a x} dx``."""
    return -(math.expm1(-a) + a * math.exp(-a)) / (a * a)


def _tree_integral(k: int) -> float:
    """``int_0^1 x e^{-x} (1 - e^{-x})^(k-1) dx``."""
    if k < 1:
        return 0.0
    if k <= _CLOSED_FORM_MAX_K:
        return math.fsum(
            math.comb(k - 1, j) * (-1) ** j * _xexp_integral(j + 1.0) for j in range(k)
        )
    val, _ = integrate.quad(
        lambda x: x * math.exp(-x) * (-math.expm1(-x)) ** (k - 1), 0.0, 1.0,
        epsabs=0.0, epsrel=1e-12, limit=200,
    )
    return val


def limit_treeU_pmf(k: int) -> float:
    """Limiting probability that a uniformly chosen tree has ``k`` vertices."""
    return 2.0 * _tree_integral(k)


def limit_tree1_pmf(k: int) -> float:
    """Limiting probability that the tree of a fixed vertex has ``k`` vertices."""
    return k * _tree_integral(k)


def limit_tree_table(which: str = "uniform", tol: float = 1e-12, kmax: int | None = None) -> Pmf:
    """Truncated table of a limiting tree-size law.

    Without ``kmax`` the table grows until the omitted tail is below ``tol``.
    For ``k >= 5`` successive ratios of both laws stay below 0.66, so the tail
    beyond ``k`` is at most ``2 p(k)``.
    """
    if which not in ("uniform", "vertex1"):
        raise ValidationError(f"unknown tree law {which!r}")
    f = limit_treeU_pmf if which == "uniform" else limit_tree1_pmf
    probs = [0.0]
    k = 0
    while True:
        k += 1
        probs.append(f(k))
        if kmax is not None:
            if k >= kmax:
                break
        elif k >= 5 and 2.0 * probs[-1] < tol:
            break
    return Pmf(probs, 0, exact=False, truncated=True)


# -- centering sequences ---------------------------------------------------------


def _check_iterated_log(n: float) -> None:
    if n <= math.e**math.e:
        raise DomainError(f"iterated logarithms need n > e^e (about 15.15), got {n}")


def maxdegree_prediction(n: float) -> float:
    _check_iterated_log(n)
    l1 = math.log(n)
    l2 = math.log(l1)
    l3 = math.log(l2)
    return l1 / l2 + l1 * l3 / l2**2


def maxtree_prediction(n: float) -> float:
    _check_iterated_log(n)
    l1 = math.log(n)
    return ALPHA * (l1 - math.log(l1))


# -- central limit ---------------------------------------------------------------


@dataclass(frozen=True)
class LatticeLaw:
    """A discrete law on arbitrary real points, sorted increasingly."""

    points: np.ndarray
    probs: np.ndarray

    def mean(self) -> float:
        return float(np.dot(self.points, self.probs))

    def var(self) -> float:
        mu = self.mean()
        return float(np.dot((self.points - mu) ** 2, self.probs))


def clt_normalized_dist(n: int) -> LatticeLaw:
    """Number of trees centered by ``n/2`` and scaled by ``sqrt(n/6)``."""
    pmf = ntrees_pmf(n, "float")
    k = np.arange(pmf.lo, pmf.hi + 1, dtype=np.float64)
    return LatticeLaw((k - n / 2.0) / math.sqrt(n / 6.0), np.asarray(pmf.probs))


def ks_to_normal(law: LatticeLaw) -> float:
    """Kolmogorov distance between a lattice law and the standard normal."""
    right = np.cumsum(law.probs)
    left = right - law.probs
    phi = stats.norm.cdf(law.points)
    return float(max(np.max(np.abs(right - phi)), np.max(np.abs(left - phi))))
