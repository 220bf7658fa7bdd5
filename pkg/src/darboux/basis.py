"""Closed-form radial basis solutions with analytic derivative closures.

Every transformation chain is assembled from one-channel solutions of

    b''(r) = (v(r) - lam) b(r),      lam = k**2 or -k**2,

where v is a channel potential (free, or a centrifugal tail l(l+1)/r**2).
The block-matrix determinants downstream need high-order derivatives of
these functions evaluated exactly, so every kind carries a closed-form
p-th derivative instead of a numeric one.

Units follow the scattering convention hbar**2/(2*mu) = 1: lengths in fm,
wavenumbers in 1/fm, energies in 1/fm**2.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "ChannelPotential",
    "FREE_CHANNEL",
    "D_WAVE_CHANNEL",
    "centrifugal",
    "sampled_channel",
    "RadialFunction",
    "Constant",
    "BasisSolution",
    "Superposition",
    "make_basis",
    "scaled",
    "BASIS_KINDS",
]


# ---------------------------------------------------------------------------
# channel potentials
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ChannelPotential:
    """Diagonal background potential of a single channel.

    ``kind`` is one of ``"free"``, ``"centrifugal"`` or ``"sampled"``.
    ``value(r)`` evaluates v(r); ``deriv(r, p)`` gives d^p v / dr^p, which
    exists in closed form for the first two kinds and must be supplied by
    the caller for sampled potentials.
    """

    kind: str
    l: int = 0
    evaluator: Callable[[float], float] | None = field(default=None, compare=False)
    derivative: Callable[[float, int], float] | None = field(default=None, compare=False)

    def value(self, r: float) -> float:
        if self.kind == "free":
            return 0.0
        if self.kind == "centrifugal":
            if r <= 0.0:
                raise ValueError("centrifugal potential requires r > 0")
            return self.l * (self.l + 1) / (r * r)
        return float(self.evaluator(r))

    def deriv(self, r: float, p: int) -> float:
        if p == 0:
            return self.value(r)
        if self.kind == "free":
            return 0.0
        if self.kind == "centrifugal":
            # d^p r^-2 = (-1)^p (p+1)! r^-(p+2)
            sign = -1.0 if p % 2 else 1.0
            return self.l * (self.l + 1) * sign * math.factorial(p + 1) / r ** (p + 2)
        if self.derivative is None:
            raise ValueError("sampled channel has no derivative closure")
        return float(self.derivative(r, p))


FREE_CHANNEL = ChannelPotential("free")
D_WAVE_CHANNEL = ChannelPotential("centrifugal", l=2)


def centrifugal(l: int) -> ChannelPotential:
    if l < 0:
        raise ValueError("angular momentum must be non-negative")
    return ChannelPotential("centrifugal", l=l)


def sampled_channel(evaluator, derivative=None) -> ChannelPotential:
    return ChannelPotential("sampled", evaluator=evaluator, derivative=derivative)


# ---------------------------------------------------------------------------
# radial functions
# ---------------------------------------------------------------------------

class RadialFunction:
    """A scalar function of r > 0 with derivatives of arbitrary order."""

    def deriv(self, r: float, p: int = 0) -> complex:
        raise NotImplementedError

    def __call__(self, r: float) -> complex:
        return self.deriv(r, 0)

    def jet(self, r: float, order: int) -> np.ndarray:
        """Array [f, f', ..., f^(order)] at r."""
        return np.array([self.deriv(r, p) for p in range(order + 1)], dtype=complex)

    def taylor(self, r: float, order: int) -> np.ndarray:
        """Taylor coefficients f^(p)(r)/p! for p = 0..order."""
        out = self.jet(r, order)
        for p in range(2, order + 1):
            out[p] /= math.factorial(p)
        return out

    def conjugate(self) -> "RadialFunction":
        raise NotImplementedError

    @property
    def spectral_value(self):
        """Eigenvalue lam with b'' = (v - lam) b, or None for constants."""
        return None


@dataclass(frozen=True)
class Constant(RadialFunction):
    value: complex = 0.0

    def deriv(self, r: float, p: int = 0) -> complex:
        return complex(self.value) if p == 0 else 0.0

    def conjugate(self) -> "Constant":
        return Constant(complex(self.value).conjugate())


# --- Riccati-Bessel j2 helpers ---------------------------------------------
#
# regular d-wave: phi_d(kr) = i * jhat2(kr),
#   jhat2(x) = ((3 - x**2) sin x - 3 x cos x) / x**2.
# The trig form cancels catastrophically for |x| << 1 (value ~ x**3/15 built
# from terms ~ 3/x), so small arguments use the power series instead.

# Series up to x^55 converges to machine precision for |x| <= 2; beyond
# that the trig form no longer cancels badly even for 8th derivatives.
_J2_SERIES_TERMS = 26
_J2_SWITCH = 2.0

# series coefficients of jhat2(x) = sum_s c_s x^(2s+3)
_J2_COEFS: list[float] = []


def _j2_coefs() -> list[float]:
    if not _J2_COEFS:
        dfact = 15.0  # (2s+5)!! at s = 0
        fact = 1.0
        c = []
        for s in range(_J2_SERIES_TERMS):
            if s > 0:
                fact *= s
                dfact *= 2 * s + 5
            c.append((-0.5) ** s / (fact * dfact))
        _J2_COEFS.extend(c)
    return _J2_COEFS


# Laurent tables A_p, B_p with d^p jhat2 = A_p(x) sin x + B_p(x) cos x,
# stored as {power: coefficient} dictionaries.
_J2_TRIG_TABLES: list[tuple[dict, dict]] = [({-2: 3.0, 0: -1.0}, {-1: -3.0})]


def _laurent_deriv(poly: dict) -> dict:
    out: dict = {}
    for n, c in poly.items():
        if n != 0:
            out[n - 1] = out.get(n - 1, 0.0) + c * n
    return out


def _laurent_add(a: dict, b: dict, sign: float) -> dict:
    out = dict(a)
    for n, c in b.items():
        out[n] = out.get(n, 0.0) + sign * c
    return {n: c for n, c in out.items() if c != 0.0}


def _j2_trig_table(p: int) -> tuple[dict, dict]:
    while len(_J2_TRIG_TABLES) <= p:
        a, b = _J2_TRIG_TABLES[-1]
        _J2_TRIG_TABLES.append((_laurent_add(_laurent_deriv(a), b, -1.0),
                                _laurent_add(_laurent_deriv(b), a, +1.0)))
    return _J2_TRIG_TABLES[p]


def _laurent_eval(poly: dict, x: complex) -> complex:
    return sum(c * x ** n for n, c in poly.items())


def _riccati_j2_deriv(x: complex, p: int) -> complex:
    """p-th derivative of jhat2 at x (complex-safe, stable near x = 0)."""
    if abs(x) < _J2_SWITCH:
        coefs = _j2_coefs()
        total = 0.0 + 0.0j
        for s, c in enumerate(coefs):
            n = 2 * s + 3
            if n < p:
                continue
            term = c * math.factorial(n) / math.factorial(n - p)
            total += term * x ** (n - p)
        return total
    a, b = _j2_trig_table(p)
    return _laurent_eval(a, x) * cmath.sin(x) + _laurent_eval(b, x) * cmath.cos(x)


# --- basis solutions --------------------------------------------------------

BASIS_KINDS = ("jost_s", "jost_d", "regular_s", "regular_d", "exp", "sinh", "cosh")

# which channel each kind solves, and the sign of lam relative to k**2
_KIND_CHANNEL = {
    "jost_s": "free", "regular_s": "free", "exp": "free",
    "sinh": "free", "cosh": "free",
    "jost_d": "d", "regular_d": "d",
}
_HYPERBOLIC = {"exp", "sinh", "cosh"}


@dataclass(frozen=True)
class BasisSolution(RadialFunction):
    """One-channel closed-form solution with exact derivatives.

    Kinds (x = k r):
        jost_s      exp(i x)
        jost_d      exp(i x) (1 + 3i/x - 3/x**2)
        regular_s   i sin(x)
        regular_d   i ((3 - x**2) sin x - 3 x cos x) / x**2
        exp         exp(x)
        sinh, cosh  hyperbolic pair

    The s/d (oscillatory) kinds have lam = k**2; the hyperbolic kinds have
    lam = -k**2.  d kinds solve the l = 2 centrifugal channel, the rest the
    free channel.
    """

    kind: str
    k: complex
    channel: ChannelPotential = FREE_CHANNEL

    def __post_init__(self):
        if self.kind not in BASIS_KINDS:
            raise ValueError(f"unknown basis kind {self.kind!r}")
        want = _KIND_CHANNEL[self.kind]
        if want == "d":
            if self.channel.kind != "centrifugal" or self.channel.l != 2:
                raise ValueError(f"{self.kind} requires the l=2 centrifugal channel")
        if self.k == 0:
            raise ValueError("wavenumber must be nonzero")

    @property
    def spectral_value(self) -> complex:
        k2 = complex(self.k) ** 2
        return -k2 if self.kind in _HYPERBOLIC else k2

    def deriv(self, r: float, p: int = 0) -> complex:
        k = complex(self.k)
        kind = self.kind
        if kind == "exp":
            return k ** p * cmath.exp(k * r)
        if kind == "cosh":
            x = k * r
            val = cmath.cosh(x) if p % 2 == 0 else cmath.sinh(x)
            return k ** p * val
        if kind == "sinh":
            x = k * r
            val = cmath.sinh(x) if p % 2 == 0 else cmath.cosh(x)
            return k ** p * val
        if kind == "jost_s":
            return (1j * k) ** p * cmath.exp(1j * k * r)
        if kind == "regular_s":
            x = k * r
            cyc = p % 4
            if cyc == 0:
                val = cmath.sin(x)
            elif cyc == 1:
                val = cmath.cos(x)
            elif cyc == 2:
                val = -cmath.sin(x)
            else:
                val = -cmath.cos(x)
            return 1j * k ** p * val
        if kind == "regular_d":
            if r <= 0.0:
                raise ValueError("regular_d defined for r > 0")
            return 1j * k ** p * _riccati_j2_deriv(k * r, p)
        # jost_d: exp(ikr) * g(r) with g = 1 + a/r + b/r**2
        if r <= 0.0:
            raise ValueError("jost_d has a pole at r = 0")
        a = 3j / k
        b = -3.0 / (k * k)
        ik = 1j * k
        e = cmath.exp(ik * r)
        total = 0.0 + 0.0j
        for j in range(p + 1):
            if j == 0:
                g = 1.0 + a / r + b / (r * r)
            else:
                sign = -1.0 if j % 2 else 1.0
                g = sign * (math.factorial(j) * a / r ** (j + 1)
                            + math.factorial(j + 1) * b / r ** (j + 2))
            total += math.comb(p, j) * ik ** (p - j) * g
        return e * total

    def conjugate(self) -> RadialFunction:
        kc = complex(self.k).conjugate()
        if self.kind in _HYPERBOLIC:
            return BasisSolution(self.kind, kc, self.channel)
        if self.kind in ("jost_s", "jost_d"):
            return BasisSolution(self.kind, -kc, self.channel)
        # regular kinds carry an explicit factor i
        return Superposition([(-1.0, BasisSolution(self.kind, kc, self.channel))])

    def equation_residual(self, r: float) -> float:
        """Relative residual of b'' = (v - lam) b at r."""
        b = self.deriv(r, 0)
        b2 = self.deriv(r, 2)
        rhs = (self.channel.value(r) - self.spectral_value) * b
        scale = abs(b2) + abs(rhs) + 1e-300
        return abs(b2 - rhs) / scale


@dataclass(frozen=True)
class Superposition(RadialFunction):
    """Finite linear combination sum_i c_i f_i(r)."""

    terms: tuple[tuple[complex, RadialFunction], ...]

    def __init__(self, terms: Sequence[tuple[complex, RadialFunction]]):
        object.__setattr__(self, "terms", tuple((complex(c), f) for c, f in terms))

    def deriv(self, r: float, p: int = 0) -> complex:
        return sum(c * f.deriv(r, p) for c, f in self.terms)

    def conjugate(self) -> "Superposition":
        out = []
        for c, f in self.terms:
            g = f.conjugate()
            if isinstance(g, Superposition):
                for c2, f2 in g.terms:
                    out.append((c.conjugate() * c2, f2))
            else:
                out.append((c.conjugate(), g))
        return Superposition(out)

    @property
    def spectral_value(self):
        vals = [f.spectral_value for _, f in self.terms if f.spectral_value is not None]
        if not vals:
            return None
        first = vals[0]
        for v in vals[1:]:
            if abs(v - first) > 1e-12 * (1.0 + abs(first)):
                raise ValueError("superposition mixes spectral values")
        return first


def make_basis(kind: str, k: complex, channel: ChannelPotential | None = None) -> BasisSolution:
    """Build a basis solution, defaulting the channel from the kind."""
    if channel is None:
        channel = D_WAVE_CHANNEL if _KIND_CHANNEL.get(kind) == "d" else FREE_CHANNEL
    return BasisSolution(kind, k, channel)


def scaled(coefficient: complex, fn: RadialFunction) -> Superposition:
    return Superposition([(coefficient, fn)])
