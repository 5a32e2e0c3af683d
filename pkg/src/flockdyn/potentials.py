r"""Quasi-Morse, Morse, and generalized Morse-like interaction potentials.

The Quasi-Morse potential is built from the fundamental solution of the
screened Laplacian ``Delta - k^2 Id`` and its C-weighted, ell-rescaled copy:

    U(r) = (2 pi)^{-n/2} r^{1-n/2} k^{n/2-1}
           [ C ell^{n/2-1} K_{n/2-1}(k r / ell) - K_{n/2-1}(k r) ]

which reduces to ``(1/(4 pi r)) (C ell e^{-k r/ell} - e^{-k r})`` in 3-D and
to ``(1/(2 pi)) (C K_0(k r/ell) - K_0(k r))`` in 2-D.  Attraction strength
and length scale are normalized to one, so the model is the tuple
(n, C, ell, k).

The module also evaluates radial force magnitudes U'(r), the aggregate
parameter ``A = k^2 (1 - C ell^n) / (C ell^n - ell^2)`` whose sign decides
flock existence, and the (C, ell) phase-diagram classification.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from . import specfun
from .errors import DegenerateDenominatorError, DomainError

#: tolerance on |C ell^n - 1| for separatrix / zero-sign classification
EPS_A = 1e-10

_TWO_PI = 2.0 * math.pi


class Sign(enum.Enum):
    POSITIVE = "positive"
    ZERO = "zero"
    NEGATIVE = "negative"


class Region(enum.Enum):
    REGION_I = "region_i"
    REGION_II = "region_ii"
    SEPARATRIX = "separatrix"
    OUTSIDE = "outside"


@dataclass(frozen=True)
class ModelParams:
    """Quasi-Morse parameter tuple: dimension, repulsion strength/scale, decay."""

    n: int
    C: float
    ell: float
    k: float

    def __post_init__(self):
        if self.n not in (2, 3):
            raise DomainError(f"dimension must be 2 or 3, got {self.n}")
        if not (self.C > 0.0 and self.ell > 0.0 and self.k > 0.0):
            raise DomainError("C, ell and k must be strictly positive")

    def to_dict(self) -> dict:
        return {"n": self.n, "C": self.C, "ell": self.ell, "k": self.k}

    @classmethod
    def from_dict(cls, d: dict) -> "ModelParams":
        return cls(n=int(d["n"]), C=float(d["C"]), ell=float(d["ell"]), k=float(d["k"]))


@dataclass(frozen=True)
class QuasiMorse:
    params: ModelParams


@dataclass(frozen=True)
class Morse:
    """Conventional Morse potential C_R e^{-r/ell_R} - C_A e^{-r/ell_A}."""

    C_R: float
    C_A: float
    ell_R: float
    ell_A: float

    def __post_init__(self):
        if min(self.C_R, self.C_A, self.ell_R, self.ell_A) <= 0.0:
            raise DomainError("Morse strengths and scales must be positive")


@dataclass(frozen=True)
class MorseLike:
    """U = V - C V(./ell) with V(r) = -exp(-r^p / p); interpolates in p."""

    p: float
    C: float
    ell: float

    def __post_init__(self):
        if min(self.p, self.C, self.ell) <= 0.0:
            raise DomainError("MorseLike requires p, C, ell > 0")


PotentialSpec = Union[QuasiMorse, Morse, MorseLike]


def potential_to_dict(spec: PotentialSpec) -> dict:
    """Canonical JSON-friendly encoding with a ``kind`` tag."""
    if isinstance(spec, QuasiMorse):
        return {"kind": "quasi_morse", **spec.params.to_dict()}
    if isinstance(spec, Morse):
        return {
            "kind": "morse",
            "C_R": spec.C_R,
            "C_A": spec.C_A,
            "ell_R": spec.ell_R,
            "ell_A": spec.ell_A,
        }
    if isinstance(spec, MorseLike):
        return {"kind": "morse_like", "p": spec.p, "C": spec.C, "ell": spec.ell}
    raise TypeError(f"not a potential spec: {spec!r}")


def potential_from_dict(d: dict) -> PotentialSpec:
    kind = d.get("kind")
    if kind == "quasi_morse":
        return QuasiMorse(ModelParams.from_dict(d))
    if kind == "morse":
        return Morse(
            C_R=float(d["C_R"]),
            C_A=float(d["C_A"]),
            ell_R=float(d["ell_R"]),
            ell_A=float(d["ell_A"]),
        )
    if kind == "morse_like":
        return MorseLike(p=float(d["p"]), C=float(d["C"]), ell=float(d["ell"]))
    raise ValueError(f"unknown potential kind: {kind!r}")


@dataclass(frozen=True)
class RegimeClass:
    """Phase-diagram classification of one (C, ell) point."""

    biologically_relevant: bool
    h_stable: bool
    region: Region
    a_sign: Sign


def _positive_radii(r):
    arr = np.asarray(r, dtype=np.float64)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    if np.any(arr <= 0.0):
        raise DomainError("potential is singular at r = 0; r must be > 0")
    return arr, scalar


def quasi_morse_u(params: ModelParams, r):
    """Quasi-Morse potential U(r); r > 0, scalar or array."""
    arr, scalar = _positive_radii(r)
    n, C, ell, k = params.n, params.C, params.ell, params.k
    nu = 0.5 * n - 1.0
    pref = _TWO_PI ** (-0.5 * n) * k**nu * arr ** (1.0 - 0.5 * n)
    rep = C * ell**nu * specfun.bessel_k(nu, k * arr / ell)
    att = specfun.bessel_k(nu, k * arr)
    out = pref * (rep - att)
    return float(out[0]) if scalar else out


def _quasi_morse_du(params: ModelParams, arr):
    # d/dr [r^{1-n/2} K_{n/2-1}(b r)] = -b r^{1-n/2} K_{n/2}(b r)
    n, C, ell, k = params.n, params.C, params.ell, params.k
    half = 0.5 * n
    pref = _TWO_PI ** (-half) * k**half * arr ** (1.0 - half)
    return pref * (
        specfun.bessel_k(half, k * arr)
        - C * ell ** (half - 2.0) * specfun.bessel_k(half, k * arr / ell)
    )


def potential_value(spec: PotentialSpec, r):
    """U(r) for any supported potential kind; r > 0, scalar or array."""
    if isinstance(spec, QuasiMorse):
        return quasi_morse_u(spec.params, r)
    arr, scalar = _positive_radii(r)
    if isinstance(spec, Morse):
        out = spec.C_R * np.exp(-arr / spec.ell_R) - spec.C_A * np.exp(-arr / spec.ell_A)
    elif isinstance(spec, MorseLike):
        p, C, ell = spec.p, spec.C, spec.ell
        out = -np.exp(-(arr**p) / p) + C * np.exp(-((arr / ell) ** p) / p)
    else:
        raise TypeError(f"not a potential spec: {spec!r}")
    return float(out[0]) if scalar else out


def potential_force_magnitude(spec: PotentialSpec, r):
    """Radial derivative U'(r), so that grad W(x) = U'(|x|) x/|x|."""
    arr, scalar = _positive_radii(r)
    if isinstance(spec, QuasiMorse):
        out = _quasi_morse_du(spec.params, arr)
    elif isinstance(spec, Morse):
        out = -spec.C_R / spec.ell_R * np.exp(-arr / spec.ell_R) + (
            spec.C_A / spec.ell_A
        ) * np.exp(-arr / spec.ell_A)
    elif isinstance(spec, MorseLike):
        p, C, ell = spec.p, spec.C, spec.ell
        out = arr ** (p - 1.0) * np.exp(-(arr**p) / p) - (C / ell) * (
            arr / ell
        ) ** (p - 1.0) * np.exp(-((arr / ell) ** p) / p)
    else:
        raise TypeError(f"not a potential spec: {spec!r}")
    return float(out[0]) if scalar else out


def aggregate_param(params: ModelParams) -> tuple[float, float]:
    """Aggregate potential parameter A = k^2 (1 - C ell^n)/(C ell^n - ell^2)
    and a = sqrt(|A|)."""
    n, C, ell, k = params.n, params.C, params.ell, params.k
    celln = C * ell**n
    den = celln - ell * ell
    if abs(den) < 1e-12 * k * k:
        raise DegenerateDenominatorError(
            f"C ell^n - ell^2 = {den:.3e} is numerically degenerate"
        )
    A = k * k * (1.0 - celln) / den
    return A, math.sqrt(abs(A))


def classify(params: ModelParams) -> RegimeClass:
    """Phase-diagram classification; total in the parameters."""
    n, C, ell = params.n, params.C, params.ell
    bio = (C * ell ** (n - 2) > 1.0) and (ell < 1.0)
    celln = C * ell**n
    h_stable = celln > 1.0
    s = 1.0 - celln  # sign of A's numerator
    den = celln - ell * ell

    if abs(s) <= EPS_A:
        a_sign = Sign.ZERO
    elif den == 0.0:
        # A diverges; report the numerator's sign (den -> 0+ convention)
        a_sign = Sign.POSITIVE if s > 0.0 else Sign.NEGATIVE
    else:
        a_sign = Sign.POSITIVE if s * den > 0.0 else Sign.NEGATIVE

    if not bio:
        region = Region.OUTSIDE
    elif abs(s) <= EPS_A:
        region = Region.SEPARATRIX
    elif celln < 1.0:
        region = Region.REGION_I
    else:
        region = Region.REGION_II
    return RegimeClass(
        biologically_relevant=bio, h_stable=h_stable, region=region, a_sign=a_sign
    )


def morse_like_regime(spec: MorseLike, n: int) -> tuple[bool, bool]:
    """(biologically_relevant, h_stable) for the Morse-like family.

    Only the inequality checks ell < 1, C > ell^p and C ell^n > 1 are
    reported; existence of the potential minimum is not certified for
    general p.
    """
    relevant = spec.ell < 1.0 and spec.C > spec.ell**spec.p
    h_stable = spec.C * spec.ell**n > 1.0
    return relevant, h_stable


def minimum_radius(spec: PotentialSpec, r_lo: float = None, r_hi: float = None) -> float:
    """Radius of the potential minimum, located by a geometric scan for the
    sign change of U' followed by bisection.

    Raises DomainError if no sign change is found in the scan window.
    """
    if isinstance(spec, QuasiMorse):
        scale = spec.params.ell / max(spec.params.k, 1e-6)
    elif isinstance(spec, Morse):
        scale = spec.ell_R
    else:
        scale = spec.ell
    lo = r_lo if r_lo is not None else 1e-4 * scale
    hi = r_hi if r_hi is not None else 1e3 * scale

    grid = np.geomspace(lo, hi, 512)
    vals = potential_force_magnitude(spec, grid)
    sign_change = np.nonzero((vals[:-1] < 0.0) & (vals[1:] >= 0.0))[0]
    if len(sign_change) == 0:
        raise DomainError("no minimum of U found in the scan window")
    a, b = grid[sign_change[0]], grid[sign_change[0] + 1]
    for _ in range(200):
        mid = 0.5 * (a + b)
        if potential_force_magnitude(spec, mid) < 0.0:
            a = mid
        else:
            b = mid
        if b - a <= 1e-15 * b:
            break
    return 0.5 * (a + b)
