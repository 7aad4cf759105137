"""Finite-support reproduction laws.

A :class:`PointProcessLaw` is a finite list of atoms; each atom fixes the
offspring count and the displacement of every child.  Everything the rest of
the package needs from a law is an exponential polynomial in the tilt,

    L(theta) = sum_b a_b exp(-theta b),   a_b = E[#children at displacement b],

so Laplace values, cumulant derivatives and the tilted spine step law are
exact atom sums.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidLawError

PROB_TOL = 1e-12


def as_fraction(value) -> Fraction:
    """Exact rational for an int, Fraction, decimal string or float."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise InvalidLawError(f"displacement {value!r} is not finite")
        return Fraction(repr(value))
    return Fraction(str(value).strip())


@dataclass(frozen=True)
class OffspringAtom:
    probability: float
    displacements: tuple

    def __post_init__(self):
        p = float(self.probability)
        if not (0.0 < p <= 1.0 + PROB_TOL):
            raise InvalidLawError(f"atom probability {p} outside (0, 1]")
        object.__setattr__(self, "probability", p)
        object.__setattr__(self, "displacements",
                           tuple(as_fraction(d) for d in self.displacements))

    @property
    def n_children(self) -> int:
        return len(self.displacements)


@dataclass(frozen=True)
class PointProcessLaw:
    atoms: tuple

    def __post_init__(self):
        atoms = tuple(a if isinstance(a, OffspringAtom) else OffspringAtom(*a) for a in self.atoms)
        if not atoms:
            raise InvalidLawError("a point-process law needs at least one atom")
        total = math.fsum(a.probability for a in atoms)
        if abs(total - 1.0) > PROB_TOL:
            raise InvalidLawError(f"atom probabilities sum to {total!r}, not 1")
        if all(a.n_children == 0 for a in atoms):
            raise InvalidLawError("every atom has N = 0; the Laplace transform vanishes")
        object.__setattr__(self, "atoms", atoms)

    @classmethod
    def from_pairs(cls, pairs: Iterable) -> "PointProcessLaw":
        """Build from ``[(p, [d1, d2, ...]), ...]``."""
        return cls(tuple(OffspringAtom(p, tuple(ds)) for p, ds in pairs))

    @classmethod
    def deterministic(cls, displacements: Sequence) -> "PointProcessLaw":
        return cls((OffspringAtom(1.0, tuple(displacements)),))

    @cached_property
    def coefficients(self) -> tuple:
        """Sorted ``((b, a_b), ...)`` with ``L(theta) = sum a_b exp(-theta b)``."""
        acc: dict = {}
        for atom in self.atoms:
            for d in atom.displacements:
                acc[d] = acc.get(d, 0.0) + atom.probability
        return tuple(sorted(acc.items()))

    @cached_property
    def denominator(self) -> int:
        """Least common denominator of all displacements."""
        den = 1
        for atom in self.atoms:
            for d in atom.displacements:
                den = math.lcm(den, d.denominator)
        return den

    @property
    def max_offspring(self) -> int:
        return max(a.n_children for a in self.atoms)

    @property
    def mean_offspring(self) -> float:
        return math.fsum(a.probability * a.n_children for a in self.atoms)

    @property
    def probabilities(self) -> np.ndarray:
        return np.array([a.probability for a in self.atoms])

    def distinct_displacements(self) -> tuple:
        return tuple(b for b, _ in self.coefficients)

    def _exponents(self, theta):
        b = np.array([float(x) for x, _ in self.coefficients])
        a = np.array([w for _, w in self.coefficients])
        return b, np.log(a) - theta * b

    def __str__(self):
        parts = []
        for atom in self.atoms:
            ds = ", ".join(str(d) for d in atom.displacements)
            parts.append(f"{atom.probability:g}: ({ds})")
        return "{" + "; ".join(parts) + "}"


@dataclass(frozen=True)
class LaplaceProfile:
    theta: float
    L: float
    kappa: float
    d1: float
    d2: float
    d3: float
    d4: float


def laplace_profile(law: PointProcessLaw, theta: float) -> LaplaceProfile:
    """Log-Laplace value and cumulant derivatives of ``law`` at ``theta``.

    The derivatives are cumulants of ``-b`` under the weights
    ``a_b exp(-theta b) / L(theta)``; they are evaluated with a log-sum-exp
    shift so large tilts do not overflow.
    """
    theta = float(theta)
    if not math.isfinite(theta):
        raise InvalidLawError(f"tilt {theta!r} is not finite")
    b, expo = law._exponents(theta)
    top = expo.max()
    w = np.exp(expo - top)
    s = w.sum()
    kappa = float(top + math.log(s))
    w = w / s
    y = -b
    m1 = float(w @ y)
    c = y - m1
    c2 = float(w @ c**2)
    c3 = float(w @ c**3)
    c4 = float(w @ c**4)
    return LaplaceProfile(
        theta=theta,
        L=math.exp(kappa) if kappa < 700 else math.inf,
        kappa=kappa,
        d1=m1,
        d2=c2,
        d3=c3,
        d4=c4 - 3.0 * c2 * c2,
    )


def log_laplace(law: PointProcessLaw, theta: float) -> float:
    return laplace_profile(law, theta).kappa


def sample_offspring(law: PointProcessLaw, rng: np.random.Generator) -> tuple:
    """Displacements of one reproduction event."""
    k = rng.choice(len(law.atoms), p=law.probabilities)
    return law.atoms[k].displacements


@dataclass(frozen=True)
class SpineStepLaw:
    """Joint law of (spine displacement, parent offspring count).

    ``atoms`` holds ``(x, xi, mass)`` triples, one per distinct pair.
    With a finite ``cap`` the pairs with ``xi > cap`` are dropped, so the
    masses sum to less than one.
    """

    atoms: tuple
    tilt: float
    cap: float = math.inf

    @cached_property
    def x(self) -> np.ndarray:
        return np.array([float(a[0]) for a in self.atoms])

    @cached_property
    def xi(self) -> np.ndarray:
        return np.array([a[1] for a in self.atoms], dtype=np.int64)

    @cached_property
    def mass(self) -> np.ndarray:
        return np.array([a[2] for a in self.atoms])

    @property
    def total_mass(self) -> float:
        return math.fsum(a[2] for a in self.atoms)

    def mean_x(self) -> float:
        return float(self.mass @ self.x)

    def var_x(self) -> float:
        m = self.mean_x()
        return float(self.mass @ (self.x - m) ** 2)

    def xi_tail(self, x: float) -> float:
        """P(xi > x)."""
        return math.fsum(a[2] for a in self.atoms if a[1] > x)


def spine_step_law(law: PointProcessLaw, vartheta: float, cap=math.inf) -> SpineStepLaw:
    """Tilted (displacement, offspring count) law of one spine step.

    The pair ``(zeta, N)`` of an atom-child receives mass
    ``p(atom) exp(-vartheta zeta) / L(vartheta)``.
    """
    kappa = laplace_profile(law, vartheta).kappa
    if not math.isfinite(kappa):
        raise InvalidLawError(f"L({vartheta}) is not finite")
    acc: dict = {}
    for atom in law.atoms:
        n = atom.n_children
        if n > cap:
            continue
        for d in atom.displacements:
            key = (d, n)
            acc[key] = acc.get(key, 0.0) + atom.probability * math.exp(-vartheta * float(d) - kappa)
    atoms = tuple((d, n, m) for (d, n), m in sorted(acc.items()))
    return SpineStepLaw(atoms=atoms, tilt=float(vartheta), cap=cap)


def weighted_xi_tail(law: PointProcessLaw, vartheta: float, x: float) -> float:
    """(E 1{N > x} sum exp(-vartheta zeta)) / (E sum exp(-vartheta zeta)), directly on atoms."""
    num = 0.0
    den = 0.0
    for atom in law.atoms:
        s = math.fsum(math.exp(-vartheta * float(d)) for d in atom.displacements)
        den += atom.probability * s
        if atom.n_children > x:
            num += atom.probability * s
    return num / den


def window_mass(law: PointProcessLaw, vartheta: float, kappa_at: float,
                lo: float, hi: float, max_n: float = math.inf) -> float:
    """E(1{N <= max_n} sum_i 1{vartheta zeta_i + kappa_at in [lo, hi]})."""
    total = 0.0
    for atom in law.atoms:
        if atom.n_children > max_n:
            continue
        hits = sum(1 for d in atom.displacements if lo <= vartheta * float(d) + kappa_at <= hi)
        total += atom.probability * hits
    return total
