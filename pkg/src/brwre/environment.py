"""Environment mixtures, realized environment sequences and barrier curves."""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, InvalidLawError
from .pointprocess import PROB_TOL, PointProcessLaw, laplace_profile
from .streams import MASK64, generator

REPLAY_MAGIC = "BRWRE-ENV v1"
_HEADER = re.compile(r"^BRWRE-ENV v1 seed=(\d+) n=(\d+) components=(\d+)$")


@dataclass(frozen=True)
class EnvironmentLaw:
    """Finite mixture ``sum_k w_k delta_{law_k}`` over point-process laws."""

    components: tuple

    def __post_init__(self):
        comps = tuple((float(w), law) for w, law in self.components)
        if not comps:
            raise InvalidLawError("no components")
        for w, law in comps:
            if not (0.0 <= w <= 1.0 + PROB_TOL):
                raise InvalidLawError(f"component weight {w} outside [0, 1]")
            if not isinstance(law, PointProcessLaw):
                raise InvalidLawError("components must be PointProcessLaw instances")
        total = math.fsum(w for w, _ in comps)
        if abs(total - 1.0) > PROB_TOL:
            raise InvalidLawError(f"weights sum {total:g} ≠ 1")
        object.__setattr__(self, "components", comps)

    @classmethod
    def degenerate(cls, law: PointProcessLaw) -> "EnvironmentLaw":
        return cls(((1.0, law),))

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for w, _ in self.components])

    @property
    def laws(self) -> tuple:
        return tuple(law for _, law in self.components)

    def __len__(self):
        return len(self.components)

    @property
    def denominator(self) -> int:
        den = 1
        for law in self.laws:
            den = math.lcm(den, law.denominator)
        return den


@dataclass(frozen=True, eq=False)
class EnvironmentSequence:
    """A realization ``L_1..L_n`` stored as component indices."""

    indices: np.ndarray
    seed: int
    source: EnvironmentLaw = field(repr=False)

    def __post_init__(self):
        idx = np.array(self.indices, dtype=np.int64)
        if idx.ndim != 1 or idx.size == 0:
            raise InvalidLawError("an environment sequence needs n >= 1 indices")
        if idx.min() < 0 or idx.max() >= len(self.source):
            raise InvalidLawError("component index out of range")
        idx.setflags(write=False)
        object.__setattr__(self, "indices", idx)

    def __len__(self):
        return int(self.indices.size)

    def __eq__(self, other):
        return (isinstance(other, EnvironmentSequence) and self.seed == other.seed
                and self.source == other.source and np.array_equal(self.indices, other.indices))

    def law_at(self, i: int) -> PointProcessLaw:
        """Reproduction law of generation ``i`` (1-based)."""
        return self.source.laws[self.indices[i - 1]]

    def prefix(self, n: int) -> "EnvironmentSequence":
        if n > len(self):
            raise ValueError(f"sequence has length {len(self)} < {n}")
        return EnvironmentSequence(self.indices[:n], self.seed, self.source)

    def with_source(self, source: EnvironmentLaw) -> "EnvironmentSequence":
        return EnvironmentSequence(self.indices, self.seed, source)


def sample_environment(envlaw: EnvironmentLaw, n: int, seed: int) -> EnvironmentSequence:
    """Draw ``n`` i.i.d. component indices from a stream derived from ``seed``.

    Sequences for the same seed are prefix-consistent: the first ``m``
    indices of a length-``n`` draw equal a length-``m`` draw.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    seed = int(seed) & MASK64
    if len(envlaw) == 1:
        return EnvironmentSequence(np.zeros(n, dtype=np.int64), seed, envlaw)
    rng = generator(seed, 0xE4)
    cdf = np.cumsum(envlaw.weights)
    cdf[-1] = 1.0
    u = rng.random(n)
    idx = np.searchsorted(cdf, u, side="right")
    return EnvironmentSequence(np.minimum(idx, len(envlaw) - 1), seed, envlaw)


def component_kappas(envlaw: EnvironmentLaw, theta: float) -> np.ndarray:
    return np.array([laplace_profile(law, theta).kappa for law in envlaw.laws])


def cumulative_kappa(envseq: EnvironmentSequence, vartheta: float) -> np.ndarray:
    """``K_0 = 0``, ``K_i = K_{i-1} + kappa_{index(i)}(vartheta)``."""
    kap = component_kappas(envseq.source, vartheta)
    if not np.all(np.isfinite(kap)):
        raise InvalidLawError(f"log-Laplace transform not finite at {vartheta}")
    out = np.empty(len(envseq) + 1)
    out[0] = 0.0
    np.cumsum(kap[envseq.indices], out=out[1:])
    return out


@dataclass(frozen=True)
class BarrierSpec:
    d: float
    alpha: float
    vartheta: float

    def __post_init__(self):
        if not (0.0 < self.alpha <= 1.0):
            raise ValueError(f"alpha={self.alpha} outside (0, 1]")
        if self.d < 0.0:
            raise ValueError(f"d={self.d} must be >= 0")
        if not self.vartheta > 0.0:
            raise ValueError("vartheta must be positive")


def barrier_curve(envseq: EnvironmentSequence, barrier: BarrierSpec) -> np.ndarray:
    """``phi(i) = -K_i / vartheta + d i^alpha`` for ``i = 0..n``."""
    K = cumulative_kappa(envseq, barrier.vartheta)
    i = np.arange(K.size, dtype=float)
    return -K / barrier.vartheta + barrier.d * i**barrier.alpha


def write_replay(envseq: EnvironmentSequence, path) -> Path:
    path = Path(path)
    lines = [f"{REPLAY_MAGIC} seed={envseq.seed} n={len(envseq)} components={len(envseq.source)}"]
    lines.extend(str(int(i)) for i in envseq.indices)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    return path


def read_replay(path, envlaw: EnvironmentLaw) -> EnvironmentSequence:
    text = Path(path).read_text(encoding="utf-8")
    rows = text.split("\n")
    if rows and rows[-1] == "":
        rows.pop()
    if not rows:
        raise ConfigError("empty replay file", line=1)
    m = _HEADER.match(rows[0])
    if m is None:
        raise ConfigError(f"bad replay header {rows[0]!r}", line=1)
    seed, n, k = (int(g) for g in m.groups())
    if k != len(envlaw):
        raise ConfigError(f"replay file has {k} components, environment law has {len(envlaw)}", line=1)
    if len(rows) - 1 != n:
        raise ConfigError(f"replay file declares n={n} but holds {len(rows) - 1} indices")
    idx = np.empty(n, dtype=np.int64)
    for lineno, row in enumerate(rows[1:], start=2):
        if not row.isdigit():
            raise ConfigError(f"bad component index {row!r}", line=lineno)
        idx[lineno - 2] = int(row)
        if idx[lineno - 2] >= k:
            raise ConfigError(f"component index {row} >= {k}", line=lineno)
    return EnvironmentSequence(idx, seed, envlaw)
