"""Integer encodings of laws on the common displacement lattice."""
from __future__ import annotations

import math

import numpy as np

from .environment import EnvironmentLaw
from .pointprocess import spine_step_law

EPS = 1e-9
NO_CAP = np.int64(1) << np.int64(60)


def law_arrays(envlaw: EnvironmentLaw, scale: int):
    """Flattened atoms of every component with displacements times ``scale``."""
    atom_start = [0]
    prob, child_start, disp = [], [0], []
    for law in envlaw.laws:
        for atom in law.atoms:
            prob.append(atom.probability)
            for d in atom.displacements:
                disp.append(int(d * scale))
            child_start.append(len(disp))
        atom_start.append(len(prob))
    return (np.array(atom_start, np.int64), np.array(prob, np.float64),
            np.array(child_start, np.int64), np.array(disp, np.int64))


def step_arrays(envlaw: EnvironmentLaw, vartheta: float, scale: int):
    """Flattened spine step laws: ``(start, x, xi, mass, cdf)``."""
    start = [0]
    xs, xis, masses, cdfs = [], [], [], []
    for law in envlaw.laws:
        step = spine_step_law(law, vartheta)
        acc = 0.0
        for x, xi, m in step.atoms:
            xs.append(int(x * scale))
            xis.append(int(xi))
            masses.append(m)
            acc += m
            cdfs.append(acc)
        cdfs[-1] = 1.0
        start.append(len(xs))
    return (np.array(start, np.int64), np.array(xs, np.int64), np.array(xis, np.int64),
            np.array(masses, np.float64), np.array(cdfs, np.float64))


def displacement_range(envlaw: EnvironmentLaw, scale: int):
    ds = [int(b * scale) for law in envlaw.laws for b in law.distinct_displacements()]
    return min(ds), max(ds)


def floor_cut(values, scale: int) -> np.ndarray:
    """Largest lattice index ``k`` with ``k / scale <= value`` (inf -> huge)."""
    v = np.asarray(values, dtype=float)
    out = np.empty(v.shape, np.int64)
    fin = np.isfinite(v)
    out[fin] = np.floor(v[fin] * scale + EPS).astype(np.int64)
    out[~fin & (v > 0)] = NO_CAP
    out[~fin & (v < 0)] = -NO_CAP
    return out


def ceil_cut(values, scale: int) -> np.ndarray:
    """Smallest lattice index ``k`` with ``k / scale >= value``."""
    v = np.asarray(values, dtype=float)
    out = np.empty(v.shape, np.int64)
    fin = np.isfinite(v)
    out[fin] = np.ceil(v[fin] * scale - EPS).astype(np.int64)
    out[~fin & (v > 0)] = NO_CAP
    out[~fin & (v < 0)] = -NO_CAP
    return out


def cap_array(caps, n: int) -> np.ndarray:
    """Per-generation offspring caps, index 1..n (slot 0 unused)."""
    out = np.full(n + 1, NO_CAP, np.int64)
    if caps is None:
        return out
    if np.isscalar(caps):
        caps = [caps] * n
    for i, c in enumerate(caps, start=1):
        if c is not None and math.isfinite(c):
            out[i] = int(math.floor(c + EPS))
    return out
