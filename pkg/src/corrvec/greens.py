"""Frequency grids, Green's-function series, and active-space embedding.

Matrices are stored over spin orbitals in blocked ordering (all spin-up
orbitals first).  Spin-restricted systems carry identical blocks, so the
embedding algebra runs on the spatial (spin-up) block and the result is
mirrored back.  Energies in Hartree, Green's functions in inverse Hartree.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class FrequencyGrid:
    kind: str                      # "retarded" or "matsubara"
    points: np.ndarray             # complex frequencies, grid order
    eta: float = 0.0

    def __post_init__(self):
        if self.kind not in ("retarded", "matsubara"):
            raise ValueError(f"unknown grid kind {self.kind!r}")
        if self.points.ndim != 1 or self.points.shape[0] < 1:
            raise ValueError("grid needs at least one point")
        if self.kind == "retarded":
            if self.eta <= 0:
                raise ValueError("retarded grid requires eta > 0")
            if not np.allclose(self.points.imag, self.eta):
                raise ValueError("retarded points must sit at Im z = eta")
        else:
            if np.any(self.points.real != 0.0) or np.any(self.points.imag <= 0.0):
                raise ValueError("matsubara points must be purely imaginary, Im > 0")

    def __len__(self) -> int:
        return int(self.points.shape[0])


def retarded_grid(omega_min: float, omega_max: float, n: int, eta: float = 0.05) -> FrequencyGrid:
    """Evenly spaced real frequencies shifted by the broadening i*eta."""
    if n < 1:
        raise ValueError("need n >= 1")
    omegas = np.linspace(omega_min, omega_max, n)
    return FrequencyGrid("retarded", omegas + 1j * eta, eta=eta)


def matsubara_grid(omega_max: float, n: int = 64) -> FrequencyGrid:
    """Log-spaced purely imaginary frequencies on (0, omega_max].

    Zero temperature makes the imaginary axis continuous; log spacing from
    omega_max/1000 resolves the low-frequency structure.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    if omega_max <= 0:
        raise ValueError("omega_max must be positive")
    if n == 1:
        omegas = np.array([omega_max])
    else:
        omegas = np.geomspace(omega_max / 1000.0, omega_max, n)
    return FrequencyGrid("matsubara", 1j * omegas)


def trace_spectrum(g: np.ndarray) -> float:
    """Sum of the imaginary parts of the diagonal."""
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise ValueError("expected a square matrix")
    return float(np.trace(g).imag)


@dataclass
class GreensSeries:
    """Green's-function matrices over a frequency grid plus diagnostics."""

    grid: FrequencyGrid
    matrices: np.ndarray                     # (n_points, dim, dim) complex
    diagnostics: list = field(default_factory=list)

    def __post_init__(self):
        n = len(self.grid)
        if self.matrices.shape[0] != n:
            raise ValueError("matrix count does not match the grid")
        if self.matrices.ndim != 3 or self.matrices.shape[1] != self.matrices.shape[2]:
            raise ValueError("matrices must be (n_points, dim, dim)")

    @property
    def dim(self) -> int:
        return int(self.matrices.shape[1])

    def trace_values(self) -> np.ndarray:
        return self.matrices.diagonal(axis1=1, axis2=2).imag.sum(axis=1)


def g0(f: np.ndarray, z: complex) -> np.ndarray:
    """Mean-field resolvent [z - F]^{-1}."""
    dim = f.shape[0]
    mat = z * np.eye(dim) - f
    if abs(np.linalg.det(mat)) < 1e-300:
        raise np.linalg.LinAlgError("z coincides with a mean-field pole")
    return np.linalg.inv(mat)


def expand_spin(spatial: np.ndarray) -> np.ndarray:
    """Mirror a spatial-orbital matrix onto both spin blocks."""
    n = spatial.shape[0]
    out = np.zeros((2 * n, 2 * n), dtype=complex)
    out[:n, :n] = spatial
    out[n:, n:] = spatial
    return out


def spin_up_block(mat: np.ndarray) -> np.ndarray:
    n = mat.shape[0] // 2
    return mat[:n, :n]


def dyson_embed(g_cas: np.ndarray, f: np.ndarray, active: tuple[int, ...],
                zs: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Full-space Green's function via the active-space self-energy.

    The active block contributes Sigma(z) = (z - F_AA) - G_cas(z)^{-1},
    inserted into [z - F - Sigma]^{-1} over all orbitals.  Points where the
    sampled G_cas is numerically singular are skipped (returned in the second
    element) and left as NaN; inverting noisy data is exactly where this
    scheme becomes fragile.
    """
    n = f.shape[0]
    idx = np.asarray(active)
    f_aa = f[np.ix_(idx, idx)]
    out = np.full((len(zs), n, n), np.nan, dtype=complex)
    skipped = []
    for k, z in enumerate(zs):
        gc = g_cas[k]
        if abs(np.linalg.det(gc)) < 1e-12:
            skipped.append(k)
            continue
        sigma_cas = (z * np.eye(len(idx)) - f_aa) - np.linalg.inv(gc)
        sigma = np.zeros((n, n), dtype=complex)
        sigma[np.ix_(idx, idx)] = sigma_cas
        out[k] = np.linalg.inv(z * np.eye(n) - f - sigma)
    return out, skipped


def nondyson_embed(g_cas: np.ndarray, f: np.ndarray, active: tuple[int, ...],
                   zs: np.ndarray) -> np.ndarray:
    """Inversion-free embedding G = G0 + P[G_cas - P G0 P]P.

    Exact (and equal to the self-energy route) when F has no coupling
    between active and inactive orbitals.
    """
    n = f.shape[0]
    idx = np.asarray(active)
    out = np.empty((len(zs), n, n), dtype=complex)
    for k, z in enumerate(zs):
        g_full0 = g0(f, z)
        out[k] = g_full0
        out[k][np.ix_(idx, idx)] += g_cas[k] - g_full0[np.ix_(idx, idx)]
    return out
