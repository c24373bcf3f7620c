"""Fermionic operators on spin orbitals and their qubit encoding.

Spin orbitals use blocked ordering: spatial orbital p with spin up sits on
qubit p, spin down on qubit n_orb + p.  A creation operator on mode j maps to
(X_j - i Y_j)/2 times a Z chain on all lower modes, which preserves the
canonical anticommutation relations exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .pauli import PauliSum


@dataclass(frozen=True)
class BlockedSpinOrbitals:
    """Bijection (spatial orbital, spin) <-> qubit index, spin-up block first."""

    n_orb: int

    @property
    def n_modes(self) -> int:
        return 2 * self.n_orb

    def index(self, p: int, spin: int) -> int:
        if not 0 <= p < self.n_orb:
            raise ValueError(f"orbital {p} outside [0, {self.n_orb})")
        if spin not in (0, 1):
            raise ValueError("spin must be 0 (up) or 1 (down)")
        return p + spin * self.n_orb

    def closed_shell_modes(self, n_elec: int) -> list[int]:
        """Occupied mode indices for a spin-paired filling of n_elec."""
        if n_elec % 2 or not 0 <= n_elec <= self.n_modes:
            raise ValueError(f"cannot pair {n_elec} electrons in "
                             f"{self.n_orb} orbitals")
        docc = n_elec // 2
        return [self.index(p, s) for s in (0, 1) for p in range(docc)]


@lru_cache(maxsize=None)
def ladder_pauli(mode: int, dagger: bool, m: int) -> PauliSum:
    """Qubit form of c_mode (dagger=False) or c_mode^dagger (dagger=True)."""
    if not 0 <= mode < m:
        raise ValueError(f"mode {mode} outside register of width {m}")
    chain = "Z" * mode
    tail = "I" * (m - mode - 1)
    x_label = chain + "X" + tail
    y_label = chain + "Y" + tail
    sign = -1j if dagger else 1j
    return PauliSum(m, [(x_label, 0.5), (y_label, 0.5 * sign)])


def number_operator(m: int, modes: tuple[int, ...] | None = None) -> PauliSum:
    """Sum of occupation operators (I - Z_j)/2 over the chosen modes."""
    modes = tuple(range(m)) if modes is None else modes
    terms: dict[str, complex] = {"I" * m: 0.5 * len(modes)}
    for j in modes:
        label = "I" * j + "Z" + "I" * (m - j - 1)
        terms[label] = terms.get(label, 0.0) - 0.5
    return PauliSum(m, terms)


def perturbation_operator(orbital: int, spin: int, n_orb: int, dagger: bool) -> PauliSum:
    """Single creation or annihilation operator as a two-string PauliSum."""
    conv = BlockedSpinOrbitals(n_orb)
    return ladder_pauli(conv.index(orbital, spin), dagger, conv.n_modes)


def _product_of_ladders(factors: list[tuple[int, bool]], m: int) -> PauliSum:
    out = None
    for mode, dagger in factors:
        term = ladder_pauli(mode, dagger, m)
        out = term if out is None else out * term
    return PauliSum.identity(m) if out is None else out


def hamiltonian_to_qubits(h: np.ndarray, g: np.ndarray, e_const: float,
                          mu: float = 0.0) -> PauliSum:
    """Qubit Hamiltonian of a spin-restricted second-quantized problem.

    ``h`` is the one-body matrix over n_orb spatial orbitals, ``g`` the
    two-body tensor in the convention g[p,q,r,s] c+_p c+_q c_s c_r with a
    1/2 prefactor after spin insertion, and ``e_const`` a scalar shift.
    ``mu`` subtracts a chemical potential times the total number operator.
    """
    h = np.asarray(h, dtype=float)
    g = np.asarray(g, dtype=float)
    n_orb = h.shape[0]
    if h.shape != (n_orb, n_orb):
        raise ValueError(f"one-body matrix has shape {h.shape}")
    if np.max(np.abs(h - h.T)) > 1e-10:
        raise ValueError("one-body matrix is not hermitian")
    if g.shape != (n_orb,) * 4:
        raise ValueError(f"two-body tensor has shape {g.shape}")
    conv = BlockedSpinOrbitals(n_orb)
    m = conv.n_modes

    acc: dict[str, complex] = {}

    def put(term: PauliSum, weight: float) -> None:
        for lbl, c in term:
            acc[lbl] = acc.get(lbl, 0.0) + weight * c

    put(PauliSum.identity(m), e_const)
    if mu != 0.0:
        put(number_operator(m), -mu)

    for p in range(n_orb):
        for q in range(n_orb):
            if abs(h[p, q]) <= 1e-14:
                continue
            for spin in (0, 1):
                a, b = conv.index(p, spin), conv.index(q, spin)
                put(_product_of_ladders([(a, True), (b, False)], m), h[p, q])

    for p in range(n_orb):
        for q in range(n_orb):
            for r in range(n_orb):
                for s in range(n_orb):
                    coeff = 0.5 * g[p, q, r, s]
                    if abs(coeff) <= 1e-14:
                        continue
                    for sp in (0, 1):
                        for sq in (0, 1):
                            a = conv.index(p, sp)
                            b = conv.index(q, sq)
                            c = conv.index(s, sq)
                            d = conv.index(r, sp)
                            if a == b or c == d:
                                continue
                            put(_product_of_ladders(
                                [(a, True), (b, True), (c, False), (d, False)], m),
                                coeff)
    return PauliSum(m, acc)


def number_penalty(m: int, target: int, strength: float) -> PauliSum:
    """strength * (N - target)^2 as a PauliSum, zero on the target sector."""
    dev = number_operator(m) - PauliSum.identity(m, float(target))
    return strength * (dev * dev)


def total_spin_squared(n_orb: int) -> PauliSum:
    """Total-spin operator S^2 = S-S+ + Sz^2 + Sz in blocked spin ordering.

    Positive semidefinite with the singlet sector as its kernel, so it works
    as an optimization penalty that leaves singlet states untouched while
    pushing triplet and higher-spin states up in energy.
    """
    m = 2 * n_orb
    sp = PauliSum(m)
    for p in range(n_orb):
        sp = sp + ladder_pauli(p, True, m) * ladder_pauli(p + n_orb, False, m)
    sm = sp.adjoint()
    sz = PauliSum(m)
    for p in range(n_orb):
        nu = ladder_pauli(p, True, m) * ladder_pauli(p, False, m)
        nd = ladder_pauli(p + n_orb, True, m) * ladder_pauli(p + n_orb, False, m)
        sz = sz + 0.5 * (nu - nd)
    return sm * sp + sz * sz + sz
