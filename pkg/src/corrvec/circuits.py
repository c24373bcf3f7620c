"""Gate-level simulation: statevectors, density matrices, noise, overlaps.

Conventions
-----------
Qubit 0 is the least significant bit of a basis index.  Dense operators are
built as ``kron(op[m-1], ..., op[0])``.  Rz(t) = diag(exp(-it/2), exp(+it/2)),
PHASE(p) = diag(1, exp(ip)).  Three-qubit gates never reach the simulator;
builders emit their one- and two-qubit decompositions.  The depolarizing
channel acts on the two qubits of every two-qubit gate; single-qubit gates
are noiseless.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from .pauli import PauliSum, apply_string, apply_sum, string_action

ONE_QUBIT_KINDS = frozenset({"H", "X", "PHASE", "RX", "RY", "RZ"})
TWO_QUBIT_KINDS = frozenset({"CX", "CY", "CZ", "CPHASE"})
ROTATION_KINDS = frozenset({"PHASE", "RX", "RY", "RZ", "CPHASE"})

_EYE2 = np.eye(2, dtype=complex)
_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2.0)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_P0 = np.array([[1, 0], [0, 0]], dtype=complex)
_P1 = np.array([[0, 0], [0, 1]], dtype=complex)


@dataclass(frozen=True)
class Gate:
    """One gate application; angle is fixed or bound later via a slot."""

    kind: str
    qubits: tuple[int, ...]
    angle: float | None = None
    slot: int | None = None
    scale: float = 1.0


@dataclass
class Circuit:
    width: int
    gates: list[Gate] = field(default_factory=list)
    n_slots: int = 0

    def add(self, kind: str, *qubits: int, angle: float | None = None,
            slot: int | None = None, scale: float = 1.0) -> None:
        if kind in ONE_QUBIT_KINDS:
            arity = 1
        elif kind in TWO_QUBIT_KINDS:
            arity = 2
        else:
            raise ValueError(f"unknown gate kind {kind!r}")
        if len(qubits) != arity:
            raise ValueError(f"{kind} takes {arity} qubit(s), got {qubits}")
        if len(set(qubits)) != len(qubits):
            raise ValueError(f"{kind} qubits must be distinct: {qubits}")
        for q in qubits:
            if not 0 <= q < self.width:
                raise ValueError(f"qubit {q} outside register of width {self.width}")
        needs_angle = kind in ROTATION_KINDS
        if needs_angle and angle is None and slot is None:
            raise ValueError(f"{kind} requires an angle or a slot")
        if not needs_angle and (angle is not None or slot is not None):
            raise ValueError(f"{kind} takes no angle")
        self.gates.append(Gate(kind, tuple(qubits), angle, slot, scale))
        if slot is not None:
            self.n_slots = max(self.n_slots, slot + 1)

    def add_ccx(self, c1: int, c2: int, t: int) -> None:
        for g in ccx_gates(c1, c2, t):
            self.gates.append(g)

    def add_ccz(self, c1: int, c2: int, t: int) -> None:
        self.add("H", t)
        self.add_ccx(c1, c2, t)
        self.add("H", t)

    def add_controlled_pauli(self, control: int, label: str) -> None:
        """Controlled application of a Pauli string, one 2-qubit gate per site."""
        for q, ch in enumerate(label):
            if ch == "I":
                continue
            self.add({"X": "CX", "Y": "CY", "Z": "CZ"}[ch], control, q)

    def extend(self, gates: Iterable[Gate]) -> None:
        for g in gates:
            self.gates.append(g)
            if g.slot is not None:
                self.n_slots = max(self.n_slots, g.slot + 1)

    def bound(self, theta: Sequence[float]) -> "Circuit":
        """Copy with every slot resolved to a fixed angle."""
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.n_slots,):
            raise ValueError(f"expected {self.n_slots} angles, got {theta.shape}")
        out = Circuit(self.width)
        for g in self.gates:
            if g.slot is None:
                out.gates.append(g)
            else:
                out.gates.append(replace(g, angle=g.scale * float(theta[g.slot]),
                                         slot=None, scale=1.0))
        return out

    def two_qubit_count(self) -> int:
        return sum(1 for g in self.gates if len(g.qubits) == 2)


def ccx_gates(c1: int, c2: int, t: int) -> list[Gate]:
    """Toffoli as H, T and six CNOTs; verified unitary-equal in the test suite."""
    tp, tm = np.pi / 4, -np.pi / 4
    seq = [
        ("H", (t,), None), ("CX", (c2, t), None), ("PHASE", (t,), tm),
        ("CX", (c1, t), None), ("PHASE", (t,), tp), ("CX", (c2, t), None),
        ("PHASE", (t,), tm), ("CX", (c1, t), None), ("PHASE", (c2,), tp),
        ("PHASE", (t,), tp), ("H", (t,), None), ("CX", (c1, c2), None),
        ("PHASE", (c1,), tp), ("PHASE", (c2,), tm), ("CX", (c1, c2), None),
    ]
    return [Gate(k, q, a) for k, q, a in seq]


def _one_qubit_matrix(kind: str, angle: float | None) -> np.ndarray:
    if kind == "H":
        return _H
    if kind == "X":
        return _X
    if kind == "PHASE":
        return np.array([[1, 0], [0, np.exp(1j * angle)]], dtype=complex)
    half = 0.5 * angle
    c, s = np.cos(half), np.sin(half)
    if kind == "RX":
        return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)
    if kind == "RY":
        return np.array([[c, -s], [s, c]], dtype=complex)
    if kind == "RZ":
        return np.array([[np.exp(-1j * half), 0], [0, np.exp(1j * half)]], dtype=complex)
    raise ValueError(f"not a one-qubit kind: {kind}")


def _embed(factors: dict[int, np.ndarray], m: int) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for q in range(m - 1, -1, -1):
        out = np.kron(out, factors.get(q, _EYE2))
    return out


_FIXED_CACHE: dict[tuple, np.ndarray] = {}


def gate_matrix(gate: Gate, m: int, theta: np.ndarray | None = None) -> np.ndarray:
    """Full-register unitary of one gate; fixed-angle results are cached."""
    if gate.slot is None:
        angle = gate.angle
        key = (gate.kind, gate.qubits, angle, m)
        hit = _FIXED_CACHE.get(key)
        if hit is not None:
            return hit
    else:
        angle = gate.scale * float(theta[gate.slot])
        key = None
    if gate.kind in ONE_QUBIT_KINDS:
        full = _embed({gate.qubits[0]: _one_qubit_matrix(gate.kind, angle)}, m)
    else:
        c, t = gate.qubits
        if gate.kind == "CPHASE":
            u = np.array([[1, 0], [0, np.exp(1j * angle)]], dtype=complex)
        else:
            u = {"CX": _X, "CY": _Y, "CZ": _Z}[gate.kind]
        full = _embed({c: _P0}, m) + _embed({c: _P1, t: u}, m)
    if key is not None and len(_FIXED_CACHE) < 4096:
        _FIXED_CACHE[key] = full
    return full


def run_pure(circ: Circuit, theta: Sequence[float] | None = None) -> np.ndarray:
    """Noiseless statevector after the circuit, starting from |0...0>."""
    th = _check_theta(circ, theta)
    psi = np.zeros(1 << circ.width, dtype=complex)
    psi[0] = 1.0
    for g in circ.gates:
        psi = gate_matrix(g, circ.width, th) @ psi
    return psi


_PAIR_PERMS: dict[tuple, tuple[np.ndarray, np.ndarray]] = {}


def _pair_perm(q1: int, q2: int, m: int) -> tuple[np.ndarray, np.ndarray]:
    key = (q1, q2, m)
    hit = _PAIR_PERMS.get(key)
    if hit is not None:
        return hit
    rest = [q for q in range(m) if q not in (q1, q2)]
    order = rest + [q1, q2]
    b = np.arange(1 << m)
    new = np.zeros_like(b)
    for j, q in enumerate(order):
        new |= ((b >> q) & 1) << j
    inv = np.empty_like(new)
    inv[new] = b
    _PAIR_PERMS[key] = (new, inv)
    return new, inv


def depolarize_pair(rho: np.ndarray, q1: int, q2: int, p2: float, m: int) -> np.ndarray:
    """Two-qubit depolarizing channel on (q1, q2).

    Uniform conjugation by all 16 Pauli pairs averages the pair to the
    maximally mixed state, so the channel reduces to
    (1 - 16 p/15) rho + (16 p/15) tr_pair(rho) (x) I/4.
    """
    if p2 == 0.0:
        return rho
    if not 0.0 <= p2 <= 15.0 / 16.0:
        raise ValueError(f"p2={p2} outside [0, 15/16]")
    c = 16.0 * p2 / 15.0
    new, inv = _pair_perm(q1, q2, m)
    r = 1 << (m - 2)
    rho_t = rho[np.ix_(inv, inv)].reshape(4, r, 4, r)
    reduced = np.einsum("prps->rs", rho_t)
    out_t = np.zeros_like(rho_t)
    for p in range(4):
        out_t[p, :, p, :] = 0.25 * reduced
    out = out_t.reshape(1 << m, 1 << m)[np.ix_(new, new)]
    return (1.0 - c) * rho + c * out


def _check_theta(circ: Circuit, theta) -> np.ndarray | None:
    if circ.n_slots == 0:
        return None
    if theta is None:
        raise ValueError("circuit has free slots but no angles were given")
    th = np.asarray(theta, dtype=float)
    if th.shape != (circ.n_slots,):
        raise ValueError(f"expected {circ.n_slots} angles, got shape {th.shape}")
    return th


def run_density(circ: Circuit, theta: Sequence[float] | None = None,
                p2: float = 0.0) -> np.ndarray:
    """Density matrix after the circuit with a depolarizing channel of
    strength p2 following every two-qubit gate."""
    th = _check_theta(circ, theta)
    dim = 1 << circ.width
    rho = np.zeros((dim, dim), dtype=complex)
    rho[0, 0] = 1.0
    for g in circ.gates:
        u = gate_matrix(g, circ.width, th)
        rho = u @ rho @ u.conj().T
        if len(g.qubits) == 2 and p2 > 0.0:
            rho = depolarize_pair(rho, g.qubits[0], g.qubits[1], p2, circ.width)
    return rho


def circuit_unitary(circ: Circuit, theta: Sequence[float] | None = None) -> np.ndarray:
    th = _check_theta(circ, theta)
    u = np.eye(1 << circ.width, dtype=complex)
    for g in circ.gates:
        u = gate_matrix(g, circ.width, th) @ u
    return u


def assert_valid_state(psi: np.ndarray, tol: float = 1e-10) -> None:
    norm = float(np.linalg.norm(psi))
    assert abs(norm - 1.0) <= tol, f"state norm {norm} deviates from 1"


def assert_valid_density(rho: np.ndarray, tol: float = 1e-10) -> None:
    assert abs(np.trace(rho).real - 1.0) <= tol, "density trace deviates from 1"
    assert abs(np.trace(rho).imag) <= tol
    assert np.max(np.abs(rho - rho.conj().T)) <= tol, "density not hermitian"
    assert np.linalg.eigvalsh(rho).min() >= -tol, "density not positive"


def density_expectation(rho: np.ndarray, op: PauliSum) -> complex:
    """tr(rho A) without materializing A."""
    dim = rho.shape[0]
    idx = np.arange(dim)
    total = 0.0 + 0j
    for label, coeff in op:
        flip, phases = string_action(label)
        total += coeff * np.dot(phases, rho[idx, idx ^ flip])
    return complex(total)


# ---------------------------------------------------------------------------
# measurement and noise configuration


@dataclass(frozen=True)
class NoiseModel:
    enabled: bool = False
    p2: float = 1e-3
    boost: float = 2.0
    zne: bool = False

    def __post_init__(self):
        if not 0.0 <= self.p2 <= 15.0 / 16.0:
            raise ValueError(f"p2={self.p2} outside [0, 15/16]")
        if self.boost <= 1.0:
            raise ValueError("boost factor must exceed 1")
        if self.enabled and self.zne and self.boost * self.p2 > 15.0 / 16.0:
            raise ValueError("boosted p2 exceeds the channel's valid range")


@dataclass(frozen=True)
class MeasurementSettings:
    mode: str = "exact"
    shots: int = 1_000_000
    seed: int | None = None

    def __post_init__(self):
        if self.mode not in ("exact", "sampled"):
            raise ValueError(f"unknown measurement mode {self.mode!r}")
        if self.shots < 1:
            raise ValueError("shots must be positive")

    def make_rng(self, *extra: int) -> np.random.Generator:
        base = 0 if self.seed is None else self.seed
        return np.random.default_rng(np.random.SeedSequence([base, *extra]))


def sample_z_value(z_exact: float, shots: int, rng: np.random.Generator) -> float:
    """Binomial estimate of an expectation value in [-1, 1]."""
    p0 = min(1.0, max(0.0, 0.5 * (1.0 + z_exact)))
    k = rng.binomial(shots, p0)
    return 2.0 * k / shots - 1.0


def zne_extrapolate(e_p: float, e_2p: float) -> float:
    """Zero-noise value from estimates at strengths p and 2p.

    Exponential decay gives E(0) = E(p)^2 / E(2p).  When the pair is
    inconsistent with a decaying exponential (sign change or vanishing
    denominator) fall back to Richardson, 2 E(p) - E(2p).
    """
    if abs(e_2p) > 1e-12 and e_p * e_2p > 0.0:
        return e_p * e_p / e_2p
    return 2.0 * e_p - e_2p


def sample_pauli_expectation(circ: Circuit, theta, op: PauliSum,
                             settings: MeasurementSettings,
                             noise: NoiseModel,
                             rng: np.random.Generator | None = None) -> float:
    """<A> on the circuit's output state, honoring mode and noise.

    The identity component is added exactly; every other string is estimated
    independently.  With ZNE enabled each string is measured at p2 and
    boost*p2 and extrapolated before weighting.
    """
    if not op.is_hermitian():
        raise ValueError("expectation sampling requires a hermitian operator")
    if settings.mode == "sampled" and rng is None:
        rng = settings.make_rng()
    ident = "I" * op.width
    if not noise.enabled:
        psi = run_pure(circ, theta)
        if settings.mode == "exact":
            return expectation_from_state(psi, op)
        total = op.coefficient(ident).real
        for label, coeff in sorted(op):
            if label == ident:
                continue
            z = np.vdot(psi, apply_string(label, psi)).real
            total += coeff.real * sample_z_value(z, settings.shots, rng)
        return float(total)

    levels = [noise.p2]
    if noise.zne:
        levels.append(noise.boost * noise.p2)
    rhos = {lvl: run_density(circ, theta, p2=lvl) for lvl in levels}
    dim = rhos[levels[0]].shape[0]
    idx = np.arange(dim)
    total = op.coefficient(ident).real
    for label, coeff in sorted(op):
        if label == ident:
            continue
        flip, phases = string_action(label)
        ests = []
        for lvl in levels:
            z = float(np.dot(phases, rhos[lvl][idx, idx ^ flip]).real)
            if settings.mode == "sampled":
                z = sample_z_value(z, settings.shots, rng)
            ests.append(z)
        z_final = zne_extrapolate(*ests) if noise.zne else ests[0]
        total += coeff.real * z_final
    return float(total)


def expectation_from_state(psi: np.ndarray, op: PauliSum) -> float:
    val = np.vdot(psi, apply_sum(op, psi))
    assert abs(val.imag) <= 1e-10
    return float(val.real)


# ---------------------------------------------------------------------------
# controlled circuits and the ancilla overlap test


def make_controlled(circ: Circuit) -> Circuit:
    """Circuit on width+1 qubits applying ``circ`` when the top qubit is 1.

    The control is qubit ``circ.width``.  Controlled rotations split into two
    half-angle rotations around CNOTs, so slot bindings carry through with
    scaled angles.  Toffolis from controlled CNOTs are emitted decomposed.
    """
    m = circ.width
    anc = m
    out = Circuit(m + 1)
    out.n_slots = circ.n_slots
    for g in circ.gates:
        k = g.kind
        if k == "H":
            (q,) = g.qubits
            out.add("RY", q, angle=-np.pi / 4)
            out.add("CZ", anc, q)
            out.add("RY", q, angle=np.pi / 4)
        elif k == "X":
            out.add("CX", anc, g.qubits[0])
        elif k == "PHASE":
            out.add("CPHASE", anc, g.qubits[0], angle=g.angle,
                    slot=g.slot, scale=g.scale)
        elif k in ("RZ", "RY", "RX"):
            (q,) = g.qubits
            if k == "RX":
                out.add("H", q)
            inner = "RZ" if k == "RX" else k
            _add_half(out, inner, q, g, +0.5)
            out.add("CX", anc, q)
            _add_half(out, inner, q, g, -0.5)
            out.add("CX", anc, q)
            if k == "RX":
                out.add("H", q)
        elif k == "CX":
            out.add_ccx(anc, g.qubits[0], g.qubits[1])
        elif k == "CZ":
            out.add_ccz(anc, g.qubits[0], g.qubits[1])
        else:
            raise ValueError(f"cannot control gate kind {k!r}")
    return out


def _add_half(out: Circuit, kind: str, q: int, g: Gate, factor: float) -> None:
    if g.slot is None:
        out.add(kind, q, angle=factor * g.angle)
    else:
        out.add(kind, q, slot=g.slot, scale=factor * g.scale)


def overlap_circuit(u1_bound: Circuit, u2: Circuit, label: str, phi: float) -> Circuit:
    """Literal single-ancilla interference circuit for one Pauli string.

    Measuring Z on the ancilla of the output state gives
    Re(exp(i phi) <0|U1' P U2|0>).
    """
    if u1_bound.n_slots:
        raise ValueError("u1 must be fully bound")
    m = u1_bound.width
    anc = m
    circ = Circuit(m + 1)
    circ.add("H", anc)
    circ.add("PHASE", anc, angle=phi)
    circ.add("X", anc)
    circ.extend(make_controlled(u1_bound).gates)
    circ.add("X", anc)
    cu2 = make_controlled(u2)
    circ.extend(cu2.gates)
    circ.n_slots = max(circ.n_slots, cu2.n_slots)
    circ.add_controlled_pauli(anc, label)
    circ.add("H", anc)
    return circ


def ancilla_z(state_or_rho: np.ndarray) -> float:
    """<Z> on the most significant qubit."""
    if state_or_rho.ndim == 1:
        probs = np.abs(state_or_rho) ** 2
    else:
        probs = np.diag(state_or_rho).real
    half = probs.shape[0] // 2
    return float(probs[:half].sum() - probs[half:].sum())


class OverlapEngine:
    """Estimates sums of overlaps <psi1| P |U2(theta)|0> for many strings.

    All strings of a weighted sum share one noisy prefix (ancilla prepared,
    controlled-U1 applied on the 0 branch, controlled-U2 on the 1 branch);
    only the controlled-P tail differs per string.  The phase gate selecting
    the real or imaginary part commutes with everything after the first
    Hadamard, so both parts come from one prefix as well.
    """

    def __init__(self, u1: Circuit, theta1, u2: Circuit,
                 settings: MeasurementSettings, noise: NoiseModel):
        if u1.width != u2.width:
            raise ValueError("register widths differ")
        self.m = u2.width
        self.settings = settings
        self.noise = noise
        self.u2 = u2
        u1_bound = u1.bound(theta1) if u1.n_slots else u1
        self.psi1 = run_pure(u1_bound)
        if noise.enabled:
            anc = self.m
            prefix = Circuit(self.m + 1)
            prefix.add("H", anc)
            prefix.add("X", anc)
            prefix.extend(make_controlled(u1_bound).gates)
            prefix.add("X", anc)
            cu2 = make_controlled(u2)
            prefix.extend(cu2.gates)
            prefix.n_slots = cu2.n_slots
            self.prefix = prefix

    def estimate_sum(self, theta, op: PauliSum,
                     rng: np.random.Generator | None = None) -> complex:
        """Sum of coeff * <psi1|P|psi2(theta)> over the strings of ``op``."""
        if op.width != self.m:
            raise ValueError("operator width mismatch")
        settings, noise = self.settings, self.noise
        if settings.mode == "sampled" and rng is None:
            rng = settings.make_rng()
        if not noise.enabled:
            psi2 = run_pure(self.u2, theta)
            if settings.mode == "exact":
                return complex(np.vdot(self.psi1, apply_sum(op, psi2)))
            total = 0.0 + 0j
            for label, coeff in sorted(op):
                c = np.vdot(self.psi1, apply_string(label, psi2))
                z_re = sample_z_value(c.real, settings.shots, rng)
                z_im = sample_z_value(-c.imag, settings.shots, rng)
                total += coeff * complex(z_re, -z_im)
            return total

        levels = [noise.p2]
        if noise.zne:
            levels.append(noise.boost * noise.p2)
        prefixes = [run_density(self.prefix, theta, p2=lvl) for lvl in levels]
        total = 0.0 + 0j
        for label, coeff in sorted(op):
            block_traces = []
            for rho, lvl in zip(prefixes, levels):
                rho_s = self._apply_suffix(rho, label, lvl)
                half = rho_s.shape[0] // 2
                block_traces.append(np.trace(rho_s[half:, :half]))
            z_parts = []
            for phi, pick in ((0.0, lambda t: 2.0 * t.real),
                              (np.pi / 2, lambda t: -2.0 * t.imag)):
                ests = []
                for t in block_traces:
                    z = pick(t)
                    if settings.mode == "sampled":
                        z = sample_z_value(z, settings.shots, rng)
                    ests.append(z)
                z_parts.append(zne_extrapolate(*ests) if noise.zne else ests[0])
            total += coeff * complex(z_parts[0], -z_parts[1])
        return total

    def _apply_suffix(self, rho: np.ndarray, label: str, p2: float) -> np.ndarray:
        anc = self.m
        width = self.m + 1
        out = rho
        for q, ch in enumerate(label):
            if ch == "I":
                continue
            kind = {"X": "CX", "Y": "CY", "Z": "CZ"}[ch]
            u = gate_matrix(Gate(kind, (anc, q)), width)
            out = u @ out @ u.conj().T
            out = depolarize_pair(out, anc, q, p2, width)
        return out
