"""Dense state-vector engine.

Basis layout is big-endian over the label list: label 0 is the most
significant bit of the basis index.  Atoms encode |g_L> -> 0, |g_R> -> 1;
photons encode |L> -> 0, |R> -> 1.  So over ``[photon1, atom1]`` the
amplitude array ``[0, 0, 0, 1]`` is |R>|g_R> and ``[0, 1, 0, 0]`` is |L>|g_R>.

Random sampling uses ``numpy.random.Generator`` over the PCG64 bit
generator; a seed fully determines every draw.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Sequence

import numpy as np

NORM_TOL = 1e-10
UNITARY_TOL = 1e-12
PRUNE_TOL = 1e-14

ATOM = "atom"
PHOTON = "photon"

_BIT_NAMES = {ATOM: ("gL", "gR"), PHOTON: ("L", "R")}


@dataclass(frozen=True)
class QubitLabel:
    role: str
    name: str

    def __post_init__(self):
        if self.role not in _BIT_NAMES:
            raise ValueError(f"unknown qubit role {self.role!r}")

    def bit_name(self, bit: int) -> str:
        return _BIT_NAMES[self.role][bit]

    def __str__(self):
        return self.name


def atom(name: str) -> QubitLabel:
    return QubitLabel(ATOM, name)


def photon(name: str) -> QubitLabel:
    return QubitLabel(PHOTON, name)


@dataclass(frozen=True)
class StateVector:
    """Complex amplitudes over an ordered qubit register.

    ``scale`` is the factor ``superpose`` multiplied the raw coefficients by
    to normalize them; it is 1 for every other constructor.
    """

    amplitudes: np.ndarray
    labels: tuple[QubitLabel, ...]
    scale: float = 1.0

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        labels = tuple(self.labels)
        names = [lab.name for lab in labels]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate qubit label in {names}")
        if amps.size != 2 ** len(labels):
            raise ValueError(
                f"{amps.size} amplitudes do not fit a {len(labels)}-qubit register"
            )
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "labels", labels)

    @property
    def n_qubits(self) -> int:
        return len(self.labels)

    @property
    def names(self) -> list[str]:
        return [lab.name for lab in self.labels]

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def is_normalized(self, tol: float = NORM_TOL) -> bool:
        return abs(self.norm**2 - 1.0) < tol

    def index_of(self, name: str) -> int:
        for i, lab in enumerate(self.labels):
            if lab.name == name:
                return i
        raise KeyError(f"no qubit named {name!r} in register {self.names}")

    def label(self, name: str) -> QubitLabel:
        return self.labels[self.index_of(name)]

    def relabel(self, mapping: dict[str, str]) -> StateVector:
        labels = tuple(QubitLabel(lab.role, mapping.get(lab.name, lab.name)) for lab in self.labels)
        return StateVector(self.amplitudes, labels)

    def tensor_view(self) -> np.ndarray:
        return self.amplitudes.reshape((2,) * self.n_qubits)


@dataclass(frozen=True)
class Gate:
    matrix: np.ndarray
    name: str = ""
    lossy: bool = False

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape not in ((2, 2), (4, 4)):
            raise ValueError(f"gate matrix must be 2x2 or 4x4, got {m.shape}")
        if not self.lossy:
            err = np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0])))
            if err > UNITARY_TOL:
                raise ValueError(f"gate {self.name!r} is not unitary (deviation {err:.3g})")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def arity(self) -> int:
        return 1 if self.matrix.shape[0] == 2 else 2


HADAMARD = Gate(np.array([[1, 1], [1, -1]]) / np.sqrt(2), "H")
PAULI_Z = Gate(np.diag([1, -1]), "Z")
PAULI_X = Gate(np.array([[0, 1], [1, 0]]), "X")
IDENTITY = Gate(np.eye(2), "I")


@dataclass(frozen=True)
class Branch:
    """One measurement outcome.

    ``probability`` is the absolute weight of the outcome in the measured
    state; ``residual`` is the renormalized state of the unmeasured qubits.
    """

    outcome: dict[str, int]
    probability: float
    residual: StateVector
    measured: tuple[QubitLabel, ...] = field(default=(), repr=False)

    @property
    def label(self) -> str:
        roles = {lab.name: lab for lab in self.measured}
        parts = []
        for name, bit in self.outcome.items():
            text = roles[name].bit_name(bit) if name in roles else str(bit)
            parts.append(f"{name}={text}")
        return ",".join(parts)

    def unnormalized(self) -> np.ndarray:
        """Residual amplitudes scaled back to their weight in the measured state."""
        return np.sqrt(self.probability) * self.residual.amplitudes


def make_state(labels: Sequence[QubitLabel], basis_index: int) -> StateVector:
    dim = 2 ** len(labels)
    if not 0 <= basis_index < dim:
        raise ValueError(f"basis index {basis_index} out of range for {len(labels)} qubits")
    amps = np.zeros(dim, dtype=complex)
    amps[basis_index] = 1.0
    return StateVector(amps, tuple(labels))


def superpose(terms: Iterable[tuple[complex, int]], labels: Sequence[QubitLabel]) -> StateVector:
    """Normalized superposition of basis states given as (coefficient, index) pairs.

    Repeated indices accumulate.  The normalizing factor is kept on the
    returned state as ``scale``.
    """
    dim = 2 ** len(labels)
    amps = np.zeros(dim, dtype=complex)
    for coeff, index in terms:
        if not 0 <= index < dim:
            raise ValueError(f"basis index {index} out of range for {len(labels)} qubits")
        amps[index] += coeff
    norm = np.linalg.norm(amps)
    if norm == 0.0:
        raise ValueError("superposition has all-zero coefficients")
    return StateVector(amps / norm, tuple(labels), scale=float(1.0 / norm))


def tensor(s1: StateVector, s2: StateVector) -> StateVector:
    clash = set(s1.names) & set(s2.names)
    if clash:
        raise ValueError(f"duplicate qubit label(s) {sorted(clash)}")
    return StateVector(np.kron(s1.amplitudes, s2.amplitudes), s1.labels + s2.labels)


def apply_gate(state: StateVector, gate: Gate, targets: Sequence[str] | str) -> StateVector:
    if isinstance(targets, str):
        targets = [targets]
    if len(targets) != gate.arity:
        raise ValueError(f"gate {gate.name!r} acts on {gate.arity} qubit(s), got targets {list(targets)}")
    if len(set(targets)) != len(targets):
        raise ValueError(f"repeated target in {list(targets)}")
    axes = [state.index_of(t) for t in targets]
    k = len(axes)
    psi = np.moveaxis(state.tensor_view(), axes, range(k))
    shape = psi.shape
    psi = gate.matrix @ psi.reshape(2**k, -1)
    psi = np.moveaxis(psi.reshape(shape), range(k), axes)
    return StateVector(psi.reshape(-1), state.labels)


def apply_sequence(state: StateVector, ops: Iterable[tuple[Gate, Sequence[str] | str]]) -> StateVector:
    for gate, targets in ops:
        state = apply_gate(state, gate, targets)
    return state


def enumerate_branches(state: StateVector, measured: Sequence[str]) -> list[Branch]:
    """Project onto every computational outcome of ``measured``.

    Outcomes whose amplitudes are all below ``PRUNE_TOL`` are dropped.  For a
    sub-normalized state the probabilities sum to its squared norm.
    """
    measured = list(measured)
    if not measured:
        raise ValueError("measured label set is empty")
    if len(set(measured)) != len(measured):
        raise ValueError(f"repeated measured label in {measured}")
    axes = [state.index_of(m) for m in measured]
    m = len(axes)
    rest = tuple(lab for i, lab in enumerate(state.labels) if i not in axes)
    block = np.moveaxis(state.tensor_view(), axes, range(m)).reshape(2**m, -1)
    measured_labels = tuple(state.labels[i] for i in axes)

    branches = []
    for row, bits in enumerate(product((0, 1), repeat=m)):
        amps = block[row]
        if np.max(np.abs(amps)) < PRUNE_TOL:
            continue
        prob = float(np.vdot(amps, amps).real)
        residual = StateVector(amps / np.sqrt(prob), rest)
        branches.append(Branch(dict(zip(measured, bits)), prob, residual, measured_labels))
    return branches


def make_rng(seed: int | None) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def draw_indices(probabilities: Sequence[float], n: int, rng: np.random.Generator) -> np.ndarray:
    """Inverse-CDF draws of ``n`` indices from an exact discrete distribution."""
    p = np.asarray(probabilities, dtype=float)
    cdf = np.cumsum(p / p.sum())
    cdf[-1] = 1.0
    return np.searchsorted(cdf, rng.random(n), side="right")


def sample_branch(
    state: StateVector,
    measured: Sequence[str],
    seed: int | None = None,
    rng: np.random.Generator | None = None,
) -> Branch:
    if rng is None:
        rng = make_rng(seed)
    branches = enumerate_branches(state, measured)
    idx = draw_indices([b.probability for b in branches], 1, rng)[0]
    return branches[idx]


def sample_branches(state: StateVector, measured: Sequence[str], shots: int, seed: int | None = None) -> list[Branch]:
    if shots < 1:
        raise ValueError("shots must be at least 1")
    rng = make_rng(seed)
    branches = enumerate_branches(state, measured)
    picks = draw_indices([b.probability for b in branches], shots, rng)
    return [branches[i] for i in picks]


def concurrence(state: StateVector) -> float:
    if state.n_qubits != 2:
        raise ValueError(f"concurrence needs a 2-qubit state, got {state.n_qubits} qubits")
    a, b, c, d = state.amplitudes / state.norm
    return float(min(1.0, 2 * abs(a * d - b * c)))


def fidelity(state: StateVector, target: StateVector) -> float:
    """|<target|state>|^2, insensitive to global phase."""
    if state.names != target.names:
        raise ValueError(f"label mismatch: {state.names} vs {target.names}")
    overlap = np.vdot(target.amplitudes, state.amplitudes)
    return float(min(1.0, abs(overlap) ** 2))


def ghz_state(labels: Sequence[QubitLabel], split: int | None = None, sign: int = 1) -> StateVector:
    """(|0..0 1..1> + sign |1..1 0..0>)/sqrt(2), flipping after ``split`` qubits.

    With ``split=None`` this is the plain GHZ state (|0...0> + sign |1...1>)/sqrt(2).
    """
    n = len(labels)
    full = 2**n - 1
    low = 0 if split is None else (1 << (n - split)) - 1
    return superpose([(1.0, low), (sign, full ^ low)], labels)
