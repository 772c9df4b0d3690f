"""Entanglement concentration driven by photon-atom Faraday scattering.

Both protocols share one circuit.  Two partially entangled pairs are shared
between Alice/Charlie and Charlie/Bob.  Charlie scatters one "flying" qubit
off his two "stationary" qubits in turn, applies Hadamards to all three, and
measures them:

* atomic: the flying qubit is a single photon, Charlie's qubits are trapped
  atoms, and success is heralded by the photon ending in |R>;
* photonic: the flying qubits are Charlie's two photons, the stationary
  qubit is one trapped atom prepared in (|g_L> + |g_R>)/sqrt(2), and success
  is heralded by the atom ending in |g_R>.

The GHZ variants replace Alice's and Bob's single qubit by an N-qubit block
in which every qubit carries the same value.  Registers are always simulated
in full; nothing is collapsed into collective qubits.

Gate application is strictly sequential, one scattering event at a time.
Two flying qubits meeting the atom together is outside the model.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import core
from .core import HADAMARD, PAULI_Z, Branch, QubitLabel, StateVector
from .faraday import IDEAL_PHASES, RENORMALIZE, FaradayGateSpec, PhasePair, faraday_gate

MAX_PARTIES = 6
MAXIMAL_TOL = 1e-9
_CALIBRATION_A = 0.6


@dataclass(frozen=True)
class PairSpec:
    """Real coefficients of a|01> + b|10>.  ``b`` defaults to sqrt(1 - a^2)."""

    a: float
    b: float | None = None

    def __post_init__(self):
        a = float(self.a)
        b = math.sqrt(max(0.0, 1 - a * a)) if self.b is None else float(self.b)
        if not (a > 0 and b > 0):
            raise ValueError(f"pair coefficients must be positive, got a={a}, b={b}")
        err = abs(a * a + b * b - 1)
        if err > 1e-6:
            raise ValueError(f"pair not normalized: a^2 + b^2 = {a * a + b * b:.12g}")
        if err > 1e-10:
            warnings.warn(f"renormalizing pair with a^2 + b^2 = {a * a + b * b:.12g}", RuntimeWarning, stacklevel=3)
            n = math.hypot(a, b)
            a, b = a / n, b / n
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    def swapped(self) -> PairSpec:
        return PairSpec(self.b, self.a)


@dataclass(frozen=True)
class GhzSpec:
    N: int
    pair1: PairSpec
    pair2: PairSpec

    def __post_init__(self):
        if self.N < 1:
            raise ValueError(f"party count N must be at least 1, got {self.N}")
        if self.N > MAX_PARTIES:
            raise ValueError(f"N={self.N} exceeds the cap of {MAX_PARTIES} ({2 * MAX_PARTIES + 3} qubits)")


@dataclass(frozen=True)
class BranchReport:
    label: str
    probability: float
    success: bool
    concurrence: float | None
    target: str
    correction: str
    fidelity: float


@dataclass
class ProtocolResult:
    protocol: str
    N: int
    phases: PhasePair
    gate_order: tuple[str, str]
    measured: tuple[str, ...]
    remote: tuple[str, ...]
    final_state: StateVector
    branches: list[Branch]
    reports: list[BranchReport]
    success_outcomes: frozenset[str]
    success_probability: float
    metadata: dict = field(default_factory=dict)

    def success_branches(self) -> list[tuple[Branch, BranchReport]]:
        return [(b, r) for b, r in zip(self.branches, self.reports) if r.success]

    def failure_branches(self) -> list[tuple[Branch, BranchReport]]:
        return [(b, r) for b, r in zip(self.branches, self.reports) if not r.success]

    def branch(self, label: str) -> Branch:
        for b in self.branches:
            if b.label == label:
                return b
        raise KeyError(label)

    def amplitude_table(self, tol: float = core.PRUNE_TOL) -> list[tuple[str, dict[str, complex]]]:
        """Unnormalized remote-qubit amplitudes per outcome, keyed by bit string.

        This is the explicit sign pattern each outcome leaves behind.
        """
        table = []
        n = len(self.remote)
        for b in self.branches:
            amps = b.unnormalized()
            comps = {format(i, f"0{n}b"): complex(v) for i, v in enumerate(amps) if abs(v) > tol}
            table.append((b.label, comps))
        return table


@dataclass(frozen=True)
class _Layout:
    kind: str
    alice: tuple[QubitLabel, ...]
    charlie: tuple[QubitLabel, QubitLabel]
    bob: tuple[QubitLabel, ...]
    ancilla: QubitLabel

    @property
    def N(self) -> int:
        return len(self.alice)

    @property
    def measured(self) -> tuple[str, ...]:
        c1, c2 = (c.name for c in self.charlie)
        if self.kind == "atomic":
            return (self.ancilla.name, c1, c2)
        return (c1, c2, self.ancilla.name)

    @property
    def remote(self) -> tuple[QubitLabel, ...]:
        return self.alice + self.bob


def _layout(kind: str, N: int, ghz: bool) -> _Layout:
    pair_qubit = core.atom if kind == "atomic" else core.photon
    ancilla = core.photon("photon") if kind == "atomic" else core.atom("atom_a")
    if ghz:
        alice = tuple(pair_qubit(f"A{j}") for j in range(1, N + 1))
        bob = tuple(pair_qubit(f"B{j}") for j in range(1, N + 1))
        charlie = (pair_qubit("C1"), pair_qubit("C2"))
    else:
        stem = "atom" if kind == "atomic" else "photon"
        alice, bob = (pair_qubit(f"{stem}1"),), (pair_qubit(f"{stem}4"),)
        charlie = (pair_qubit(f"{stem}2"), pair_qubit(f"{stem}3"))
    return _Layout(kind, alice, charlie, bob, ancilla)


def _initial_state(layout: _Layout, pair1: PairSpec, pair2: PairSpec) -> StateVector:
    N = layout.N
    block = (1 << N) - 1
    # a1 |0..0>_A |1>_C1 + b1 |1..1>_A |0>_C1
    left = core.superpose([(pair1.a, 1), (pair1.b, block << 1)], layout.alice + layout.charlie[:1])
    # a2 |0>_C2 |1..1>_B + b2 |1>_C2 |0..0>_B
    right = core.superpose([(pair2.a, block), (pair2.b, 1 << N)], layout.charlie[1:] + layout.bob)
    flying = core.superpose([(1, 0), (1, 1)], [layout.ancilla])
    return core.tensor(core.tensor(left, right), flying)


def _evolve(
    layout: _Layout,
    pair1: PairSpec,
    pair2: PairSpec,
    gate: core.Gate,
    order: tuple[str, str],
) -> StateVector:
    state = _initial_state(layout, pair1, pair2)
    for c in order:
        targets = [layout.ancilla.name, c] if layout.kind == "atomic" else [c, layout.ancilla.name]
        state = core.apply_gate(state, gate, targets)
    for q in (layout.charlie[0].name, layout.charlie[1].name, layout.ancilla.name):
        state = core.apply_gate(state, HADAMARD, q)
    return state


def _score(residual: StateVector, N: int) -> tuple[str, str, float]:
    """Best (target, correction, fidelity) over the even/odd GHZ targets and I/Z on the first remote qubit."""
    labels = residual.labels
    targets = {
        "even": core.ghz_state(labels),
        "odd": core.ghz_state(labels, split=N),
    }
    corrected = {"I": residual, "Z": core.apply_gate(residual, PAULI_Z, labels[0].name)}
    best = ("even", "I", -1.0)
    for tname, target in targets.items():
        for cname, psi in corrected.items():
            f = core.fidelity(psi, target)
            if f > best[2] + 1e-15:
                best = (tname, cname, f)
    return best


def _report(branch: Branch, N: int, success: bool) -> BranchReport:
    target, correction, fid = _score(branch.residual, N)
    conc = core.concurrence(branch.residual) if N == 1 else None
    return BranchReport(branch.label, branch.probability, success, conc, target, correction, fid)


def _is_maximal(branch: Branch, N: int) -> bool:
    if N == 1:
        return core.concurrence(branch.residual) >= 1 - MAXIMAL_TOL
    return _score(branch.residual, N)[2] >= 1 - MAXIMAL_TOL


def _success_labels(layout: _Layout, gate: core.Gate, order: tuple[str, str]) -> frozenset[str]:
    """Find the success outcomes from the residuals of a balanced-pair run.

    With equal, unbalanced input pairs the heralded success residuals are
    maximally entangled and the failure residuals are not.  The resulting set
    must coincide with the flying/stationary herald bit being 1.
    """
    ref = PairSpec(_CALIBRATION_A)
    state = _evolve(layout, ref, ref, gate, order)
    branches = core.enumerate_branches(state, layout.measured)
    found = frozenset(b.label for b in branches if _is_maximal(b, layout.N))
    herald = layout.ancilla.name
    expected = frozenset(b.label for b in branches if b.outcome[herald] == 1)
    if found != expected:
        raise RuntimeError(
            f"success outcomes {sorted(found)} do not match the {herald}=1 herald {sorted(expected)}"
        )
    return found


def _run(
    kind: str,
    N: int,
    ghz: bool,
    pair1: PairSpec,
    pair2: PairSpec,
    phases: PhasePair,
    order: tuple[str, str] | None,
    loss_mode: str,
    acknowledge_loss: bool,
) -> ProtocolResult:
    layout = _layout(kind, N, ghz)
    spec = FaradayGateSpec(phases, lossy=not phases.is_unit_modulus, mode=loss_mode)
    gate = faraday_gate(spec, acknowledge_loss=acknowledge_loss)
    names = tuple(c.name for c in layout.charlie)
    if order is None:
        order = names
    elif sorted(order) != sorted(names):
        raise ValueError(f"gate order must be a permutation of {names}, got {order}")

    success = _success_labels(layout, gate, order)
    state = _evolve(layout, pair1, pair2, gate, order)
    branches = core.enumerate_branches(state, layout.measured)
    reports = [_report(b, N, b.label in success) for b in branches]
    p_success = float(sum(b.probability for b in branches if b.label in success))
    name = f"{kind}-ghz" if ghz else kind
    return ProtocolResult(
        protocol=name,
        N=N,
        phases=phases,
        gate_order=tuple(order),
        measured=layout.measured,
        remote=tuple(q.name for q in layout.remote),
        final_state=state,
        branches=branches,
        reports=reports,
        success_outcomes=success,
        success_probability=p_success,
        metadata={
            "a1": pair1.a,
            "b1": pair1.b,
            "a2": pair2.a,
            "b2": pair2.b,
            "loss_mode": loss_mode,
            "lossy_gate": gate.lossy,
        },
    )


def atomic_ecp(
    pair1: PairSpec,
    pair2: PairSpec,
    phases: PhasePair = IDEAL_PHASES,
    *,
    order: tuple[str, str] | None = None,
    loss_mode: str = RENORMALIZE,
    acknowledge_loss: bool = False,
) -> ProtocolResult:
    """Concentrate two atomic pairs (atoms 1-2 and 3-4) onto atoms 1 and 4.

    Register order: atom1, atom2, atom3, atom4, photon.  Charlie measures
    photon, atom2 and atom3; photon = R heralds success.
    """
    return _run("atomic", 1, False, pair1, pair2, phases, order, loss_mode, acknowledge_loss)


def photonic_ecp(
    pair1: PairSpec,
    pair2: PairSpec,
    phases: PhasePair = IDEAL_PHASES,
    *,
    order: tuple[str, str] | None = None,
    loss_mode: str = RENORMALIZE,
    acknowledge_loss: bool = False,
) -> ProtocolResult:
    """Concentrate two photonic pairs onto photons 1 and 4 via a cavity atom.

    Register order: photon1, photon2, photon3, photon4, atom_a.  ``order``
    picks which of photon2/photon3 scatters first.
    """
    return _run("photonic", 1, False, pair1, pair2, phases, order, loss_mode, acknowledge_loss)


def atomic_ghz_ecp(
    spec: GhzSpec,
    phases: PhasePair = IDEAL_PHASES,
    *,
    order: tuple[str, str] | None = None,
    loss_mode: str = RENORMALIZE,
    acknowledge_loss: bool = False,
) -> ProtocolResult:
    """GHZ-class version of :func:`atomic_ecp`.

    Register order: A1..AN, C1, C2, B1..BN, photon (2N + 3 qubits).  Success
    leaves A1..AN B1..BN in a 2N-qubit GHZ state.
    """
    return _run("atomic", spec.N, True, spec.pair1, spec.pair2, phases, order, loss_mode, acknowledge_loss)


def photonic_ghz_ecp(
    spec: GhzSpec,
    phases: PhasePair = IDEAL_PHASES,
    *,
    order: tuple[str, str] | None = None,
    loss_mode: str = RENORMALIZE,
    acknowledge_loss: bool = False,
) -> ProtocolResult:
    return _run("photonic", spec.N, True, spec.pair1, spec.pair2, phases, order, loss_mode, acknowledge_loss)


def success_probability_analytic(a1: float) -> float:
    if not 0 < a1 < 1:
        raise ValueError(f"a1 must lie in (0, 1), got {a1}")
    return 2 * a1 * a1 * (1 - a1 * a1)


def success_probability_general(pair1: PairSpec, pair2: PairSpec, phases: PhasePair = IDEAL_PHASES) -> float:
    """(a1^2 b2^2 + b1^2 a2^2) sin^2(phi - phi0) for unit-modulus phases."""
    weight = (pair1.a * pair2.b) ** 2 + (pair1.b * pair2.a) ** 2
    return weight * math.sin(phases.phi - phases.phi0) ** 2


PROTOCOLS = ("atomic", "photonic", "atomic-ghz", "photonic-ghz")


def run_protocol(
    protocol: str,
    pair1: PairSpec,
    pair2: PairSpec,
    phases: PhasePair = IDEAL_PHASES,
    N: int = 1,
    **kwargs,
) -> ProtocolResult:
    runners: dict[str, Callable[..., ProtocolResult]] = {
        "atomic": lambda: atomic_ecp(pair1, pair2, phases, **kwargs),
        "photonic": lambda: photonic_ecp(pair1, pair2, phases, **kwargs),
        "atomic-ghz": lambda: atomic_ghz_ecp(GhzSpec(N, pair1, pair2), phases, **kwargs),
        "photonic-ghz": lambda: photonic_ghz_ecp(GhzSpec(N, pair1, pair2), phases, **kwargs),
    }
    if protocol not in runners:
        raise ValueError(f"unknown protocol {protocol!r}; choose from {', '.join(PROTOCOLS)}")
    if N != 1 and not protocol.endswith("ghz"):
        raise ValueError(f"N={N} only applies to GHZ protocols")
    return runners[protocol]()


def branch_probability_vector(result: ProtocolResult) -> np.ndarray:
    return np.array([b.probability for b in result.branches])
