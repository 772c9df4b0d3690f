"""Acceptance criteria, one verdict line per check.

Lines are printed as the checks run and repeated in the terminal summary.
Run alone with ``pytest tests/test_acceptance.py -v`` or ``python3 tests/test_acceptance.py``.
"""
import math
import time

import numpy as np
import pytest

import oracles
from faraday_ecp import core
from faraday_ecp.analysis import (
    DeviationSpec,
    deviation_fidelity_analytic,
    deviation_fidelity_simulated,
    mismatch_fidelity_analytic,
    mismatch_fidelity_simulated,
    monte_carlo_protocol,
    success_fidelity,
)
from faraday_ecp.faraday import (
    CavityParams,
    PhasePair,
    angular_frequency_from_wavelength,
    cavity_q_factor,
    coupling_from_position,
    phase_pair,
    reflection_coupled,
)
from faraday_ecp.protocols import (
    GhzSpec,
    PairSpec,
    atomic_ecp,
    atomic_ghz_ecp,
    photonic_ecp,
    photonic_ghz_ecp,
)

VERDICTS: list[str] = []
MHZ = 2 * math.pi * 1e6


def verdict(tag: str, ok: bool, detail: str) -> bool:
    line = f"{'PASS' if ok else 'FAIL'}  {tag:<4} {detail}"
    VERDICTS.append(line)
    print(line)
    return ok


def _all_protocols(a):
    p = PairSpec(a)
    yield "atomic", atomic_ecp(p, p)
    yield "photonic", photonic_ecp(p, p)
    for N in (1, 2, 3):
        yield f"atomic-ghz N={N}", atomic_ghz_ecp(GhzSpec(N, p, p))
        yield f"photonic-ghz N={N}", photonic_ghz_ecp(GhzSpec(N, p, p))


def test_c1_ideal_phase_recovery():
    params = CavityParams.ideal()
    phase_pair(params)  # warm up imports and caches
    t0 = time.perf_counter()
    ph = phase_pair(params)
    r = reflection_coupled(params)
    elapsed = time.perf_counter() - t0
    err = max(abs(ph.phi - math.pi), abs(ph.phi0 - math.pi / 2), abs(abs(r) - 1))
    ok = verdict("1a", err < 1e-12, f"ideal (phi, phi0) = (pi, pi/2), |r| = 1; max error {err:.1e} (tol 1e-12)")
    fast = verdict("1b", elapsed < 1e-3, f"phase computation took {elapsed * 1e6:.1f} us (limit 1 ms)")
    assert ok and fast


def test_c2_success_probability():
    t0 = time.perf_counter()
    worst = 0.0
    for a in np.linspace(0.05, 0.95, 50):
        expected = 2 * a * a * (1 - a * a)
        for _, res in _all_protocols(float(a)):
            worst = max(worst, abs(res.success_probability - expected))
    peak = max(abs(res.success_probability - 0.5) for _, res in _all_protocols(1 / math.sqrt(2)))
    elapsed = time.perf_counter() - t0
    ok = verdict("2a", worst < 1e-10, f"P = 2a^2(1-a^2) over 50 values x 8 runs; max error {worst:.1e} (tol 1e-10)")
    ok &= verdict("2b", peak < 1e-10, f"peak P = 0.5 at a1 = 1/sqrt2; max error {peak:.1e}")
    fast = verdict("2c", elapsed < 5, f"runtime {elapsed:.2f} s (limit 5 s)")
    assert ok and fast


def test_c3_maximal_entanglement():
    worst = 0.0
    for a in (0.2, 0.45, 0.6, 0.8, 0.93):
        for name, res in _all_protocols(a):
            for b, rep in res.success_branches():
                val = core.concurrence(b.residual) if res.N == 1 else rep.fidelity
                worst = max(worst, abs(val - 1))
    ok = verdict("3", worst < 1e-10, f"success-branch concurrence / GHZ fidelity = 1; max error {worst:.1e} (tol 1e-10)")
    assert ok


def test_c4_oracle_equivalence():
    worst = 0.0
    count = 0
    cases = [(0.6, 0.6, math.pi, math.pi / 2), (0.6, 0.8, math.pi, math.pi / 2), (0.3, 0.55, 2.7, 1.4)]
    for a1, a2, phi, phi0 in cases:
        ph = PhasePair(phi, phi0)
        for kind, fn, names in (
            ("atomic", atomic_ecp, ("atom2", "atom3", "photon")),
            ("photonic", photonic_ecp, ("photon2", "photon3", "atom_a")),
        ):
            res = fn(PairSpec(a1), PairSpec(a2), ph)
            psi = oracles.ecp_state(kind, a1, a2, phi, phi0)
            worst = max(worst, float(np.max(np.abs(res.final_state.amplitudes - psi))))
            for b in res.branches:
                bits = tuple(b.outcome[n] for n in names)
                ref = oracles.branch_amplitudes(psi, bits)
                worst = max(worst, float(np.max(np.abs(b.unnormalized() - ref))))
                count += 4
    ok = verdict("4", worst < 1e-10, f"{count} branch amplitudes vs 32x32 Kronecker oracle; max error {worst:.1e} (tol 1e-10)")
    assert ok


def test_c5_deviation_fidelity():
    fp = deviation_fidelity_analytic(DeviationSpec(0.7, 0.1))
    fm = deviation_fidelity_analytic(DeviationSpec(0.7, -0.1))
    ok = verdict("5a", 0.9885 <= fp <= 0.9895, f"F(0.7, +0.1) = {fp:.6f} in [0.9885, 0.9895]")
    ok &= verdict("5b", 0.9905 <= fm <= 0.9915, f"F(0.7, -0.1) = {fm:.6f} in [0.9905, 0.9915]")
    worst = 0.0
    for a1 in np.linspace(0.05, 0.85, 20):
        for k in np.linspace(-0.1, 0.1, 5):
            spec = DeviationSpec(float(a1), float(k))
            worst = max(worst, abs(deviation_fidelity_simulated(spec) - deviation_fidelity_analytic(spec)))
    ok &= verdict("5c", worst < 1e-9, f"simulated vs closed form on 20x5 grid; max error {worst:.1e} (tol 1e-9)")
    assert ok


def test_c6_phase_robust_success():
    rng = np.random.default_rng(2024)
    worst = 0.0
    used = 0
    while used < 100:
        phi, phi0 = rng.uniform(-math.pi, math.pi, 2)
        if abs(math.sin(phi - phi0)) < 1e-3:
            continue  # success set empty when the phases coincide
        used += 1
        ph = PhasePair(float(phi), float(phi0))
        for fn in (atomic_ecp, photonic_ecp):
            res = fn(PairSpec(0.6), PairSpec(0.6), ph)
            worst = max(worst, abs(success_fidelity(res) - 1))
    ok = verdict("6", worst < 1e-9, f"100 random phase pairs, success fidelity = 1; max error {worst:.1e} (tol 1e-9)")
    assert ok


def test_c7_mismatch_fidelity():
    f0 = mismatch_fidelity_analytic(math.pi, math.pi / 2)
    ok_a = verdict("7a", abs(f0 - 1) < 1e-12, f"mismatch_fidelity_analytic(pi, pi/2) = {f0!r}")
    worst = 0.0
    for sign in (1, -1):
        for d in np.linspace(0.005, 0.1, 10):
            mm = mismatch_fidelity_simulated(CavityParams.detuned(float(d), sign))
            worst = max(worst, abs(mm.failure_fidelity - mismatch_fidelity_analytic(mm.phases.phi, mm.phases.phi0)))
    ok_b = verdict(
        "7b",
        worst < 1e-9,
        f"failure-branch fidelity vs 1/2[1 - cos 2(phi - phi0)] over 20 detunings; max error {worst:.2e} (tol 1e-9)",
    )
    assert ok_a and ok_b


def test_c8_feasibility():
    kappa = 53 * MHZ
    q = cavity_q_factor(angular_frequency_from_wavelength(780e-9), kappa)
    ok_a = verdict("8a", abs(q / 3.63e6 - 1) <= 0.01, f"Q = {q:.4e} vs 3.63e6 (tol 1%)")
    lam = 780e-9
    worst = 0.0
    for n in range(4):
        g = coupling_from_position(215 * MHZ, n * lam / 2 + 179e-9, lam)
        worst = max(worst, abs(abs(g) / (kappa / 2) - 1))
    ok_b = verdict("8b", worst <= 0.03, f"|g(x = n lambda/2 + 179 nm)| / (kappa/2) off by {worst:.2%} (tol 3%)")
    assert ok_a and ok_b


def test_c9_monte_carlo():
    a = monte_carlo_protocol("atomic", PairSpec(0.6), PairSpec(0.6), 100_000, seed=7)
    b = monte_carlo_protocol("atomic", PairSpec(0.6), PairSpec(0.6), 100_000, seed=7)
    z = abs(a.success_rate - a.exact_success_probability) / a.exact_sigma
    ok = verdict("9a", z < 5, f"success rate {a.success_rate:.5f} vs {a.exact_success_probability:.4f}; {z:.2f} sigma (limit 5)")
    same = repr(sorted(a.histogram.items())).encode() == repr(sorted(b.histogram.items())).encode()
    ok &= verdict("9b", same, "identical histograms under a fixed seed")
    assert ok


def _random_unitary(rng, dim):
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


def test_c10_unitarity_and_normalization():
    rng = np.random.default_rng(10)
    cases = 1000
    norm_err = sum_err = 0.0
    for _ in range(cases):
        n = int(rng.integers(2, 6))
        labels = [core.atom(f"q{i}") if rng.random() < 0.5 else core.photon(f"q{i}") for i in range(n)]
        amps = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
        psi = core.StateVector(amps / np.linalg.norm(amps), labels)
        arity = int(rng.integers(1, 3))
        targets = [str(x) for x in rng.choice([lab.name for lab in labels], size=arity, replace=False)]
        if rng.random() < 0.5:
            gate = core.Gate(_random_unitary(rng, 2**arity), "U")
        else:
            from faraday_ecp.faraday import faraday_gate

            gate = faraday_gate(PhasePair(*rng.uniform(-math.pi, math.pi, 2))) if arity == 2 else core.HADAMARD
        out = core.apply_gate(psi, gate, targets)
        norm_err = max(norm_err, abs(out.norm - 1))
        k = int(rng.integers(1, n + 1))
        measured = [str(x) for x in rng.choice([lab.name for lab in labels], size=k, replace=False)]
        total = sum(b.probability for b in core.enumerate_branches(out, measured))
        sum_err = max(sum_err, abs(total - 1))
    for a in np.linspace(0.05, 0.95, 10):
        for _, res in _all_protocols(float(a)):
            sum_err = max(sum_err, abs(sum(b.probability for b in res.branches) - 1))
    ok = verdict("10a", norm_err < 1e-12, f"{cases} random gate applications; max norm drift {norm_err:.1e} (tol 1e-12)")
    ok &= verdict("10b", sum_err < 1e-10, f"{cases} random + 80 protocol enumerations; max |sum p - 1| {sum_err:.1e} (tol 1e-10)")
    assert ok


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
