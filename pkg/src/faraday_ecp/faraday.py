"""Low-Q cavity reflection coefficients and the photon-atom phase gate.

All frequencies share one angular-frequency unit; kappa = 1 is the usual
choice.  The photon sees the coupled-cavity reflection r when its
polarization drives the atom's occupied ground state (L with g_L, R with
g_R) and the empty-cavity reflection r0 otherwise.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .core import Gate

SPEED_OF_LIGHT = 299_792_458.0

SINGULAR_TOL = 1e-15
LOSS_REJECT_TOL = 1e-6
LOSS_WARN_MODULUS = 0.99

RENORMALIZE = "renormalize"
REJECT = "reject"

ANCHOR_CAVITY = "cavity"
ANCHOR_ATOM = "atom"


class SingularParametersError(ArithmeticError):
    """Reflection-coefficient denominator vanishes."""


class LossyGateError(ValueError):
    """A non-unitary scattering gate was requested without acknowledgment."""


@dataclass(frozen=True)
class CavityParams:
    omega0: float
    omegaC: float
    omegaP: float
    kappa: float = 1.0
    gamma: float = 0.0
    g: float = 0.5

    def __post_init__(self):
        for name in ("omega0", "omegaC", "omegaP", "kappa", "gamma", "g"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.kappa <= 0:
            raise ValueError(f"kappa must be positive, got {self.kappa}")
        if self.gamma < 0:
            raise ValueError(f"gamma must be non-negative, got {self.gamma}")
        if self.g < 0:
            raise ValueError(f"g must be non-negative, got {self.g}")

    @classmethod
    def ideal(cls, kappa: float = 1.0) -> CavityParams:
        """omega0 = omegaC, omegaP = omegaC - kappa/2, g = kappa/2, gamma = 0."""
        return cls(omega0=0.0, omegaC=0.0, omegaP=-kappa / 2, kappa=kappa, gamma=0.0, g=kappa / 2)

    @classmethod
    def detuned(
        cls,
        detuning: float,
        sign: int = 1,
        anchor: str = ANCHOR_CAVITY,
        g: float | None = None,
        gamma: float = 0.0,
        kappa: float = 1.0,
    ) -> CavityParams:
        """Cavity offset from the atom by ``omegaC - omega0 = sign * detuning``.

        The probe sits kappa/2 below the cavity (``anchor="cavity"``) or below
        the atom (``anchor="atom"``).
        """
        if sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        omegaC = 0.0
        omega0 = omegaC - sign * detuning
        if anchor == ANCHOR_CAVITY:
            omegaP = omegaC - kappa / 2
        elif anchor == ANCHOR_ATOM:
            omegaP = omega0 - kappa / 2
        else:
            raise ValueError(f"unknown probe anchor {anchor!r}")
        return cls(omega0, omegaC, omegaP, kappa, gamma, kappa / 2 if g is None else g)


def _principal(angle: float) -> float:
    # np.angle returns [-pi, pi]; fold the -pi edge (and float dust beside it) onto +pi
    if angle <= -math.pi + 1e-15:
        angle += 2 * math.pi
    return angle


@dataclass(frozen=True)
class PhasePair:
    phi: float
    phi0: float
    modCoupled: float = 1.0
    modEmpty: float = 1.0

    @property
    def phi_mod2pi(self) -> float:
        return self.phi % (2 * math.pi)

    @property
    def phi0_mod2pi(self) -> float:
        return self.phi0 % (2 * math.pi)

    @property
    def is_unit_modulus(self) -> bool:
        return abs(self.modCoupled - 1) < LOSS_REJECT_TOL and abs(self.modEmpty - 1) < LOSS_REJECT_TOL

    def coefficients(self) -> tuple[complex, complex]:
        return (self.modCoupled * np.exp(1j * self.phi), self.modEmpty * np.exp(1j * self.phi0))


IDEAL_PHASES = PhasePair(math.pi, math.pi / 2)


@dataclass(frozen=True)
class FaradayGateSpec:
    phases: PhasePair
    lossy: bool = False
    mode: str = RENORMALIZE

    def __post_init__(self):
        if self.mode not in (RENORMALIZE, REJECT):
            raise ValueError(f"unknown leakage mode {self.mode!r}")


def reflection_empty(params: CavityParams) -> complex:
    dc = params.omegaC - params.omegaP
    half_k = params.kappa / 2
    return complex(1j * dc - half_k) / complex(1j * dc + half_k)


def reflection_coupled(params: CavityParams) -> complex:
    if params.g == 0:
        return reflection_empty(params)
    dc = params.omegaC - params.omegaP
    atom = 1j * (params.omega0 - params.omegaP) + params.gamma / 2
    g2 = params.g**2
    num = (1j * dc - params.kappa / 2) * atom + g2
    den = (1j * dc + params.kappa / 2) * atom + g2
    if abs(den) < SINGULAR_TOL:
        raise SingularParametersError(f"reflection denominator vanishes for {params}")
    return complex(num / den)


def phase_pair(params: CavityParams) -> PhasePair:
    r = reflection_coupled(params)
    r0 = reflection_empty(params)
    return PhasePair(
        phi=_principal(math.atan2(r.imag, r.real)),
        phi0=_principal(math.atan2(r0.imag, r0.real)),
        modCoupled=abs(r),
        modEmpty=abs(r0),
    )


def faraday_gate(spec: FaradayGateSpec | PhasePair, acknowledge_loss: bool = False) -> Gate:
    """Diagonal photon (x) atom scattering gate.

    Basis order |L,g_L>, |L,g_R>, |R,g_L>, |R,g_R>; matched polarization and
    ground state pick up the coupled phase, mismatched ones the empty-cavity
    phase.  Ideal phases give diag(-1, i, i, -1).

    In ``renormalize`` mode reflection moduli are dropped and the gate is
    unitary.  In ``reject`` mode a lossy phase pair raises
    :class:`LossyGateError` unless ``acknowledge_loss`` is set, in which case
    the returned gate carries the damped amplitudes and is flagged lossy.
    """
    if isinstance(spec, PhasePair):
        spec = FaradayGateSpec(spec, lossy=not spec.is_unit_modulus)
    p = spec.phases
    min_mod = min(p.modCoupled, p.modEmpty)
    leaking = spec.lossy or min_mod < 1 - LOSS_REJECT_TOL

    if leaking and spec.mode == REJECT:
        if not acknowledge_loss:
            raise LossyGateError(
                f"reflection modulus {min_mod:.6g} < 1; pass acknowledge_loss=True to build a lossy gate"
            )
        r, r0 = p.coefficients()
        return Gate(np.diag([r, r0, r0, r]), f"faraday(lossy, phi={p.phi:.6g}, phi0={p.phi0:.6g})", lossy=True)

    if leaking and min_mod < LOSS_WARN_MODULUS:
        warnings.warn(
            f"reflection modulus {min_mod:.4g} dropped; gate keeps phases only",
            RuntimeWarning,
            stacklevel=2,
        )
    r, r0 = np.exp(1j * p.phi), np.exp(1j * p.phi0)
    return Gate(np.diag([r, r0, r0, r]), f"faraday(phi={p.phi:.6g}, phi0={p.phi0:.6g})")


def coupling_from_position(g0: float, x: float, wavelength: float) -> float:
    """Standing-wave coupling g0 cos(2 pi x / wavelength)."""
    if wavelength <= 0:
        raise ValueError(f"wavelength must be positive, got {wavelength}")
    return g0 * math.cos(2 * math.pi * x / wavelength)


def cavity_q_factor(omegaC: float, kappa: float) -> float:
    if kappa <= 0:
        raise ValueError(f"kappa must be positive, got {kappa}")
    return omegaC / (2 * kappa)


def angular_frequency_from_wavelength(wavelength: float) -> float:
    if wavelength <= 0:
        raise ValueError(f"wavelength must be positive, got {wavelength}")
    return 2 * math.pi * SPEED_OF_LIGHT / wavelength


