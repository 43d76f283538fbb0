"""Closed-form mean-field algebra of the driven cavity + two-level-system + pumped crystal model.

All rates and detunings are expressed in units of the atomic decay rate
``gamma``; formulas keep ``gamma`` explicit so any consistent unit system
works.  Field amplitudes carry sqrt(rate) units, intensities rate units.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass

from .errors import ParametricSingularity

# Guard for the parametric-oscillation denominator, in units of gamma^2.
EPS_DEN = 1e-9


class Stability(enum.Enum):
    STABLE = "Stable"
    UNSTABLE = "Unstable"
    MARGINAL = "Marginal"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class SystemParams:
    """Model parameters.

    Attributes
    ----------
    kappa_l, kappa_r : float
        Left/right mirror decay rates (> 0).
    g : float
        Atom-cavity coupling strength (>= 0).
    delta_c : float
        Cavity detuning from the drive.
    delta_tls : float
        Two-level-system detuning from the drive.
    g_nl_mag : float
        Magnitude |G| of the pump-induced nonlinear coefficient (>= 0).
    phi : float
        Pump relative phase, normalized into [0, 2*pi).
    omega_d : float
        Total drive amplitude (sum over both mirrors), real and >= 0.
    gamma : float
        Atomic decay rate, the global unit (> 0, default 1).
    """

    kappa_l: float
    kappa_r: float
    g: float = 0.0
    delta_c: float = 0.0
    delta_tls: float = 0.0
    g_nl_mag: float = 0.0
    phi: float = 0.0
    omega_d: float = 0.0
    gamma: float = 1.0

    def __post_init__(self) -> None:
        for name in ("kappa_l", "kappa_r", "g", "delta_c", "delta_tls",
                     "g_nl_mag", "phi", "omega_d", "gamma"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ValueError(f"{name} must be a finite real number, got {v!r}")
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if self.kappa_l <= 0:
            raise ValueError("kappa_l must be positive")
        if self.kappa_r <= 0:
            raise ValueError("kappa_r must be positive")
        if self.g < 0:
            raise ValueError("g must be nonnegative")
        if self.g_nl_mag < 0:
            raise ValueError("g_nl_mag must be nonnegative")
        if self.omega_d < 0:
            raise ValueError("omega_d must be nonnegative (drive is real)")
        object.__setattr__(self, "phi", self.phi % (2.0 * math.pi))

    @property
    def kappa(self) -> float:
        """Total cavity decay rate kappa_l + kappa_r."""
        return self.kappa_l + self.kappa_r

    @property
    def g_nl(self) -> complex:
        """Complex nonlinear coefficient G = |G| e^{i phi}."""
        return self.g_nl_mag * cmath.exp(1j * self.phi)


@dataclass(frozen=True)
class EffectiveCavity:
    """Atom-dressed cavity linewidth and detuning at a given photon number."""

    kappa0: float
    delta0: float


@dataclass
class SteadyState:
    """One self-consistent fixed point of the mean-field equations."""

    n_c: float
    c_bar: complex
    sigma_minus_bar: complex
    sigma_z_bar: float
    stability: Stability
    residual: float


def saturation_denominator(n_c: float, p: SystemParams) -> float:
    """D = gamma^2/4 + delta_tls^2 + 2 g^2 n_c; strictly positive."""
    return p.gamma ** 2 / 4.0 + p.delta_tls ** 2 + 2.0 * p.g ** 2 * n_c


def effective_cavity_params(n_c: float, p: SystemParams) -> EffectiveCavity:
    """Atom-dressed cavity parameters at mean photon number ``n_c``.

    kappa0 = kappa/2 + (g^2 gamma / 2) / D
    delta0 = delta_c - g^2 delta_tls / D
    """
    if n_c < 0:
        raise ValueError("n_c must be nonnegative")
    D = saturation_denominator(n_c, p)
    kappa0 = p.kappa / 2.0 + (p.g ** 2 * p.gamma / 2.0) / D
    delta0 = p.delta_c - p.g ** 2 * p.delta_tls / D
    return EffectiveCavity(kappa0=kappa0, delta0=delta0)


def parametric_denominator(n_c: float, p: SystemParams) -> float:
    """kappa0^2 + delta0^2 - 4|G|^2 evaluated at ``n_c``.

    Vanishes at the dressed parametric-oscillation threshold, where the linear
    steady-state response diverges.
    """
    eff = effective_cavity_params(n_c, p)
    return eff.kappa0 ** 2 + eff.delta0 ** 2 - 4.0 * p.g_nl_mag ** 2


def intracavity_field(n_c: float, p: SystemParams) -> complex:
    """Steady-state field amplitude <c> at self-consistent photon number ``n_c``.

    <c> = [(kappa0 - i delta0) + 2 G] Omega_d / (kappa0^2 + delta0^2 - 4|G|^2)

    Raises
    ------
    ParametricSingularity
        If the denominator magnitude is below EPS_DEN * gamma^2.
    """
    eff = effective_cavity_params(n_c, p)
    den = eff.kappa0 ** 2 + eff.delta0 ** 2 - 4.0 * p.g_nl_mag ** 2
    if abs(den) < EPS_DEN * p.gamma ** 2:
        raise ParametricSingularity(
            f"effective denominator {den:.3e} at n_c={n_c:.6g} is below the "
            f"threshold guard; steady-state response undefined")
    return ((eff.kappa0 - 1j * eff.delta0) * p.omega_d + 2.0 * p.g_nl * p.omega_d) / den


def atomic_expectations(c_bar: complex, p: SystemParams) -> tuple[complex, float]:
    """Mean atomic coherence and inversion driven by field ``c_bar``.

    Closed-form fixed point of the atomic mean-field equations under the
    factorization <c sigma_z> = <c><sigma_z>:

        <sigma_z> = -(1/2) D0 / (D0 + 2 g^2 |c|^2),  D0 = gamma^2/4 + delta_tls^2
        <sigma_-> = 2 i g <c> <sigma_z> / (gamma/2 + i delta_tls)

    Returns (<sigma_->, <sigma_z>).  The pair always satisfies the Bloch bound
    |<sigma_->|^2 + <sigma_z>^2 <= 1/4, with equality only for c_bar = 0.
    """
    D0 = p.gamma ** 2 / 4.0 + p.delta_tls ** 2
    sigma_z = -0.5 * D0 / (D0 + 2.0 * p.g ** 2 * abs(c_bar) ** 2)
    sigma_minus = 2j * p.g * c_bar * sigma_z / (p.gamma / 2.0 + 1j * p.delta_tls)
    return sigma_minus, sigma_z


def output_fields(c_bar: complex, c_in_l: complex, c_in_r: complex,
                  p: SystemParams) -> tuple[complex, complex]:
    """Mean output field at each mirror: c_out = sqrt(kappa_mirror) <c> - c_in."""
    out_l = math.sqrt(p.kappa_l) * c_bar - c_in_l
    out_r = math.sqrt(p.kappa_r) * c_bar - c_in_r
    return out_l, out_r


def soc_effective_params(p: SystemParams) -> tuple[float, float]:
    """Crystal-dressed decay and detuning (beta, delta_c_prime).

    beta = kappa/2 + 2|G|cos(phi)   (may be negative; callers must check)
    delta_c_prime = delta_c - 2|G|sin(phi)
    """
    beta = p.kappa / 2.0 + 2.0 * p.g_nl_mag * math.cos(p.phi)
    delta_c_prime = p.delta_c - 2.0 * p.g_nl_mag * math.sin(p.phi)
    return beta, delta_c_prime


def balanced_input_fields(p: SystemParams) -> tuple[complex, complex]:
    """Per-mirror input amplitudes for the in-phase, mirror-balanced drive.

    c_in_m = sqrt(kappa_m) Omega_d / kappa.  This is the unique in-phase split
    with c_in_l / c_in_r = sqrt(kappa_l / kappa_r) and
    sqrt(kappa_l) c_in_l + sqrt(kappa_r) c_in_r = Omega_d, the only split for
    which both outputs can vanish simultaneously.
    """
    c_in_l = math.sqrt(p.kappa_l) * p.omega_d / p.kappa
    c_in_r = math.sqrt(p.kappa_r) * p.omega_d / p.kappa
    return c_in_l, c_in_r


def drive_for_input_intensity(input_intensity: float, p: SystemParams) -> float:
    """Total drive amplitude giving per-mirror input intensity I = |c_in|^2.

    Omega_d = 2 sqrt(kappa/2) sqrt(I).  (Symmetric-mirror convention; for the
    balanced split each mirror then carries exactly intensity I.)
    """
    if input_intensity < 0:
        raise ValueError("input intensity must be nonnegative")
    return 2.0 * math.sqrt(p.kappa / 2.0) * math.sqrt(input_intensity)


def input_intensity_for_drive(omega_d: float, p: SystemParams) -> float:
    """Inverse of :func:`drive_for_input_intensity`: I = Omega_d^2 / (2 kappa)."""
    return omega_d ** 2 / (2.0 * p.kappa)
