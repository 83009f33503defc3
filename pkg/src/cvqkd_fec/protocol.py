"""Gaussian CVQKD information quantities for the coherent-state, homodyne-detection,
reverse-reconciliation protocol under collective attacks (asymptotic keys).

All variances are in shot-noise units (vacuum quadrature noise = 1). The channel
is described by transmission T and relative-input excess noise epsilon; detection
by homodyne efficiency eta and electronic noise nu_el.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "PHYSICALITY_TOL",
    "NonPhysicalSpectrumError",
    "ChannelParams",
    "ProtocolParams",
    "ModulationVariance",
    "SymplecticSpectrum",
    "entanglement_breaking_channel",
    "g_holevo",
    "holevo_bound_eve",
    "mutual_information_ab",
    "required_beta",
    "snr",
    "symplectic_spectrum",
    "va_for_snr",
]

LN2 = math.log(2.0)

# Symplectic eigenvalues of physical covariance matrices satisfy lambda >= 1;
# double-precision cancellation near degeneracy motivates the slack.
PHYSICALITY_TOL = 1e-9


class NonPhysicalSpectrumError(ValueError):
    """The computed symplectic spectrum is not that of a physical state."""


@dataclass(frozen=True)
class ChannelParams:
    """Channel and detection parameters, without Alice's modulation variance."""

    t: float
    epsilon: float
    eta: float
    nu_el: float

    def __post_init__(self):
        if not 0.0 < self.t <= 1.0:
            raise ValueError(f"transmission must satisfy 0 < T <= 1, got {self.t}")
        if self.epsilon < 0.0:
            raise ValueError(f"excess noise must be >= 0, got {self.epsilon}")
        if not 0.0 < self.eta <= 1.0:
            raise ValueError(f"detection efficiency must satisfy 0 < eta <= 1, got {self.eta}")
        if self.nu_el < 0.0:
            raise ValueError(f"electronic noise must be >= 0, got {self.nu_el}")

    @property
    def chi_line(self) -> float:
        return 1.0 / self.t - 1.0 + self.epsilon

    @property
    def chi_hom(self) -> float:
        return (1.0 - self.eta + self.nu_el) / self.eta

    @property
    def chi_tot(self) -> float:
        return self.chi_line + self.chi_hom / self.t

    def with_va(self, v_a: float) -> "ProtocolParams":
        return ProtocolParams(v_a=v_a, t=self.t, epsilon=self.epsilon,
                              eta=self.eta, nu_el=self.nu_el)


@dataclass(frozen=True)
class ProtocolParams:
    """Full protocol description: Alice's modulation variance plus the channel.

    v_a is the modulation variance; the transmitted state variance is V = v_a + 1.
    """

    v_a: float
    t: float
    epsilon: float
    eta: float
    nu_el: float

    def __post_init__(self):
        if self.v_a < 0.0:
            raise ValueError(f"modulation variance must be >= 0, got {self.v_a}")
        # Reuse the channel-side bound checks.
        ChannelParams(self.t, self.epsilon, self.eta, self.nu_el)

    @property
    def channel(self) -> ChannelParams:
        return ChannelParams(self.t, self.epsilon, self.eta, self.nu_el)

    @property
    def v(self) -> float:
        return self.v_a + 1.0

    @property
    def chi_line(self) -> float:
        return self.channel.chi_line

    @property
    def chi_hom(self) -> float:
        return self.channel.chi_hom

    @property
    def chi_tot(self) -> float:
        return self.channel.chi_tot


def entanglement_breaking_channel(eta: float = 1.0, nu_el: float = 0.0) -> ChannelParams:
    """Unity-gain classical-teleporter channel: T = 1, epsilon = 2.

    No secret key can exist through this channel, which makes it an
    impossibility oracle for key-rate models. Detection parameters are the
    caller's choice (defaults are ideal detection).
    """
    return ChannelParams(t=1.0, epsilon=2.0, eta=eta, nu_el=nu_el)


def snr(p: ProtocolParams) -> float:
    """Signal-to-noise ratio seen by Bob: s = V_A / (1 + chi_tot)."""
    return p.v_a / (1.0 + p.chi_tot)


def mutual_information_ab(p: ProtocolParams) -> float:
    """Alice-Bob capacity in bits per symbol: (1/2) log2((V + chi_tot)/(chi_tot + 1)).

    Computed as (1/2) log2(1 + s), which is the same quantity and keeps
    precision at the small SNRs this protocol operates at.
    """
    return 0.5 * math.log1p(snr(p)) / LN2


@dataclass(frozen=True)
class ModulationVariance:
    """Result of solving for V_A at a target SNR.

    in_range is False when the solution leaves [1, 100]; the value is never
    clamped, callers decide what an out-of-range point means.
    """

    value: float
    in_range: bool


def va_for_snr(channel: ChannelParams, s_target: float) -> ModulationVariance:
    """Modulation variance giving SNR s_target on the given channel."""
    if s_target <= 0.0:
        raise ValueError(f"target SNR must be > 0, got {s_target}")
    v_a = s_target * (1.0 + channel.chi_tot)
    return ModulationVariance(value=v_a, in_range=1.0 <= v_a <= 100.0)


@dataclass(frozen=True)
class SymplecticSpectrum:
    """Symplectic eigenvalues of the shared and conditional two-mode states,
    together with the A, B, C, D intermediates they derive from."""

    lambda1: float
    lambda2: float
    lambda3: float
    lambda4: float
    a_val: float
    b_val: float
    c_val: float
    d_val: float

    def __post_init__(self):
        for name in ("lambda1", "lambda2", "lambda3", "lambda4"):
            lam = getattr(self, name)
            if lam < 1.0 - PHYSICALITY_TOL:
                raise NonPhysicalSpectrumError(
                    f"{name} = {lam!r} < 1: not a physical covariance matrix"
                )
        if self.a_val * self.a_val < 4.0 * self.b_val - _disc_tol(self.a_val, self.b_val):
            raise NonPhysicalSpectrumError("A^2 < 4B: complex symplectic eigenvalues")
        if self.c_val * self.c_val < 4.0 * self.d_val - _disc_tol(self.c_val, self.d_val):
            raise NonPhysicalSpectrumError("C^2 < 4D: complex symplectic eigenvalues")

    @property
    def eigenvalues(self) -> tuple[float, float, float, float]:
        return (self.lambda1, self.lambda2, self.lambda3, self.lambda4)


def _disc_tol(x: float, y: float) -> float:
    return PHYSICALITY_TOL * max(x * x, 4.0 * abs(y), 1.0)


def _eig_pair(x: float, y: float) -> tuple[float, float]:
    """Square roots of the two roots of z^2 - x z + y = 0.

    The smaller root is evaluated as 2y / (x + sqrt(disc)), which avoids the
    catastrophic cancellation x - sqrt(x^2 - 4y) suffers for x^2 >> 4y.
    """
    disc = x * x - 4.0 * y
    if disc < 0.0:
        # The formulas assume exact arithmetic; clamp only within tolerance.
        if disc >= -_disc_tol(x, y):
            disc = 0.0
        else:
            raise NonPhysicalSpectrumError(
                f"negative discriminant {disc!r} for (x={x!r}, y={y!r})"
            )
    root = math.sqrt(disc)
    lam_sq_hi = 0.5 * (x + root)
    lam_sq_lo = (2.0 * y / (x + root)) if x + root > 0.0 else 0.5 * (x - root)
    return math.sqrt(max(lam_sq_hi, 0.0)), math.sqrt(max(lam_sq_lo, 0.0))


def symplectic_spectrum(p: ProtocolParams) -> SymplecticSpectrum:
    """A, B, C, D intermediates and the four symplectic eigenvalues.

    lambda1,2 describe the Alice-Bob state after the channel; lambda3,4 the
    state conditioned on Bob's (imperfect) homodyne measurement. The C and D
    denominators use T(V + chi_tot): the total noise including the trusted
    detector contribution. With T(V + chi_line) instead, the eta -> 0 limit
    would not reduce conditioning to a no-op and the spectrum turns
    unphysical for strongly imperfect detection.
    """
    v = p.v
    t = p.t
    chi_line = p.chi_line
    chi_hom = p.chi_hom
    chi_tot = p.chi_tot

    a_val = v * v * (1.0 - 2.0 * t) + 2.0 * t + (t * (v + chi_line)) ** 2
    sqrt_b = t * (v * chi_line + 1.0)  # >= 0 for all valid parameters
    b_val = sqrt_b * sqrt_b

    denom = t * (v + chi_tot)
    c_val = (a_val * chi_hom + v * sqrt_b + t * (v + chi_line)) / denom
    d_val = sqrt_b * (v + sqrt_b * chi_hom) / denom

    lam1, lam2 = _eig_pair(a_val, b_val)
    lam3, lam4 = _eig_pair(c_val, d_val)
    return SymplecticSpectrum(lam1, lam2, lam3, lam4, a_val, b_val, c_val, d_val)


def g_holevo(x: float) -> float:
    """Bosonic entropy kernel G[x] = (x+1) log2(x+1) - x log2(x), with G[0] = 0.

    The x -> 0 limit of x log2(x) is 0, so G extends continuously; tiny
    negative arguments from eigenvalue round-off are treated as 0.
    """
    if x <= 0.0:
        if x < -PHYSICALITY_TOL:
            raise ValueError(f"G[x] needs x >= 0, got {x}")
        return 0.0
    return (x + 1.0) * math.log2(x + 1.0) - x * math.log2(x)


def holevo_bound_eve(p: ProtocolParams) -> float:
    """Holevo bound on Eve's information about Bob's data, bits per symbol.

    Raises NonPhysicalSpectrumError instead of returning a number when the
    symplectic spectrum is not physical.
    """
    s = symplectic_spectrum(p)
    return (
        g_holevo((s.lambda1 - 1.0) / 2.0)
        + g_holevo((s.lambda2 - 1.0) / 2.0)
        - g_holevo((s.lambda3 - 1.0) / 2.0)
        - g_holevo((s.lambda4 - 1.0) / 2.0)
    )


def required_beta(p: ProtocolParams) -> float:
    """Reconciliation efficiency needed for a positive key: I_E / I_AB."""
    i_ab = mutual_information_ab(p)
    if i_ab <= 0.0:
        raise ValueError("I_AB is zero (V_A = 0): required efficiency is undefined")
    return holevo_bound_eve(p) / i_ab
