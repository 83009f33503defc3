"""Channel-capacity reference curves and the reconciliation-efficiency calculus.

Efficiency is computed against the Gaussian-input AWGN capacity (1/2) log2(1+s);
that is the convention under which the worked ratios R / I_AB reproduce, and the
one the key-rate models consume. The binary-input (BPSK) capacity and the
non-zero-error-rate correction are provided as reference curves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.integrate import quad

__all__ = [
    "EfficiencyPoint",
    "beta_fec",
    "biawgn_capacity",
    "binary_entropy",
    "gaussian_capacity",
    "nonzero_error_capacity",
]

LN2 = math.log(2.0)


def gaussian_capacity(s: float) -> float:
    """Gaussian-input AWGN capacity (1/2) log2(1 + s), bits per channel use."""
    if s < 0.0:
        raise ValueError(f"SNR must be >= 0, got {s}")
    return 0.5 * math.log1p(s) / LN2


def binary_entropy(p: float) -> float:
    """Binary entropy h2(p) in bits, with h2(0) = h2(1) = 0."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability must be in [0, 1], got {p}")
    if p == 0.0 or p == 1.0:
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


def biawgn_capacity(s: float) -> float:
    """Capacity of the binary-input AWGN channel at SNR s, bits per channel use.

    Equiprobable BPSK symbols +-1 with noise variance sigma^2 = 1/s per real
    dimension. Evaluated as h(Y) - h(Y|X) by adaptive quadrature over
    y in [-8 sigma - 1, 8 sigma + 1]; the integrand is smooth and rapidly
    decaying, so the truncation error is negligible against the tolerances.
    """
    if s < 0.0:
        raise ValueError(f"SNR must be >= 0, got {s}")
    if s == 0.0:
        return 0.0
    sigma = 1.0 / math.sqrt(s)
    norm = 1.0 / (sigma * math.sqrt(2.0 * math.pi))
    inv_two_var = 0.5 / (sigma * sigma)

    def neg_p_log2_p(y: float) -> float:
        p = 0.5 * norm * (
            math.exp(-inv_two_var * (y - 1.0) ** 2)
            + math.exp(-inv_two_var * (y + 1.0) ** 2)
        )
        if p <= 0.0:
            return 0.0
        return -p * math.log2(p)

    hi = 8.0 * sigma + 1.0
    h_y, _ = quad(neg_p_log2_p, -hi, hi, epsrel=1e-8, epsabs=1e-12,
                  limit=200, points=[-1.0, 0.0, 1.0])
    h_noise = 0.5 * math.log2(2.0 * math.pi * math.e * sigma * sigma)
    return min(max(h_y - h_noise, 0.0), 1.0)


def nonzero_error_capacity(s: float, p_b: float, base: str = "biawgn") -> float:
    """Maximum rate when decoding is only required up to bit error rate p_b.

    The standard rate-distortion correction C(s) / (1 - h2(p_b)) applied to the
    chosen base capacity ("biawgn" or "gaussian"). Reduces to the base capacity
    at p_b = 0 and diverges as p_b -> 1/2.
    """
    if not 0.0 <= p_b < 0.5:
        raise ValueError(f"tolerated BER must be in [0, 0.5), got {p_b}")
    if base == "biawgn":
        c = biawgn_capacity(s)
    elif base == "gaussian":
        c = gaussian_capacity(s)
    else:
        raise ValueError(f"base must be 'biawgn' or 'gaussian', got {base!r}")
    return c / (1.0 - binary_entropy(p_b))


def beta_fec(rate: float, s: float) -> float:
    """Reconciliation efficiency of a rate-R code operated at SNR s.

    beta = R / ((1/2) log2(1+s)). Values above 1 are permitted: they flag a
    comparison against the zero-error capacity that a non-zero-error-rate code
    is not bound by.
    """
    if not 0.0 < rate <= 1.0:
        raise ValueError(f"code rate must be in (0, 1], got {rate}")
    if s <= 0.0:
        raise ValueError(f"SNR must be > 0, got {s}")
    return rate / gaussian_capacity(s)


@dataclass(frozen=True)
class EfficiencyPoint:
    """A (rate, SNR, efficiency) triple with beta tied to the other two fields."""

    rate: float
    s: float
    beta_fec: float

    def __post_init__(self):
        expected = beta_fec(self.rate, self.s)
        if not math.isclose(self.beta_fec, expected, rel_tol=1e-12, abs_tol=1e-12):
            raise ValueError(
                f"beta_fec={self.beta_fec!r} inconsistent with rate/capacity "
                f"({expected!r})"
            )

    @classmethod
    def from_rate_snr(cls, rate: float, s: float) -> "EfficiencyPoint":
        return cls(rate=rate, s=s, beta_fec=beta_fec(rate, s))
