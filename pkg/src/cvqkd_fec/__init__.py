"""CVQKD secret-key-rate models under imperfect forward error correction."""

from cvqkd_fec.protocol import (
    ChannelParams,
    ModulationVariance,
    NonPhysicalSpectrumError,
    ProtocolParams,
    SymplecticSpectrum,
    entanglement_breaking_channel,
    g_holevo,
    holevo_bound_eve,
    mutual_information_ab,
    required_beta,
    snr,
    symplectic_spectrum,
    va_for_snr,
)

__version__ = "0.1.0"
