"""Client-side mechanism: clipping, Sign-Gaussian randomization and sharing."""

from src.client.mechanism import (
    SignUpdate,
    attenuation,
    bits_to_signs,
    clip,
    encode_and_split,
    flip_probability,
    sign_gaussian,
    sign_of,
    signs_to_bits,
)
from src.client.params import C_MAD, DpReport, OutputMode, RainParams, minimal_sigma, validate_dp
from src.client.privacy import PrivacyLedger, amplified_epsilon

__all__ = [
    "SignUpdate",
    "attenuation",
    "bits_to_signs",
    "clip",
    "encode_and_split",
    "flip_probability",
    "sign_gaussian",
    "sign_of",
    "signs_to_bits",
    "C_MAD",
    "DpReport",
    "OutputMode",
    "RainParams",
    "minimal_sigma",
    "validate_dp",
    "PrivacyLedger",
    "amplified_epsilon",
]
