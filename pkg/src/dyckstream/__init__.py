"""Streaming tests for Hamming distance and two-type bracket languages."""

from .meter import BitSource, Meter, Verdict, split_seed
from .ham_fingerprint import FpConfig, ham_fp_run
from .ham_lite import HamLite, ham_lite_run
from .dyck_stream import DyckConfig, DyckLite, dyck_run

__all__ = [
    "BitSource", "Meter", "Verdict", "split_seed",
    "FpConfig", "ham_fp_run", "HamLite", "ham_lite_run",
    "DyckConfig", "DyckLite", "dyck_run",
]
