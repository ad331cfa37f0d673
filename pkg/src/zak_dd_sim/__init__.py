"""Delay-Doppler signal processing with the Zak transform: bases, channels, modems and detectors."""

__version__ = "0.1.0"

from .channel import DDChannel, sample_random_channel
from .detect import Constellation, cross_domain_detect, lmmse_dd
from .grid import DDFrame, DDGrid, TimeSignal
from .modem import ModemConfig, effective_time_matrix, receive, transmit
from .pulses import BasisConfig, WindowKind
from .zak import dzt, idzt

__all__ = [
    "BasisConfig",
    "Constellation",
    "DDChannel",
    "DDFrame",
    "DDGrid",
    "ModemConfig",
    "TimeSignal",
    "WindowKind",
    "cross_domain_detect",
    "dzt",
    "effective_time_matrix",
    "idzt",
    "lmmse_dd",
    "receive",
    "sample_random_channel",
    "transmit",
]
