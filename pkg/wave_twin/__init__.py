# wave_twin/__init__.py
#
#   Wave Twin
#    Author: Nadim-Daniel Ghaznavi
#    Copyright: (c) 2025-2026 Nadim-Daniel Ghaznavi
#    License: GPL 3.0

"""
Lane-wise intersection waveform simulator and graph attention digital twins.
"""

from wave_twin.constants.DTwin import DTwin

__version__ = DTwin.VERSION
