"""
Utility modules for shellmodal
"""

from .formatting import format_frequency, format_signed_frequency, signed_frequency
