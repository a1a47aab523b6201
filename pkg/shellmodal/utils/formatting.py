"""
Formatting utilities for frequencies, eigenvalues and strains.
"""

import math


def signed_frequency(omega2) -> float:
    """
    Signed frequency sign(omega^2) * sqrt(|omega^2|) / 2 pi.

    Negative values mark unstable (imaginary-frequency) modes.

    Args:
        omega2: Eigenvalue omega^2 in 1/ps^2

    Returns:
        Frequency in THz
    """
    omega2 = float(omega2)
    return math.copysign(math.sqrt(abs(omega2)), omega2) / (2.0 * math.pi)


def format_frequency(value, decimals: int = 5) -> str:
    """
    Format a frequency in THz for table display.

    Args:
        value: Frequency in THz (can be string, int, or float)
        decimals: Number of decimal places

    Returns:
        Formatted string
    """
    try:
        value = float(value)
        if value != value:
            return "-"
        return f"{value:.{decimals}f}"
    except (ValueError, TypeError):
        return str(value)


def format_signed_frequency(omega2, decimals: int = 5) -> str:
    """
    Format an eigenvalue as a signed frequency, marking imaginary ones.

    Args:
        omega2: Eigenvalue omega^2 in 1/ps^2
        decimals: Number of decimal places

    Returns:
        Formatted string, e.g. "0.07027" or "-0.00312 (unstable)"
    """
    try:
        freq = signed_frequency(omega2)
    except (ValueError, TypeError):
        return str(omega2)
    text = f"{freq:.{decimals}f}"
    return f"{text} (unstable)" if freq < 0 else text


def format_full_precision(value) -> str:
    """
    Format a float with 17 significant digits for regression-grade CSV output.

    Args:
        value: Numeric value

    Returns:
        Formatted string
    """
    try:
        return f"{float(value):.17g}"
    except (ValueError, TypeError):
        return str(value)


def format_percentage(value, decimals: int = 2) -> str:
    """
    Format a fraction (e.g. a strain) as a percentage.

    Args:
        value: Fraction to format (0.027 -> "2.70%")
        decimals: Number of decimal places

    Returns:
        Formatted percentage string
    """
    try:
        value = float(value) * 100.0
        return f"{value:.{decimals}f}%"
    except (ValueError, TypeError):
        return str(value)


def format_relative_error(value, reference) -> str:
    """
    Format the relative deviation of a value from a reference.

    Args:
        value: Computed value
        reference: Reference value

    Returns:
        Formatted change string with +/- and percentage, "N/A" for zero reference
    """
    try:
        value = float(value)
        reference = float(reference)
        if reference == 0:
            return "N/A"
        change = (value - reference) / abs(reference) * 100.0
        sign = "+" if change >= 0 else ""
        return f"{sign}{change:.3f}%"
    except (ValueError, TypeError):
        return "N/A"
