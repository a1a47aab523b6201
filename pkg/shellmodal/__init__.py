"""
shellmodal - Nonlinear modal analysis of graphene sheets and carbon nanotubes
"""

__version__ = "1.0.0"
__author__ = "shellmodal developers"
