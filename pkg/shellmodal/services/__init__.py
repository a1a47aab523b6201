"""
Service modules - solvers, analytical oracles, run scenarios and verification.
"""
