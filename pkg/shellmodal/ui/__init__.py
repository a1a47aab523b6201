"""
UI modules for shellmodal
"""
