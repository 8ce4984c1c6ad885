"""
Division Field Toolkit Package
"""

__version__ = "0.2.0"
