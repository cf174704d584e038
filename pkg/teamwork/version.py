"""Define version number here and read it from pyproject.toml automatically"""
__version__ = "0.3.0"
