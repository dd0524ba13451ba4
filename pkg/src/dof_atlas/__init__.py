"""Exact DoF regions and Monte Carlo checks for two-user MIMO IC/CRC without CSIT."""

__version__ = "0.1.0"
