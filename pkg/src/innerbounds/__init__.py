"""Pečarić, Bombieri and Bessel type bounds for finite vector families."""

__version__ = "0.1.0"
