"""Drowsiness classification from facial Action Unit and HOG exports."""

__version__ = "0.1.0"
