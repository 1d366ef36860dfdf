"""Test package for atten-forge."""
