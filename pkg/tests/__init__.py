"""Test package for stable_convolve."""
