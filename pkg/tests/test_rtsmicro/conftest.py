"""Fixtures available to the entire test suite."""
