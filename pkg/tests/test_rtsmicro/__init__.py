"""Tests for package 'rtsmicro'."""
