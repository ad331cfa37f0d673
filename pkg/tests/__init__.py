"""Tests for the zak_dd_sim package."""
