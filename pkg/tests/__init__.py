"""Test suite for the bc_compose package."""
