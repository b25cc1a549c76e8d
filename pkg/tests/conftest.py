"""Shared pytest path hook; helpers live in tests/helpers.py."""
