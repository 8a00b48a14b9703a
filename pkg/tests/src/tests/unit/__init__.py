"""Unit tests for the qmoduli packages."""
