"""Tests for the KLJN key exchange simulator."""
