"""Test suite for ringkit."""
