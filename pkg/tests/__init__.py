"""Test suite for colorful vector balancing."""
