"""Tests for wavelocate."""
