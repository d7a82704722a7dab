"""Tests for AI Internal Manager."""
