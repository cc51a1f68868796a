"""Test package for biped-hflc."""
