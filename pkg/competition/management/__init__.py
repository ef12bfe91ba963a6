"""Management commands and shared helpers for the competition app."""
