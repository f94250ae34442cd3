"""Sweep configuration, Monte-Carlo engine and command-line entry point."""
