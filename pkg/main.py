#!/usr/bin/env python3
"""Main entry point for atten-forge CLI application."""

from attenforge.cli import app

if __name__ == "__main__":
    app()
