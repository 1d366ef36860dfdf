"""Main entry point for the atten-forge CLI application."""

from .cli import app

if __name__ == "__main__":
    app()
