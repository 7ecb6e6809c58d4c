"""
Main entry point for Crash Hotspots.
Command-line application for reproducible collision hotspot analysis.
"""

import sys

from src.cli import main

if __name__ == "__main__":
    sys.exit(main())
