#!/usr/bin/env python3
"""
Main entry point for the effham CLI
"""
import os
import sys

# Add src directory to path so we can import effham
sys.path.insert(0, os.path.join(os.path.dirname(__file__), "src"))

from effham.cli import main  # noqa: E402

if __name__ == "__main__":
    main()
