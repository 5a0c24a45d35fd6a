#!/usr/bin/env python3
"""
Main entry point for the Heat-Kernel Pricing Toolkit

Runs one CLI command (price-bond, yield-curve, price-option, simulate,
verify) or the pricing service (serve).
"""

import sys
import os

# Add the current directory to Python path for imports
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from app.cli import main

if __name__ == '__main__':
    sys.exit(main())
