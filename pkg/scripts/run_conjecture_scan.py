#!/usr/bin/env python3
"""Randomized search for exact radii above the variational ceiling.

Samples random sub-stochastic matrices and bounded relocation laws, compares
the exact window-chain radius against the optimized objective, and reports
(never asserts) violations.
"""

import sys

from relochain.cli import main

if __name__ == "__main__":
    sys.exit(main(["conjecture-scan", *sys.argv[1:]]))
