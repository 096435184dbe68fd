#!/usr/bin/env python3
"""Radius-bracket comparison across twelve geometric relocation laws.

Each row of fig2.csv holds the certified log-radius bracket, the benchmark
log-radius, and the optimized variational ceiling.
"""

import sys

from relochain.cli import main

if __name__ == "__main__":
    sys.exit(main(["fig2", *sys.argv[1:]]))
