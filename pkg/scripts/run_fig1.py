#!/usr/bin/env python3
"""Occupation-measure concentration experiment (geometric laws, decreasing eps).

Writes per-eps occupation samples, a summary CSV, and optionally an SVG
histogram panel. Defaults reproduce the packaged config; pass --config to
override everything from a file.
"""

import sys

from relochain.cli import main

if __name__ == "__main__":
    sys.exit(main(["fig1", *sys.argv[1:]]))
