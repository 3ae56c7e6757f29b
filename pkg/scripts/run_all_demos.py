"""Run every demonstration into out/<demo>/ and summarize the exit codes."""

import sys
from pathlib import Path

from bplab.cli import DEMOS, main

out_root = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("out")
codes = {}
for demo in DEMOS:
    codes[demo] = main(["demo", demo, "--out", str(out_root / demo)])
    print(f"{demo}: exit {codes[demo]}")
sys.exit(max(codes.values()))
