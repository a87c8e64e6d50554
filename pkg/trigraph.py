"""
Triangle counting launcher.

Usage:
    python3 trigraph.py count --input graph.txt --engine anop-surrogate --ranks 4
    python3 trigraph.py approx --gen gnp --n 2000 --d 20 --q 0.1 --runs 25
    python3 trigraph.py popt --n 25000000 --d 50 --base-n 1000000 --base-d 50 --base-p 120

Set TRIGRAPH_MODE=concurrent to run ranks on threads instead of interleaving them.
"""
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent))

from app.cli import main

if __name__ == "__main__":
    sys.exit(main())
