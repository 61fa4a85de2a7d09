"""Minimum total power against the outage threshold s (dB), T = 4 and 8.

Same output layout as fig1_sweep.py.

    python3 scripts/fig2_sweep.py --out results/ -- --psi-th 1e-3
"""

from fig1_sweep import main

if __name__ == "__main__":
    main(axis="s", stem="fig2")
