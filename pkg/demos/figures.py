"""Regenerate the figure data as CSV and summarize each series.

Same as ``robustcs figure fig2|fig3|fig4``. Horizons here are reduced so the
script runs in seconds; pass the full ones to reproduce the figures.
"""
import sys

import numpy as np

from robustcs.figures import fig2, fig3, fig4, series, write_rows

out = sys.argv[1] if len(sys.argv) > 1 else "."
for name, make, horizon in (("fig2", fig2, 10_000), ("fig3", fig3, 10_000), ("fig4", fig4, 20_000)):
    rows = make(horizon=horizon)
    write_rows(rows, f"{out}/{name}.csv")
    print(name)
    for s in sorted({r[1] for r in rows}):
        t, lo, hi, w = series(rows, s)
        finite = np.isfinite(w)
        first = int(t[finite][0]) if finite.any() else None
        print(f"  {s:>10}: finite from t={first}, width at t={int(t[-1])}: {w[-1]:.3g}")
