"""A coarse disorder-averaged phase scan with a resumable checkpoint.

Run it twice: the second run reads every finished cell back from the
checkpoint and returns immediately. In the printed map "W" marks cells where
both IPRs exceed 0.2. Elsewhere the letter follows the larger IPR: a large
reciprocal IPR means bosons piled on one site ("L"), a large spatial one
means a spread-out condensate ("S").

    BOSEHUB_WORKERS=4 python demos/phase_scan.py
"""

import tempfile
from pathlib import Path

from bosehub.ensemble import EnsembleSpec, log_grid, phase_diagram

spec = EnsembleSpec(L=8, N=4, tau_grid=log_grid(0.05, 2.0, 12), delta_grid=log_grid(1e-4, 1.0, 8),
                    realizations=20, master_seed=0)
checkpoint = Path(tempfile.gettempdir()) / f"bosehub-demo-{spec.spec_hash}.ndjson"
grid = phase_diagram(spec, checkpoint=checkpoint,
                     progress=lambda done, total: print(f"\r{done}/{total} cells", end=""))
print(f"\ncheckpoint: {checkpoint} ({grid.metadata['cells_resumed']} cells resumed)")

P_s, P_r = grid.mean["ipr_s"], grid.mean["ipr_r"]
print("delta \\ tau " + " ".join(f"{t:5.2f}" for t in spec.tau_grid))
for i, d in reversed(list(enumerate(spec.delta_grid))):
    marks = []
    for j in range(len(spec.tau_grid)):
        s, r = P_s[i, j] > 0.2, P_r[i, j] > 0.2
        marks.append("W" if s and r else "L" if P_r[i, j] > P_s[i, j] else "S")
    print(f"{d:10.1e}  " + "     ".join(marks))
