"""Pure-numpy RK4 kernel, used when the compiled extension is unavailable.

Must keep the exact semantics of ``_rk4_cy.rk4_segments`` (same stepping,
same recording and truncation rules); results agree to roundoff.
"""
import numpy as np


def rk4_segments(a, x0, b_segs, seg_steps, dt, record_stride, clip, out):
    """Integrate x' = A x + b over piecewise-constant input segments.

    out[r] receives the state after r*record_stride steps (out[0] = x0).
    Returns (n_records_written, truncated_step); truncated_step is the
    1-based global step at which any |state| first exceeded clip, or -1.
    """
    x = np.array(x0, dtype=np.float64, copy=True)
    h2 = dt / 2.0
    h6 = dt / 6.0
    out[0, :] = x
    rec = 1
    gstep = 0
    for seg in range(len(seg_steps)):
        b = b_segs[seg]
        for _ in range(seg_steps[seg]):
            k1 = a @ x + b
            k2 = a @ (x + h2 * k1) + b
            k3 = a @ (x + h2 * k2) + b
            k4 = a @ (x + dt * k3) + b
            x = x + h6 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            gstep += 1
            if np.max(np.abs(x)) > clip:
                return rec, gstep
            if gstep % record_stride == 0:
                out[rec, :] = x
                rec += 1
    return rec, -1
