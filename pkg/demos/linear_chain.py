"""Message passing on a linear chain against the Kalman filter and RTS smoother.

Run with ``python demos/linear_chain.py``.
"""
import numpy as np

from degauss.degenerate import moments
from degauss.graph import build_chain, log_evidence, pass_messages, posterior
from degauss.selftest import _linear_chain, chain_factors, kalman_rts

rng = np.random.default_rng(3)
model = _linear_chain(rng, steps=5)
_, _, smoothed, _ = kalman_rts(*model)

graph = build_chain(*chain_factors(*model), measurements=model[-1])
msgs = pass_messages(graph)
print(f"converged after {msgs.sweeps} sweeps, log evidence {log_evidence(msgs):.4f}")
print(" k   chain posterior mean     RTS mean")
for k in range(1, 6):
    m = moments(posterior(msgs, k)).mean
    print(f" {k}   {m[0]:8.4f} {m[1]:8.4f}   {smoothed[k - 1][0]:8.4f} {smoothed[k - 1][1]:8.4f}")
