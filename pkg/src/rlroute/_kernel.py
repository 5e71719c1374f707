"""Compiled inner loops for tabular Q-learning.

Arrays follow the topology CSR layout: ``indptr`` over node positions,
``targets`` holding neighbor positions in ascending id order, and ``q`` /
``rewards`` / ``visits`` aligned with ``targets``. One uniform draw per
step: ``u < eps`` explores and reuses ``u / eps`` to pick the neighbor.
"""

import numba as nb
import numpy as np


@nb.njit(cache=True, nogil=True)
def _greedy_slot(q, lo, hi):
    # strict '>' keeps the lowest neighbor id on ties
    k = lo
    for j in range(lo + 1, hi):
        if q[j] > q[k]:
            k = j
    return k


@nb.njit(cache=True, nogil=True)
def _max_value(q, indptr, node, dst):
    if node == dst:
        return 0.0
    lo = indptr[node]
    hi = indptr[node + 1]
    if lo == hi:
        return 0.0
    return q[_greedy_slot(q, lo, hi)]


@nb.njit(cache=True, nogil=True)
def run_episode(indptr, targets, rewards, q, visits, dst, start, eps, alpha, gamma,
                max_steps, rng, trace):
    """Run one episode from ``start``; returns the number of steps taken.

    Visited node positions are written to ``trace[0:steps+1]``.
    """
    s = start
    trace[0] = s
    steps = 0
    while steps < max_steps:
        lo = indptr[s]
        hi = indptr[s + 1]
        u = rng.random()
        if u < eps:
            k = lo + int(u / eps * (hi - lo))
            if k >= hi:
                k = hi - 1
        else:
            k = _greedy_slot(q, lo, hi)
        a = targets[k]
        q[k] += alpha * (rewards[k] + gamma * _max_value(q, indptr, a, dst) - q[k])
        visits[k] += 1
        steps += 1
        trace[steps] = a
        s = a
        if s == dst:
            break
    return steps


@nb.njit(cache=True, nogil=True)
def train(indptr, targets, rewards, q, visits, dst, starts, eps_start, eps_end, eps_decay,
          alpha, gamma, episodes, max_steps, rng):
    """Run ``episodes`` episodes cycling over ``starts``; returns total steps."""
    trace = np.empty(max_steps + 1, dtype=np.int64)
    eps = eps_start
    total = 0
    n_starts = starts.shape[0]
    for e in range(episodes):
        total += run_episode(indptr, targets, rewards, q, visits, dst, starts[e % n_starts],
                             eps, alpha, gamma, max_steps, rng, trace)
        eps = max(eps_end, eps * eps_decay)
    return total
