"""Pure-Python path kernels.

Reference implementation of the semi-Markov path simulation; the Cython
module ``_kernels`` reproduces it draw for draw.  Any change here must be
mirrored there (tests compare the two bit for bit).

Draw order per path: one uniform for the initial state; then per sojourn one
uniform for the exponential factor and, when alpha < 1, one uniform for
Kanter's angle (redrawn while ``sin`` underflows) and one for the exponential
divisor; then one uniform for the next state.
"""

import math

import numpy as np

BACKEND = "python"


def _uniform(gen):
    u = gen.random()
    while u == 0.0:
        u = gen.random()
    return u


def _pick(cum, u):
    last = len(cum) - 1
    for j in range(last):
        if u < cum[j]:
            return j
    return last


def _sojourn(gen, rate, alpha):
    w = -math.log(_uniform(gen)) / rate
    if alpha == 1.0:
        return w
    U = math.pi * _uniform(gen)
    while math.sin(U) < 1e-300:
        U = math.pi * _uniform(gen)
    e = -math.log(_uniform(gen))
    a = (
        math.sin((1.0 - alpha) * U)
        * math.pow(math.sin(alpha * U), alpha / (1.0 - alpha))
        / math.pow(math.sin(U), 1.0 / (1.0 - alpha))
    )
    s = math.pow(a / e, (1.0 - alpha) / alpha)
    return math.pow(w, 1.0 / alpha) * s


def sample_path(gen, cum_init, cum_jump, rates, alpha):
    """One absorption path: (states, sojourns).  Empty lists mean the atom."""
    p = len(rates)
    states = []
    sojourns = []
    state = _pick(cum_init, _uniform(gen))
    while state != p:
        states.append(state)
        sojourns.append(_sojourn(gen, rates[state], alpha))
        state = _pick(cum_jump[state], _uniform(gen))
    return states, sojourns


def simulate_rewards(gen, cum_init, cum_jump, rates, rewards, alpha, n_paths):
    """Accumulated rewards for ``n_paths`` independent paths.

    Returns ``(Y, first)`` with ``Y`` of shape (n_paths, n) and ``first`` the
    initial state of each path (``-1`` for an immediate absorption).
    """
    cum_init = [float(c) for c in cum_init]
    cum_jump = [[float(c) for c in row] for row in np.asarray(cum_jump)]
    rates = [float(r) for r in rates]
    rewards = np.asarray(rewards, dtype=float)
    reward_rows = [list(map(float, row)) for row in rewards]
    n = rewards.shape[1]
    out = np.zeros((n_paths, n))
    first = np.full(n_paths, -1, dtype=np.int64)
    for i in range(n_paths):
        states, sojourns = sample_path(gen, cum_init, cum_jump, rates, alpha)
        if not states:
            continue
        first[i] = states[0]
        acc = [0.0] * n
        for state, x in zip(states, sojourns):
            row = reward_rows[state]
            for k in range(n):
                acc[k] += x * row[k]
        out[i] = acc
    return out, first
