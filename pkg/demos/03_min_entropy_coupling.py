# coding: utf-8

# # Greedy minimum-entropy coupling
#
# Given two marginals, find a joint with those marginals and as little
# entropy as possible. Exact solutions are hard in general, and the greedy
# rule repeatedly pairs the largest remaining masses.

# %%

import numpy as np

from pidq import entropy, greedy_coupling

# %%

mu = np.array([0.6, 0.3, 0.1])
nu = np.array([0.55, 0.45])
c = greedy_coupling(mu, nu)
print(c.joint)
print("coupling entropy:", c.entropy)
print("bounds:", max(entropy(mu), entropy(nu)), "<= H <=", entropy(mu) + entropy(nu))

# %% [markdown]
# The independent coupling sits at the top of that range.

# %%

print("independent coupling:", entropy(np.outer(mu, nu)))

# %% [markdown]
# Larger random instances: the greedy joint uses at most m + n - 1 cells.

# %%

rng = np.random.default_rng(1)
for m, n in [(4, 4), (8, 3), (20, 20)]:
    a, b = rng.dirichlet(np.ones(m)), rng.dirichlet(np.ones(n))
    g = greedy_coupling(a, b)
    print(m, n, round(g.entropy, 4), np.count_nonzero(g.joint))
