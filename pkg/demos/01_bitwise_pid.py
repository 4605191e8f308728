# coding: utf-8

# # Decomposing the bitwise gates
#
# Two uniform random bits go through a gate. How much of what (x1, x2) tell
# us about y is shared by both inputs, owned by one of them, or only visible
# when they are read together?

# %%

import numpy as np

from pidq import JointDist, mutual_info, pid

# %%


def gate(fn):
    p = np.zeros((2, 2, 2))
    for a in range(2):
        for b in range(2):
            p[a, b, fn(a, b)] = 0.25
    return JointDist.from_array(p)


gates = {"AND": lambda a, b: a & b, "OR": lambda a, b: a | b, "XOR": lambda a, b: a ^ b}

# %% [markdown]
# The decomposition always adds back up to the total information
# I({X1,X2}; Y). For AND and OR that total is h(1/4) = 0.811 bits.

# %%

print(f"{'gate':>5} {'R':>8} {'U1':>8} {'U2':>8} {'S':>8} {'I':>8}")
for name, fn in gates.items():
    d = gate(fn)
    res = pid(d)
    total = mutual_info(d, ("x1", "x2"), "y")
    print(f"{name:>5} {res.r:8.4f} {res.u1:8.4f} {res.u2:8.4f} {res.s:8.4f} {total:8.4f}")

# %% [markdown]
# XOR is pure synergy: neither bit alone says anything about y. AND splits
# into 0.311 bits of redundancy and half a bit of synergy.
#
# Copying one input gives pure uniqueness, and three identical bits give
# pure redundancy.

# %%

for name, d in [("y = x1", gate(lambda a, b: a)), ("y = x1 = x2", JointDist.from_table([(0, 0, 0, 0.5), (1, 1, 1, 0.5)]))]:
    print(name, np.round(pid(d).as_tuple(), 6))
