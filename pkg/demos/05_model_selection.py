# coding: utf-8

# # Picking models by interaction profile
#
# A library stores, for reference datasets, their normalized interaction
# profile and how well each candidate fusion model did there. A new dataset is
# matched to the closest profile and inherits that ranking.

# %%

import numpy as np

from pidq import JointDist, NormalizedPID, agreement, normalize_pid, pid, select_models, synthetic_library

# %%

lib = synthetic_library()
for e in lib.entries:
    print(f"{e.dataset_id:>8}", np.round(e.profile.as_array(), 2), e.model_ids[:3])

# %% [markdown]
# An XOR-like target is all synergy, so it lands on the synergy profile.

# %%

p = np.zeros((2, 2, 2))
for a in range(2):
    for b in range(2):
        p[a, b, a ^ b] = 0.25
target = normalize_pid(pid(JointDist.from_array(p)))
sel = select_models(target, lib)
print(sel.dataset_id, sel.similarity, sel.models)

# %% [markdown]
# Agreement scores a trained model against a dataset: the dataset's weight on
# each interaction times the information the model's predictions capture.

# %%

profile = NormalizedPID.from_values([0.5, 0.0, 0.0, 0.5])
model = pid(JointDist.from_array(p))
print(agreement(profile, model).to_dict())
