# coding: utf-8

# # The command line tool
#
# Every capability is also available as ``pidq <command>``. This script drives
# the same entry point in-process on files in a temporary directory.

# %%

import tempfile
from pathlib import Path

import numpy as np

from pidq import SampleTable, synthetic_library
from pidq.cli import main
from pidq.io import write_library, write_samples

work = Path(tempfile.mkdtemp())
rng = np.random.default_rng(3)
x1, x2 = rng.integers(0, 2, 10**4), rng.integers(0, 2, 10**4)
write_samples(work / "and.csv", SampleTable(x1, x2, x1 & x2))
write_library(work / "lib.json", synthetic_library())

# %%

main(["discretize", "--input", str(work / "and.csv"), "--output", str(work / "and.json")])

# %%

main(["pid", "--input", str(work / "and.json"), "--precision", "4"])

# %%

main(["bounds", "--marginals", str(work / "and.json"), "--precision", "4"])

# %%

code = main(["select", "--target", str(work / "and.json"), "--library", str(work / "lib.json")])
print("exit code:", code)
