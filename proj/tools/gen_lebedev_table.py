#!/usr/bin/env python3
# Copyright 2026 The bsmkit Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Regenerates src/lebedev_2702_table.inc from scipy's Lebedev rule.

Only orbit representatives (x >= y >= z >= 0) are stored; the library expands
them under the 48-element octahedral group.
"""
import pathlib
import numpy as np
from scipy.integrate import lebedev_rule

pts, w = lebedev_rule(89)
assert pts.shape[1] == 2702
reps = []
for (x, y, z), wt in zip(pts.T, w):
    if x >= y - 1e-14 and y >= z - 1e-14 and z >= -1e-14:
        reps.append((x, y, z, wt))
reps.sort(key=lambda r: (-r[0], -r[1], -r[2]))
out = pathlib.Path(__file__).resolve().parent.parent / "src" / "lebedev_2702_table.inc"
license = (pathlib.Path(__file__).resolve().parent / "license_header.txt").read_text()
with out.open("w") as f:
    f.write(license + "\n")
    f.write("// Generated by tools/gen_lebedev_table.py. Do not edit.\n")
    f.write("// Orbit representatives {x, y, z, weight} with x >= y >= z >= 0; weights sum to 1\n")
    f.write("// over the expanded grid.\n")
    for x, y, z, wt in reps:
        f.write(f"{{{x:.17g}, {y:.17g}, {z:.17g}, {wt / (4 * np.pi):.17g}}},\n")
print(len(reps), "representatives")
