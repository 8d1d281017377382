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

"""Binaural signal matching for wearable microphone arrays."""

from ._bsmkit import (
    BsmError,
    FilterBank,
    HrtfSet,
    SteeringSet,
    alpha_weight,
    cli,
    design,
    ear_proxy,
    evaluate,
    ild,
    itd,
    lebedev_2702,
    load,
    null_space_projection,
    render,
    ring,
    save,
    steering,
)

__version__ = "0.1.0"

__all__ = [
    "BsmError",
    "FilterBank",
    "HrtfSet",
    "SteeringSet",
    "alpha_weight",
    "cli",
    "design",
    "ear_proxy",
    "evaluate",
    "ild",
    "itd",
    "lebedev_2702",
    "load",
    "null_space_projection",
    "render",
    "ring",
    "save",
    "steering",
]
