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

import math

import numpy as np
import pytest

import bsmkit


def test_alpha_schedule():
    assert bsmkit.alpha_weight(500.0) == 1.0
    assert bsmkit.alpha_weight(1150.0) == 0.5
    assert bsmkit.alpha_weight(1500.0) == 0.0


def test_grids():
    assert bsmkit.lebedev_2702().shape == (2702, 2)
    ring = bsmkit.ring(72)
    assert ring.shape == (72, 2)
    assert np.allclose(ring[:, 0], math.pi / 2)


def test_design_and_evaluate_pipeline():
    v = bsmkit.steering(distance=0.45, nfft=128, grid="ring:72")
    h = bsmkit.ear_proxy(distance=0.45, nfft=128, grid="ring:72")
    assert v.data.shape == (65, 5, 72)
    assert h.data.shape == (65, 2, 72)
    c = bsmkit.design(v, h, criterion="mixed", snr_db=20.0)
    assert c.weights.shape == (65, 5, 2)
    report = bsmkit.evaluate(c, v, h, per_direction=False)
    assert report["eps_mix"].shape == (65, 2)
    mix = report["summary"]["eps_mix_avg"][0]
    assert mix is not None and 0.0 <= mix < 1.0


def test_fov_design_runs():
    v = bsmkit.steering(distance=0.45, nfft=64, grid="ring:36")
    h = bsmkit.ear_proxy(distance=0.45, nfft=64, grid="ring:36")
    c = bsmkit.design(v, h, fov=(45.0, 45.0, 0.2))
    assert np.all(np.isfinite(c.weights))


def test_ild_of_doubled_left_channel():
    nfft = 1024
    left = np.full(nfft // 2 + 1, 2.0 + 0j)
    right = np.full(nfft // 2 + 1, 1.0 + 0j)
    assert abs(bsmkit.ild(left, right, 48000.0, nfft) - 20 * math.log10(2)) < 0.01


def test_itd_of_delayed_impulse():
    n = 512
    left = np.zeros(n)
    right = np.zeros(n)
    left[24] = 1.0
    right[0] = 1.0
    assert abs(bsmkit.itd(left, right, 48000.0) - 500e-6) < 1 / 48000


def test_container_round_trip(tmp_path):
    v = bsmkit.steering(distance=0.2, nfft=32, grid="ring:8")
    path = str(tmp_path / "v.bsm")
    bsmkit.save(v, path)
    back = bsmkit.load(path)
    assert isinstance(back, bsmkit.SteeringSet)
    assert np.array_equal(back.data, v.data)
    assert back.distance == 0.2


def test_errors_carry_codes(tmp_path):
    bad = tmp_path / "bad.bsm"
    bad.write_bytes(b"not a container")
    with pytest.raises(bsmkit.BsmError) as info:
        bsmkit.load(str(bad))
    assert info.value.code == "SchemaUnknown"


def test_render_silence():
    v = bsmkit.steering(distance=0.45, nfft=64, grid="ring:12")
    h = bsmkit.ear_proxy(distance=0.45, nfft=64, grid="ring:12")
    c = bsmkit.design(v, h, criterion="ls")
    left, right = bsmkit.render(c, [[0.0] * 300 for _ in range(5)])
    assert len(left) == 300 and max(map(abs, left + right)) == 0.0


def test_cli_usage_error():
    assert bsmkit.cli(["sweep", "--out-dir", "x"]) == 2
