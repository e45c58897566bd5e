# Copyright 2026 The tcentre Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import json
import math
import os
import subprocess

import numpy as np
import pytest

import tcentre


def test_zero_field_lines():
    lines = tcentre.transition_frequencies(tcentre.MagneticField(), tcentre.HyperfineTensor.paper())
    top = sorted(l.freq_mhz for l in lines if l.lower == 0)
    assert top == pytest.approx([3.482, 3.713, 4.268], abs=1e-9)


def test_bare_larmor():
    t = tcentre.HyperfineTensor.isotropic(0.0)
    levels = tcentre.ground_levels_mhz(tcentre.MagneticField([0, 0, 1.0]), t)
    assert levels[1] - levels[0] == pytest.approx(42.5722, abs=1e-4)


def test_subset_counts():
    t = tcentre.HyperfineTensor.paper()
    counts = [len(tcentre.partition_by_field(d, t, 1.0)) for d in ([0, 0, 1], [1, 1, 1], [1, 1, 0])]
    assert counts == [2, 3, 4]
    assert tcentre.orientation_labels()[0] == "z0"
    with pytest.raises(ValueError):
        tcentre.tensor_for_orientation(t, "z12")


def test_fit_round_trip(tmp_path):
    data = tcentre.synthesize_dataset(tcentre.HyperfineTensor.paper(), noise_mhz=0.0, sigma_mhz=3e-3)
    path = str(tmp_path / "d.csv")
    data.write_csv(path)
    r = tcentre.fit_tensor(tcentre.ResonanceDataset.read_csv(path))
    assert r.converged
    np.testing.assert_allclose(r.tensor.principal_mhz, [4.037, -4.499, -2.927], atol=1e-6)
    assert r.tensor.euler_deg[2] == pytest.approx(-45.0, abs=1e-4)
    assert r.degenerate[0].tensor.euler_deg[2] == pytest.approx(-135.0, abs=1e-4)
    assert json.loads(r.to_json())["tensor"]["principal_mhz"][0] == pytest.approx(4.037)


def test_bad_csv(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("Bx_T,By_T,Bz_T,freq_MHz,sigma_MHz\n0,0,0,x,1\n")
    with pytest.raises(ValueError):
        tcentre.ResonanceDataset.read_csv(str(path))


def test_cycle_and_correction():
    t = tcentre.HyperfineTensor.paper()
    z = t.rotation()[:, 2]
    p = tcentre.CycleParams(tcentre.MagneticField(z), t, tau_s=1e-9, t_s=20e-9)
    out = tcentre.cycle_density_matrix(p)
    assert out.rho.shape == (4, 4)
    assert np.trace(out.rho).real == pytest.approx(1.0)
    assert tcentre.trace_distance(out.rho, tcentre.lindblad_oracle(p).rho) < 1e-6
    c = tcentre.corrected_outcome(p)
    assert (1 - c.fidelity) / (1 - c.corrected_fidelity) == pytest.approx(2.0, rel=0.02)


def test_dpm_and_map():
    t = tcentre.HyperfineTensor.paper()
    c = tcentre.dpm_contour(t, 1.0)
    assert c.exists
    assert c.max_delta_e_mhz == pytest.approx(0.106, abs=5e-3)
    theta, phi = c.curves[0][0]
    assert abs(tcentre.delta_h(tcentre.MagneticField.spherical(1.0, theta, phi), t)) < 1e-6
    th, ph, values = tcentre.map_over_directions(t, "delta_h", n_theta=5, n_phi=8)
    assert values.shape == (5, 8)
    assert np.isfinite(values).all()
    with pytest.raises(ValueError):
        tcentre.map_over_directions(t, "nonsense")


@pytest.mark.skipif("TCENTRE_CLI" not in os.environ, reason="CLI path not provided")
def test_cli_predict():
    out = subprocess.run([os.environ["TCENTRE_CLI"], "predict", "--B", "0"], capture_output=True, text=True, check=True)
    rows = out.stdout.strip().splitlines()
    assert rows[0] == "freq_MHz,lower,upper,orientation"
    assert len(rows) == 7
    assert math.isclose(float(rows[-1].split(",")[0]), 4.268, abs_tol=1e-9)
