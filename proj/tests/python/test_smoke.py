# Copyright 2026 The pqsteer Authors
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

import numpy as np
import pytest

import pqsteer

DATA = os.path.join(os.path.dirname(__file__), "..", "data")


def test_pr_box_validates_and_round_trips():
    box = pqsteer.pr_box()
    report = pqsteer.validate(box)
    assert report["passed"]
    again = pqsteer.Assemblage.from_json(box.to_json())
    for a in range(2):
        for x in range(2):
            for y in range(2):
                assert np.array_equal(again.member(a, x, y), box.member(a, x, y))


def test_canonical_bounds():
    f = pqsteer.canonical_functional()
    lhs = pqsteer.lhs_bound(f)
    assert lhs["status"] == "Optimal"
    assert abs(lhs["value"] - (3 - math.sqrt(3))) < 1e-6
    ns = pqsteer.ns_bound(f)
    assert abs(ns["value"]) < 1e-6


def test_pauli_transpose_is_post_quantum():
    s = pqsteer.pauli_transpose()
    assert pqsteer.evaluate(pqsteer.canonical_functional(), s) == pytest.approx(0.0, abs=1e-12)
    cert = pqsteer.pure_state_lemma_check(s, 0)
    assert cert["status"] == "post-quantum"
    assert min(m["choi_min_eigenvalue"] for m in cert["maps"]) < -0.5
    assert not pqsteer.qtilde_membership(s)["feasible"]


def test_ghjw_round_trip():
    s = pqsteer.random_ns_traditional(2, 3, 2, seed=11)
    r = pqsteer.ghjw_traditional(s)
    assert r["round_trip"] < 1e-8
    assert json.loads(r["realization"])["type"] == "traditional_realization"


def test_file_loading_and_errors():
    s = pqsteer.load_assemblage(os.path.join(DATA, "pr_box.json"))
    assert s.shape.m_b == 2
    with pytest.raises(ValueError, match="parse error at byte"):
        pqsteer.load_assemblage(os.path.join(DATA, "truncated.json"))
    with pytest.raises(ValueError):
        pqsteer.ScenarioShape(0, 2, 2, 2)


def test_acceptance_subset():
    rows = pqsteer.run_acceptance([1, 3])
    assert [r["id"] for r in rows] == [1, 3]
    assert all(r["passed"] for r in rows)
