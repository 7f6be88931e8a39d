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

"""Steering bounds, post-quantum certificates and quantum realizations."""

import json

from ._core import (  # noqa: F401
    Assemblage,
    DimensionError,
    Functional,
    InvalidInputError,
    ScenarioKind,
    ScenarioShape,
    SolverError,
    canonical_functional,
    evaluate,
    ghjw_traditional,
    lhs_bound,
    lhs_membership,
    ns_bound,
    pauli_transpose,
    pr_box,
    pure_state_lemma_check,
    qtilde_bound,
    qtilde_instrumental_bound,
    qtilde_membership,
    random_ns_traditional,
    random_quantum,
    run_acceptance,
    validate,
)

__version__ = "0.1.0"


def load_assemblage(path):
    """Read an assemblage document from a JSON file."""
    with open(path, encoding="utf-8") as fh:
        return Assemblage.from_json(fh.read())


def to_dict(obj):
    """JSON document of an Assemblage or Functional as a Python dict."""
    return json.loads(obj.to_json())
