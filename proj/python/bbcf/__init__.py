# Copyright 2026 The bbcf Authors.
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

"""Joint counterfactual probabilities from uplift scores.

Component order is (p00, p10, p01, p11) throughout.
"""

from ._bbcf import (
    Error,
    Model,
    calibrate,
    fit,
    frechet_bounds,
    independence_estimate,
    midpoint_estimate,
    posterior_mean,
    posterior_means,
    run_cli,
)

__all__ = [
    "Error",
    "Model",
    "calibrate",
    "fit",
    "frechet_bounds",
    "independence_estimate",
    "midpoint_estimate",
    "posterior_mean",
    "posterior_means",
    "run_cli",
]
