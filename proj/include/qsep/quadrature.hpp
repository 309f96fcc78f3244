// Copyright 2026 The qsep Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <functional>
#include <span>

namespace qsep {

/// ln of the integral of exp(phi(t)) over [a, inf).
///
/// phi must eventually decrease. The integrand is scanned on a geometric
/// grid (merged with `breakpoints`, where phi may jump) to find its peak,
/// then integrated segment-wise with Gauss-Kronrod relative to the peak, so
/// results far beyond double range are representable. Returns +inf when
/// phi has not fallen 60 below its running maximum by `t_limit`.
double log_integral_exp(const std::function<double(double)>& phi, double a,
                        std::span<const double> breakpoints = {}, double t_limit = 1e12);

/// ln(exp(a) + exp(b)) without overflow; -inf is the neutral element.
double log_add(double a, double b);

}  // namespace qsep
