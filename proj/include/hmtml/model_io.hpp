/*
 * Copyright 2026 The HMTML Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
 */

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hmtml/domain.hpp"

namespace hmtml {

// Plain-text model format:
//
//   HMTML v1 <M> <r>
//   <m> <d_m>            for m = 1..M
//   <d_m rows of r values, space separated, %.17g>
//
// Task weights use the same layout with the header `HMTML-W v1 <M> <P>` and
// P values per row. Both round-trip bit-exactly.

void write_model(std::ostream& out, const std::vector<FactorMatrix>& factors);
std::vector<FactorMatrix> read_model(std::istream& in, const std::string& source = "<stream>");

void save_model(const std::string& path, const std::vector<FactorMatrix>& factors);
std::vector<FactorMatrix> load_model(const std::string& path);

void write_task_weights(std::ostream& out, const std::vector<Eigen::MatrixXd>& weights);
std::vector<Eigen::MatrixXd> read_task_weights(std::istream& in,
                                               const std::string& source = "<stream>");

void save_task_weights(const std::string& path, const std::vector<Eigen::MatrixXd>& weights);
std::vector<Eigen::MatrixXd> load_task_weights(const std::string& path);

}  // namespace hmtml
