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

#include <stdexcept>
#include <string>
#include <vector>

namespace hmtml {

/// Thrown when arguments violate an operation's preconditions
/// (dimension mismatch, empty input, infeasible budget, ...).
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Thrown by the CSV / model readers. The message names the file and line.
class IngestionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Random construction could not satisfy its invariants within the
/// resampling budget.
class GenerationFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Non-finite objective or gradient inside the solver. Carries the
/// objective values seen so far.
class SolverDivergence : public std::runtime_error {
public:
    SolverDivergence(const std::string& what, std::vector<double> trace)
        : std::runtime_error(what), trace_(std::move(trace)) {}

    const std::vector<double>& trace() const noexcept { return trace_; }

private:
    std::vector<double> trace_;
};

inline void require(bool condition, const std::string& message) {
    if (!condition) throw InvalidInput(message);
}

}  // namespace hmtml
