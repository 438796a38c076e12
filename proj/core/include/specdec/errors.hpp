// Copyright 2026 the specdec authors
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

#include <stdexcept>
#include <string>

namespace specdec {

/// Numerically degenerate input, e.g. a draft distribution concentrated on a
/// single token where a without-replacement construction would divide by ~0.
/// Callers that have a documented fallback catch this type specifically.
class DegenerateInputError : public std::invalid_argument {
public:
    explicit DegenerateInputError(const std::string& what)
        : std::invalid_argument(what) {}
};

/// Instance exceeds a configured size cap (dense joint too large, tree too
/// big, enumeration oracle asked for an infeasible vocabulary).
class ResourceLimitError : public std::runtime_error {
public:
    explicit ResourceLimitError(const std::string& what)
        : std::runtime_error(what) {}
};

/// A trace-backed distribution process ran out of records.
class EndOfTraceError : public std::runtime_error {
public:
    explicit EndOfTraceError(const std::string& what)
        : std::runtime_error(what) {}
};

/// Malformed input file; the message names the offending line/field.
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

/// A supposedly-impossible internal state (e.g. an infeasible flow witness).
class InternalConsistencyError : public std::logic_error {
public:
    explicit InternalConsistencyError(const std::string& what)
        : std::logic_error(what) {}
};

}  // namespace specdec
