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

#include <iosfwd>
#include <string>
#include <vector>

#include "specdec/errors.hpp"

namespace specdec {

/// One (target, draft) snapshot keyed by (step, depth). Newline-delimited
/// JSON on disk, one self-describing record per line, arrays of plain
/// decimals with 17 significant digits (lossless double round-trip).
struct TraceRecord {
    int step = 0;
    int depth = 0;
    std::vector<double> p;
    std::vector<double> q;
};

struct TraceLoadStats {
    size_t records = 0;
    size_t renormalized = 0;   // arrays whose sum deviated from 1 by > 1e-12
    double max_deviation = 0;  // largest |sum - 1| seen before renormalizing
};

void write_trace(std::ostream& out, const std::vector<TraceRecord>& records);
void write_trace_file(const std::string& path, const std::vector<TraceRecord>& records);

/// Parses and validates records. Arrays off the simplex by more than 1e-6
/// are a ParseError (message names the line); smaller deviations are
/// renormalized and counted in the stats.
std::vector<TraceRecord> load_trace(std::istream& in, TraceLoadStats* stats = nullptr);
std::vector<TraceRecord> load_trace_file(const std::string& path,
                                         TraceLoadStats* stats = nullptr);

}  // namespace specdec
