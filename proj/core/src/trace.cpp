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

#include "specdec/trace.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace specdec {

namespace {

constexpr double kRenormThreshold = 1e-12;
constexpr double kRejectThreshold = 1e-6;

void append_array(std::string& line, const std::vector<double>& values) {
    char buf[40];
    line.push_back('[');
    for (size_t i = 0; i < values.size(); ++i) {
        if (i > 0) line.push_back(',');
        std::snprintf(buf, sizeof(buf), "%.16e", values[i]);
        line.append(buf);
    }
    line.push_back(']');
}

void validate_array(const std::vector<double>& values, size_t line_no,
                    const char* field, TraceLoadStats& stats,
                    std::vector<double>& out) {
    double sum = 0.0;
    for (double v : values) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw ParseError("trace line " + std::to_string(line_no) + ": field '" +
                             field + "' has a negative or non-finite entry");
        }
        sum += v;
    }
    const double dev = std::abs(sum - 1.0);
    if (dev > kRejectThreshold) {
        throw ParseError("trace line " + std::to_string(line_no) + ": field '" +
                         field + "' sums to " + std::to_string(sum) +
                         ", outside the 1e-6 tolerance");
    }
    out = values;
    if (dev > kRenormThreshold) {
        for (double& v : out) v /= sum;
        ++stats.renormalized;
        stats.max_deviation = std::max(stats.max_deviation, dev);
    }
}

}  // namespace

void write_trace(std::ostream& out, const std::vector<TraceRecord>& records) {
    std::string line;
    for (const auto& rec : records) {
        line.clear();
        line += "{\"step\":";
        line += std::to_string(rec.step);
        line += ",\"depth\":";
        line += std::to_string(rec.depth);
        line += ",\"p\":";
        append_array(line, rec.p);
        line += ",\"q\":";
        append_array(line, rec.q);
        line += "}\n";
        out << line;
    }
}

void write_trace_file(const std::string& path, const std::vector<TraceRecord>& records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open trace file for writing: " + path);
    }
    write_trace(out, records);
    out.flush();
    if (!out) {
        throw std::runtime_error("failed writing trace file: " + path);
    }
}

std::vector<TraceRecord> load_trace(std::istream& in, TraceLoadStats* stats) {
    std::vector<TraceRecord> records;
    TraceLoadStats local;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;  // header/comment lines
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError("trace line " + std::to_string(line_no) + ": " + e.what());
        }
        if (!j.is_object() || !j.contains("step") || !j.contains("depth") ||
            !j.contains("p") || !j.contains("q")) {
            throw ParseError("trace line " + std::to_string(line_no) +
                             ": record must contain step, depth, p, q");
        }
        TraceRecord rec;
        try {
            rec.step = j.at("step").get<int>();
            rec.depth = j.at("depth").get<int>();
            const auto p = j.at("p").get<std::vector<double>>();
            const auto q = j.at("q").get<std::vector<double>>();
            if (p.size() != q.size() || p.empty()) {
                throw ParseError("trace line " + std::to_string(line_no) +
                                 ": p and q must be equal-length non-empty arrays");
            }
            validate_array(p, line_no, "p", local, rec.p);
            validate_array(q, line_no, "q", local, rec.q);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("trace line " + std::to_string(line_no) + ": " + e.what());
        }
        if (rec.step < 0 || rec.depth < 0) {
            throw ParseError("trace line " + std::to_string(line_no) +
                             ": step and depth must be non-negative");
        }
        records.push_back(std::move(rec));
    }
    local.records = records.size();
    if (stats != nullptr) *stats = local;
    return records;
}

std::vector<TraceRecord> load_trace_file(const std::string& path, TraceLoadStats* stats) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open trace file: " + path);
    }
    return load_trace(in, stats);
}

}  // namespace specdec
