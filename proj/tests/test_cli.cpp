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

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "specdec/trace.hpp"

namespace {

using nlohmann::json;

std::string cli_path() { return SPECDEC_CLI_PATH; }

std::string temp_path(const std::string& name) {
    return testing::TempDir() + "specdec_cli_" + name;
}

int run_cli(const std::string& args) {
    const std::string cmd = cli_path() + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    EXPECT_TRUE(in.good()) << path;
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json slurp_json(const std::string& path) { return json::parse(slurp(path)); }

TEST(Cli, RatesWorkedInstance) {
    const std::string out = temp_path("rates.json");
    ASSERT_EQ(run_cli("rates --p 0.1,0.6,0.3 --q 0.5,0.3,0.2 --trials 200 --seed 8 --out " +
                      out),
              0);
    const json report = slurp_json(out);
    EXPECT_EQ(report["tool"], "specdec");
    EXPECT_EQ(report["command"], "rates");
    EXPECT_EQ(report["seed"], 8);
    const auto& results = report["results"];
    EXPECT_NEAR(results["rrs"]["analytic"]["total"].get<double>(), 0.8, 1e-9);
    EXPECT_NEAR(results["spechub"]["analytic"]["total"].get<double>(), 1.0, 1e-9);
    EXPECT_NEAR(results["spechub"]["top_token_rate"].get<double>(), 0.1, 1e-9);
    EXPECT_TRUE(results["rrsw"]["analytic"].is_null());
    EXPECT_EQ(results["rrsw"]["monte_carlo"]["trials"], 200);
}

TEST(Cli, OtmWorkedInstances) {
    const std::string out = temp_path("otm.json");
    ASSERT_EQ(run_cli("otm --p 0.1,0.6,0.3 --q 0.5,0.3,0.2 --joint hub --out " + out), 0);
    json report = slurp_json(out);
    EXPECT_NEAR(report["results"]["cost"].get<double>(), 0.0, 1e-9);
    EXPECT_TRUE(report["results"]["reconstruction_check"]["cost_matches_plan"].get<bool>());

    ASSERT_EQ(run_cli("otm --p 0.1,0.6,0.3 --q 0.5,0.3,0.2 --joint wor --out " + out), 0);
    report = slurp_json(out);
    EXPECT_LE(report["results"]["cost"].get<double>(), 0.06 + 1e-9);

    ASSERT_EQ(
        run_cli("otm --p 0.1,0.6,0.3 --q 0.1,0.6,0.3 --joint independent --out " + out),
        0);
    report = slurp_json(out);
    EXPECT_NEAR(report["results"]["cost"].get<double>(), 0.0, 1e-9);
}

TEST(Cli, OtmPlanDumpShape) {
    const std::string out = temp_path("otm_plan.json");
    ASSERT_EQ(run_cli("otm --p 0.1,0.6,0.3 --q 0.5,0.3,0.2 --joint independent "
                      "--dump-plan --dump-coupling --out " +
                      out),
              0);
    const json report = slurp_json(out);
    const auto& plan = report["results"]["plan"];
    EXPECT_EQ(plan["shape"], json({3, 3}));
    EXPECT_EQ(plan["accept1"].size(), 9u);
    EXPECT_EQ(plan["accept2"].size(), 9u);
    const auto& coupling = report["results"]["coupling"];
    EXPECT_EQ(coupling["shape"], json({3, 3, 3}));
    EXPECT_EQ(coupling["pi"].size(), 27u);
}

TEST(Cli, ToyCsvGoldenLayout) {
    const std::string out = temp_path("toy.csv");
    ASSERT_EQ(run_cli("toy --temps 0.5 --lambdas 1 --vocab 10 --pairs 3 --trials 20 "
                      "--seed 8 --out " +
                      out),
              0);
    const std::string csv = slurp(out);
    std::stringstream ss(csv);
    std::string line;
    std::getline(ss, line);
    EXPECT_EQ(line, "# tool: specdec 0.1.0");
    std::getline(ss, line);
    EXPECT_EQ(line, "# command: toy");
    std::getline(ss, line);
    EXPECT_EQ(line, "# seed: 8");
    std::getline(ss, line);
    EXPECT_EQ(line.rfind("# config: {", 0), 0u);
    std::getline(ss, line);
    EXPECT_EQ(line, "T,lambda,method,mean,stderr,n_pairs,mc_trials");
    std::getline(ss, line);
    EXPECT_EQ(line, "0.5,1,RRS,1,0,3,20");  // lambda = 1 accepts everything
}

TEST(Cli, DeterministicReruns) {
    const std::string out1 = temp_path("det1");
    const std::string out2 = temp_path("det2");
    const std::string commands[] = {
        "toy --temps 0.25 --lambdas 0.7 --vocab 12 --pairs 5 --trials 50 --seed 9 --out ",
        "rates --p 0.1,0.6,0.3 --q 0.5,0.3,0.2 --trials 500 --seed 9 --out ",
        "otm --p 0.1,0.6,0.3 --q 0.5,0.3,0.2 --joint wor --dump-plan --out ",
        "simulate --tree full:2:3 --process synthetic:0.5:0.7:12 --steps 300 --seed 9 "
        "--out ",
        "gen-trace --T 0.5 --lambda 0.7 --vocab 8 --steps 3 --depth 2 --seed 9 --out ",
    };
    for (const auto& cmd : commands) {
        ASSERT_EQ(run_cli(cmd + out1), 0) << cmd;
        ASSERT_EQ(run_cli(cmd + out2), 0) << cmd;
        EXPECT_EQ(slurp(out1), slurp(out2)) << cmd;
    }
}

TEST(Cli, TraceReplayMatchesSyntheticRun) {
    const std::string trace = temp_path("replay.jsonl");
    const std::string out_synth = temp_path("synth.csv");
    const std::string out_trace = temp_path("trace.csv");
    ASSERT_EQ(run_cli("gen-trace --T 0.8 --lambda 0.6 --vocab 16 --steps 50 --depth 3 "
                      "--seed 11 --out " +
                      trace),
              0);
    ASSERT_EQ(run_cli("simulate --tree full:2:3 --process synthetic:0.8:0.6:16 "
                      "--steps 50 --seed 11 --out " +
                      out_synth),
              0);
    ASSERT_EQ(run_cli("simulate --tree full:2:3 --process trace:" + trace +
                      " --steps 50 --seed 11 --out " + out_trace),
              0);
    // Same numbers; only the process label differs.
    auto strip = [](const std::string& csv) {
        std::stringstream ss(csv), outbuf;
        std::string line;
        while (std::getline(ss, line)) {
            if (line.empty() || line[0] == '#') continue;
            std::stringstream fields(line);
            std::string field;
            std::vector<std::string> cols;
            while (std::getline(fields, field, ',')) cols.push_back(field);
            if (cols.size() == 6) {
                outbuf << cols[0] << ',' << cols[3] << ',' << cols[4] << ',' << cols[5]
                       << '\n';
            }
        }
        return outbuf.str();
    };
    EXPECT_EQ(strip(slurp(out_synth)), strip(slurp(out_trace)));
}

TEST(Cli, GenTraceSingleRecordParsesBack) {
    const std::string trace = temp_path("single.jsonl");
    ASSERT_EQ(run_cli("gen-trace --T 1.0 --lambda 0.7 --vocab 50 --steps 1 --depth 1 "
                      "--seed 3 --out " +
                      trace),
              0);
    const auto records = specdec::load_trace_file(trace);
    ASSERT_EQ(records.size(), 1u);
    EXPECT_EQ(records[0].p.size(), 50u);
    double sum = 0.0;
    for (double v : records[0].p) sum += v;
    EXPECT_NEAR(sum, 1.0, 1e-6);
}

TEST(Cli, ExitCodes) {
    EXPECT_EQ(run_cli("toy --no-such-flag"), 64);                  // usage
    EXPECT_EQ(run_cli("rates --p 0.1,bad --q 0.5,0.5"), 65);       // parse
    EXPECT_EQ(run_cli("rates --q 0.5,0.5"), 65);                   // missing p
    EXPECT_EQ(run_cli("otm --p 0.2,0.2,0.2,0.2,0.2 --q 0.2,0.2,0.2,0.2,0.2 "
                      "--joint independent --max-dense-vocab 4"),
              66);  // resource limit
    const std::string trace = temp_path("short.jsonl");
    ASSERT_EQ(run_cli("gen-trace --T 0.5 --lambda 0.7 --vocab 8 --steps 2 --depth 1 "
                      "--seed 3 --out " +
                      trace),
              0);
    EXPECT_EQ(run_cli("simulate --tree full:2:3 --process trace:" + trace +
                      " --steps 2 --seed 3"),
              65);  // trace shorter than steps x depth
    EXPECT_EQ(run_cli("simulate --tree ring:4"), 64);      // malformed tree spec
    EXPECT_EQ(run_cli("simulate --tree full:20:20"), 66);  // node cap
}

}  // namespace
