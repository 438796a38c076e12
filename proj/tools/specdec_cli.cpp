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

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "specdec/coupling.hpp"
#include "specdec/draftjoint.hpp"
#include "specdec/errors.hpp"
#include "specdec/simplex.hpp"
#include "specdec/synthlab.hpp"
#include "specdec/trace.hpp"
#include "specdec/treesim.hpp"
#include "specdec/verify.hpp"
#include "specdec/version.hpp"

namespace {

using nlohmann::json;
using namespace specdec;

// Exit codes, also documented in the README.
constexpr int kExitUsage = 64;
constexpr int kExitParse = 65;
constexpr int kExitResource = 66;
constexpr int kExitInternal = 70;

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

/// Writes either to a file or stdout; collects the whole payload first so a
/// failed run never leaves a truncated output file.
void emit(const std::string& out_path, const std::string& payload) {
    if (out_path.empty() || out_path == "-") {
        std::cout << payload;
        std::cout.flush();
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open output file: " + out_path);
    }
    out << payload;
    out.flush();
    if (!out) {
        throw std::runtime_error("failed writing output file: " + out_path);
    }
}

std::string csv_header_block(const std::string& command, uint64_t seed,
                             const json& config) {
    std::string header;
    header += "# tool: specdec ";
    header += kVersion;
    header += "\n# command: " + command;
    header += "\n# seed: " + std::to_string(seed);
    header += "\n# config: " + config.dump();
    header += "\n";
    return header;
}

std::string json_report(const std::string& command, uint64_t seed,
                        const json& config, const json& results) {
    json report;
    report["tool"] = "specdec";
    report["version"] = kVersion;
    report["command"] = command;
    report["seed"] = seed;
    report["config"] = config;
    report["results"] = results;
    return report.dump(2) + "\n";
}

std::vector<double> parse_number_list(const std::string& text, const std::string& what) {
    std::vector<double> values;
    std::string token;
    std::stringstream ss(text);
    while (std::getline(ss, token, ',')) {
        if (token.empty()) continue;
        try {
            size_t pos = 0;
            values.push_back(std::stod(token, &pos));
            if (pos != token.size()) throw std::invalid_argument(token);
        } catch (const std::exception&) {
            throw ParseError(what + ": cannot parse number '" + token + "'");
        }
    }
    if (values.empty()) throw ParseError(what + ": empty list");
    return values;
}

std::vector<double> read_number_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open file: " + path);
    std::vector<double> values;
    std::string token;
    size_t index = 0;
    while (in >> token) {
        ++index;
        // Allow comma-separated layouts too.
        std::stringstream ss(token);
        std::string piece;
        while (std::getline(ss, piece, ',')) {
            if (piece.empty()) continue;
            try {
                size_t pos = 0;
                values.push_back(std::stod(piece, &pos));
                if (pos != piece.size()) throw std::invalid_argument(piece);
            } catch (const std::exception&) {
                throw ParseError(path + ": token " + std::to_string(index) +
                                 " ('" + piece + "') is not a number");
            }
        }
    }
    if (values.empty()) throw ParseError(path + ": no numbers found");
    return values;
}

Distribution load_distribution(const std::string& inline_list,
                               const std::string& file_path, const char* name) {
    std::vector<double> values;
    if (!file_path.empty()) {
        values = read_number_file(file_path);
    } else if (!inline_list.empty()) {
        values = parse_number_list(inline_list, name);
    } else {
        throw ParseError(std::string("distribution '") + name +
                         "' missing: pass --" + name + " or --" + name + "-file");
    }
    try {
        return Distribution::from_unnormalized(std::move(values));
    } catch (const std::invalid_argument& e) {
        throw ParseError(std::string("distribution '") + name + "': " + e.what());
    }
}

std::vector<VerifyMethod> parse_methods(const std::string& list) {
    std::vector<VerifyMethod> methods;
    std::stringstream ss(list);
    std::string token;
    while (std::getline(ss, token, ',')) {
        if (token.empty()) continue;
        methods.push_back(parse_method(token));
    }
    if (methods.empty()) throw std::invalid_argument("no methods given");
    return methods;
}

json rate_vector_json(const RateVector& rv) {
    json j;
    j["per_position"] = rv.per_position;
    j["total"] = rv.total;
    // Acceptance probability of slot i conditioned on all earlier slots
    // rejecting.
    std::vector<double> conditional;
    double survive = 1.0;
    for (double r : rv.per_position) {
        conditional.push_back(survive > 1e-15 ? r / survive : 0.0);
        survive -= r;
    }
    j["conditional_per_position"] = conditional;
    return j;
}

// ---------------------------------------------------------------------------
// toy

struct ToyArgs {
    std::vector<double> temps{0.1, 0.25, 0.5};
    std::vector<double> lambdas{0.5, 0.7};
    size_t vocab = 50;
    int pairs = 100;
    long long trials = 1000;
    uint64_t seed = kDefaultSeed;
    std::string out;
    std::string format = "csv";
};

int run_toy(const ToyArgs& args) {
    json config{{"temps", args.temps},   {"lambdas", args.lambdas},
                {"vocab", args.vocab},   {"pairs", args.pairs},
                {"trials", args.trials}, {"format", args.format}};

    std::vector<ToyRow> rows;
    for (double temp : args.temps) {
        for (double lambda : args.lambdas) {
            ToyConfig cfg;
            cfg.temperature = temp;
            cfg.lambda = lambda;
            cfg.vocab = args.vocab;
            cfg.n_pairs = args.pairs;
            cfg.mc_trials = args.trials;
            cfg.seed = args.seed;
            auto cell = toy_experiment(cfg);
            rows.insert(rows.end(), cell.begin(), cell.end());
        }
    }

    if (args.format == "csv") {
        std::string payload = csv_header_block("toy", args.seed, config);
        payload += "T,lambda,method,mean,stderr,n_pairs,mc_trials\n";
        for (const auto& row : rows) {
            payload += fmt_double(row.config.temperature) + "," +
                       fmt_double(row.config.lambda) + "," + row.method + "," +
                       fmt_double(row.mean) + "," + fmt_double(row.std_error) + "," +
                       std::to_string(row.config.n_pairs) + "," +
                       std::to_string(row.config.mc_trials) + "\n";
        }
        emit(args.out, payload);
    } else {
        json results = json::array();
        for (const auto& row : rows) {
            results.push_back({{"T", row.config.temperature},
                               {"lambda", row.config.lambda},
                               {"method", row.method},
                               {"mean", row.mean},
                               {"stderr", row.std_error},
                               {"n_pairs", row.config.n_pairs},
                               {"mc_trials", row.config.mc_trials},
                               {"fallbacks", row.fallbacks}});
        }
        emit(args.out, json_report("toy", args.seed, config, results));
    }
    return 0;
}

// ---------------------------------------------------------------------------
// rates

struct RatesArgs {
    std::string p_inline, p_file, q_inline, q_file;
    std::string methods = "rrs,rrsw,spechub";
    int k = 2;
    long long trials = 10000;
    uint64_t seed = kDefaultSeed;
    std::string out;
    std::string format = "json";
};

int run_rates(const RatesArgs& args) {
    const Distribution p = load_distribution(args.p_inline, args.p_file, "p");
    const Distribution q = load_distribution(args.q_inline, args.q_file, "q");
    if (p.size() != q.size()) {
        throw std::invalid_argument("p and q must have the same length");
    }
    const auto methods = parse_methods(args.methods);

    json config{{"methods", args.methods}, {"k", args.k},
                {"trials", args.trials},   {"vocab", p.size()},
                {"format", args.format}};

    json results;
    results["p"] = p.probs();
    results["q"] = q.probs();
    results["overlap"] = overlap(p, q);
    for (VerifyMethod method : methods) {
        json entry;
        const int k = method == VerifyMethod::kSpecHub ? 2 : args.k;
        entry["k"] = k;
        switch (method) {
            case VerifyMethod::kSingle:
            case VerifyMethod::kRrs:
                entry["analytic"] = rate_vector_json(analytic_rates_rrs(
                    p, q, method == VerifyMethod::kSingle ? 1 : k));
                break;
            case VerifyMethod::kSpecHub:
                try {
                    entry["analytic"] = rate_vector_json(analytic_rates_spechub(p, q));
                    entry["top_token_rate"] = spechub_top_token_rate(p, q);
                } catch (const DegenerateInputError&) {
                    entry["analytic"] = nullptr;
                    entry["degenerate_fallback"] = true;
                }
                break;
            case VerifyMethod::kRrsw:
                entry["analytic"] = nullptr;  // path-dependent; Monte Carlo only
                break;
        }
        Rng rng(derive_seed(args.seed, 0x52415445, static_cast<uint64_t>(method)));
        const McRates mc = mc_rates(method, p, q, k, args.trials, rng);
        json mc_json = rate_vector_json(mc.rates);
        mc_json["per_position_se"] = mc.per_position_se;
        mc_json["total_se"] = mc.total_se;
        mc_json["trials"] = mc.trials;
        entry["monte_carlo"] = mc_json;
        results[method_name(method)] = entry;
    }
    emit(args.out, json_report("rates", args.seed, config, results));
    return 0;
}

// ---------------------------------------------------------------------------
// otm

struct OtmArgs {
    std::string p_inline, p_file, q_inline, q_file;
    std::string joint = "independent";
    bool dump_plan = false;
    bool dump_coupling = false;
    size_t max_dense_vocab = 2048;
    uint64_t seed = kDefaultSeed;
    std::string out;
    std::string format = "json";
};

int run_otm(const OtmArgs& args) {
    const Distribution p = load_distribution(args.p_inline, args.p_file, "p");
    const Distribution q = load_distribution(args.q_inline, args.q_file, "q");
    if (p.size() != q.size()) {
        throw std::invalid_argument("p and q must have the same length");
    }
    const size_t vocab = p.size();
    if (args.joint != "hub" && vocab > args.max_dense_vocab) {
        throw ResourceLimitError("dense joint needs V <= " +
                                 std::to_string(args.max_dense_vocab) + ", got " +
                                 std::to_string(vocab));
    }

    const PairJoint joint = [&] {
        if (args.joint == "independent") return PairJoint::independent(q);
        if (args.joint == "wor") return PairJoint::without_replacement(q);
        if (args.joint == "hub") return PairJoint::hub(q);
        throw std::invalid_argument("unknown joint: " + args.joint);
    }();

    const FlowNetwork net = build_flow(joint, p);
    const MaxFlowResult flow = max_flow(net);
    const SimplifiedPlan plan = flow_to_plan(net, flow, joint, p);

    json config{{"joint", args.joint},
                {"dump_plan", args.dump_plan},
                {"dump_coupling", args.dump_coupling},
                {"vocab", vocab},
                {"format", args.format}};
    json results;
    results["joint"] = args.joint;
    results["flow_value"] = flow.value;
    results["cost"] = plan_cost(plan);
    results["plan_total_accept"] = plan.total_accept();

    if (args.dump_coupling && vocab > kMaxCouplingVocab) {
        throw ResourceLimitError("coupling dump needs V <= " +
                                 std::to_string(kMaxCouplingVocab));
    }
    if (vocab <= kMaxCouplingVocab) {
        const FullCoupling coupling = reconstruct_full_coupling(plan, joint, p);
        double max_q_dev = 0.0;
        for (size_t x1 = 0; x1 < vocab; ++x1) {
            for (size_t x2 = 0; x2 < vocab; ++x2) {
                double sum = 0.0;
                for (size_t y = 0; y < vocab; ++y) {
                    sum += coupling.at(static_cast<Token>(x1), static_cast<Token>(x2),
                                       static_cast<Token>(y));
                }
                max_q_dev = std::max(
                    max_q_dev, std::abs(sum - joint.mass(static_cast<Token>(x1),
                                                         static_cast<Token>(x2))));
            }
        }
        double max_p_dev = 0.0;
        for (size_t y = 0; y < vocab; ++y) {
            double sum = 0.0;
            for (size_t x1 = 0; x1 < vocab; ++x1) {
                for (size_t x2 = 0; x2 < vocab; ++x2) {
                    sum += coupling.at(static_cast<Token>(x1), static_cast<Token>(x2),
                                       static_cast<Token>(y));
                }
            }
            max_p_dev = std::max(max_p_dev, std::abs(sum - p[y]));
        }
        const double member_cost = membership_cost(coupling);
        results["reconstruction_check"] = {
            {"max_joint_marginal_dev", max_q_dev},
            {"max_target_marginal_dev", max_p_dev},
            {"membership_cost", member_cost},
            {"cost_matches_plan", std::abs(member_cost - plan_cost(plan)) <= 1e-9}};
        if (args.dump_coupling) {
            results["coupling"] = {{"shape", {vocab, vocab, vocab}},
                                   {"pi", coupling.tensor()}};
        }
    }

    if (args.dump_plan) {
        constexpr size_t kMaxDumpVocab = 64;
        if (vocab > kMaxDumpVocab) {
            throw ResourceLimitError("plan dump needs V <= 64");
        }
        std::vector<double> accept1(vocab * vocab, 0.0), accept2(vocab * vocab, 0.0);
        for (const auto& e : plan.entries()) {
            accept1[static_cast<size_t>(e.x1) * vocab + static_cast<size_t>(e.x2)] =
                e.accept1;
            accept2[static_cast<size_t>(e.x1) * vocab + static_cast<size_t>(e.x2)] =
                e.accept2;
        }
        results["plan"] = {{"shape", {vocab, vocab}},
                           {"accept1", accept1},
                           {"accept2", accept2}};
    }

    emit(args.out, json_report("otm", args.seed, config, results));
    return 0;
}

// ---------------------------------------------------------------------------
// simulate

struct SimArgs {
    std::string tree = "full:2:4";
    std::string process = "synthetic:1.0:0.7:50";
    std::string methods = "rrs,rrsw,spechub";
    long long steps = 1000;
    uint64_t seed = kDefaultSeed;
    std::string out;
    std::string format = "csv";
};

TreeTopology parse_tree(const std::string& spec) {
    if (spec.rfind("full:", 0) == 0) {
        int branching = 0, depth = 0;
        if (std::sscanf(spec.c_str(), "full:%d:%d", &branching, &depth) != 2) {
            throw std::invalid_argument("tree spec must be full:B:D or file:PATH");
        }
        return TreeTopology::full(branching, depth);
    }
    if (spec.rfind("file:", 0) == 0) {
        const std::string path = spec.substr(5);
        std::ifstream in(path);
        if (!in) throw ParseError("cannot open tree file: " + path);
        std::vector<int32_t> parents;
        long long v = 0;
        size_t index = 0;
        while (in >> v) {
            ++index;
            if (v < -1 || v > static_cast<long long>(kMaxTreeNodes)) {
                throw ParseError(path + ": parent " + std::to_string(index) +
                                 " out of range");
            }
            parents.push_back(static_cast<int32_t>(v));
        }
        if (!in.eof()) {
            throw ParseError(path + ": token " + std::to_string(index + 1) +
                             " is not an integer");
        }
        return TreeTopology::from_parents(std::move(parents), "file:" + path);
    }
    throw std::invalid_argument("tree spec must be full:B:D or file:PATH");
}

DistProcess parse_process(const std::string& spec, uint64_t seed) {
    if (spec.rfind("synthetic:", 0) == 0) {
        double temp = 0.0, lambda = 0.0;
        unsigned long vocab = 0;
        if (std::sscanf(spec.c_str(), "synthetic:%lf:%lf:%lu", &temp, &lambda,
                        &vocab) != 3) {
            throw std::invalid_argument(
                "process spec must be synthetic:T:lambda:V or trace:PATH");
        }
        return DistProcess::synthetic(temp, lambda, vocab, seed);
    }
    if (spec.rfind("trace:", 0) == 0) {
        const std::string path = spec.substr(6);
        TraceLoadStats stats;
        auto records = load_trace_file(path, &stats);
        if (stats.renormalized > 0) {
            std::cerr << "note: renormalized " << stats.renormalized
                      << " trace arrays (max deviation " << stats.max_deviation
                      << ")\n";
        }
        return DistProcess::from_trace(std::move(records));
    }
    throw std::invalid_argument("process spec must be synthetic:T:lambda:V or trace:PATH");
}

int run_simulate(const SimArgs& args) {
    const TreeTopology tree = parse_tree(args.tree);
    const DistProcess proc = parse_process(args.process, args.seed);
    const auto methods = parse_methods(args.methods);

    json config{{"tree", args.tree},     {"process", args.process},
                {"methods", args.methods}, {"steps", args.steps},
                {"format", args.format}};

    std::vector<SimReport> reports;
    for (VerifyMethod method : methods) {
        // Every method consumes an identical verification stream; the
        // process itself is keyed by (seed, step, depth), so method
        // comparisons are paired on the same distribution sequence.
        Rng rng(derive_seed(args.seed, 0x53494d55ULL));
        reports.push_back(run_sim(tree, proc, method, args.steps, rng));
    }

    if (args.format == "csv") {
        std::string payload = csv_header_block("simulate", args.seed, config);
        payload += "method,tree,process,steps,mean_tokens_per_step,stderr\n";
        for (const auto& r : reports) {
            payload += r.method + "," + r.tree + "," + r.process + "," +
                       std::to_string(r.steps) + "," +
                       fmt_double(r.mean_tokens_per_step) + "," +
                       fmt_double(r.std_error) + "\n";
        }
        emit(args.out, payload);
    } else {
        json results = json::array();
        for (const auto& r : reports) {
            results.push_back({{"method", r.method},
                               {"tree", r.tree},
                               {"process", r.process},
                               {"steps", r.steps},
                               {"mean_tokens_per_step", r.mean_tokens_per_step},
                               {"stderr", r.std_error},
                               {"root_rates", rate_vector_json(r.root_rates)}});
        }
        emit(args.out, json_report("simulate", args.seed, config, results));
    }
    return 0;
}

// ---------------------------------------------------------------------------
// gen-trace

struct GenTraceArgs {
    double temperature = 1.0;
    double lambda = 0.7;
    size_t vocab = 50;
    int steps = 100;
    int depth = 4;
    uint64_t seed = kDefaultSeed;
    std::string out;
};

int run_gen_trace(const GenTraceArgs& args) {
    if (args.steps < 1 || args.depth < 1) {
        throw std::invalid_argument("gen-trace: steps and depth must be >= 1");
    }
    json config{{"T", args.temperature}, {"lambda", args.lambda},
                {"vocab", args.vocab},   {"steps", args.steps},
                {"depth", args.depth}};

    std::vector<TraceRecord> records;
    records.reserve(static_cast<size_t>(args.steps) * static_cast<size_t>(args.depth));
    for (int step = 0; step < args.steps; ++step) {
        for (int depth = 0; depth < args.depth; ++depth) {
            const auto [p, q] =
                synth_pair(args.temperature, args.lambda, args.vocab, args.seed,
                           static_cast<uint64_t>(step), static_cast<uint64_t>(depth));
            records.push_back({step, depth, p.probs(), q.probs()});
        }
    }

    std::ostringstream payload;
    payload << csv_header_block("gen-trace", args.seed, config);
    write_trace(payload, records);
    emit(args.out, payload.str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sampling and verification layer of multi-draft speculative decoding"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string("specdec ") + kVersion);

    ToyArgs toy;
    auto* toy_cmd = app.add_subcommand(
        "toy", "Acceptance-rate table over a (T, lambda) grid of synthetic pairs");
    toy_cmd->add_option("--temps", toy.temps, "Temperature grid")->delimiter(',');
    toy_cmd->add_option("--lambdas", toy.lambdas, "Similarity grid")->delimiter(',');
    toy_cmd->add_option("--vocab", toy.vocab, "Vocabulary size");
    toy_cmd->add_option("--pairs", toy.pairs, "Random (p, q) pairs per cell");
    toy_cmd->add_option("--trials", toy.trials, "Monte-Carlo repetitions for RRSw");
    toy_cmd->add_option("--seed", toy.seed, "Master seed");
    toy_cmd->add_option("--out", toy.out, "Output path (default stdout)");
    toy_cmd->add_option("--format", toy.format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));

    RatesArgs rates;
    auto* rates_cmd = app.add_subcommand(
        "rates", "Analytic and Monte-Carlo acceptance rates for given p, q");
    rates_cmd->add_option("--p", rates.p_inline, "Target distribution, comma separated");
    rates_cmd->add_option("--p-file", rates.p_file, "Target distribution file");
    rates_cmd->add_option("--q", rates.q_inline, "Draft distribution, comma separated");
    rates_cmd->add_option("--q-file", rates.q_file, "Draft distribution file");
    rates_cmd->add_option("--methods", rates.methods, "Comma list: single,rrs,rrsw,spechub");
    rates_cmd->add_option("--k", rates.k, "Number of drafts for rrs/rrsw");
    rates_cmd->add_option("--trials", rates.trials, "Monte-Carlo trials");
    rates_cmd->add_option("--seed", rates.seed, "Master seed");
    rates_cmd->add_option("--out", rates.out, "Output path (default stdout)");
    rates_cmd->add_option("--format", rates.format, "json")
        ->check(CLI::IsMember({"json"}));

    OtmArgs otm;
    auto* otm_cmd = app.add_subcommand(
        "otm", "Exact optimal-transport verification value for two drafts");
    otm_cmd->add_option("--p", otm.p_inline, "Target distribution, comma separated");
    otm_cmd->add_option("--p-file", otm.p_file, "Target distribution file");
    otm_cmd->add_option("--q", otm.q_inline, "Draft distribution, comma separated");
    otm_cmd->add_option("--q-file", otm.q_file, "Draft distribution file");
    otm_cmd->add_option("--joint", otm.joint, "independent, wor, or hub")
        ->check(CLI::IsMember({"independent", "wor", "hub"}));
    otm_cmd->add_flag("--dump-plan", otm.dump_plan, "Include the plan matrices");
    otm_cmd->add_flag("--dump-coupling", otm.dump_coupling,
                      "Include the reconstructed coupling tensor (V <= 16)");
    otm_cmd->add_option("--max-dense-vocab", otm.max_dense_vocab,
                        "Size cap for dense joints");
    otm_cmd->add_option("--seed", otm.seed, "Master seed");
    otm_cmd->add_option("--out", otm.out, "Output path (default stdout)");
    otm_cmd->add_option("--format", otm.format, "json")
        ->check(CLI::IsMember({"json"}));

    SimArgs sim;
    auto* sim_cmd = app.add_subcommand(
        "simulate", "Token-tree decoding simulation (tokens per step)");
    sim_cmd->add_option("--tree", sim.tree, "full:B:D or file:PATH");
    sim_cmd->add_option("--process", sim.process, "synthetic:T:lambda:V or trace:PATH");
    sim_cmd->add_option("--methods", sim.methods, "Comma list: rrs,rrsw,spechub");
    sim_cmd->add_option("--steps", sim.steps, "Decoding steps to simulate");
    sim_cmd->add_option("--seed", sim.seed, "Master seed");
    sim_cmd->add_option("--out", sim.out, "Output path (default stdout)");
    sim_cmd->add_option("--format", sim.format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));

    GenTraceArgs gen;
    auto* gen_cmd = app.add_subcommand(
        "gen-trace", "Write a synthetic (p, q) trace for later replay");
    gen_cmd->add_option("--T", gen.temperature, "Temperature");
    gen_cmd->add_option("--lambda", gen.lambda, "Similarity weight");
    gen_cmd->add_option("--vocab", gen.vocab, "Vocabulary size");
    gen_cmd->add_option("--steps", gen.steps, "Steps to generate");
    gen_cmd->add_option("--depth", gen.depth, "Depths per step");
    gen_cmd->add_option("--seed", gen.seed, "Master seed");
    gen_cmd->add_option("--out", gen.out, "Output path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (toy_cmd->parsed()) return run_toy(toy);
        if (rates_cmd->parsed()) return run_rates(rates);
        if (otm_cmd->parsed()) return run_otm(otm);
        if (sim_cmd->parsed()) return run_simulate(sim);
        if (gen_cmd->parsed()) return run_gen_trace(gen);
        std::cerr << "error: no subcommand\n";
        return kExitUsage;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitParse;
    } catch (const EndOfTraceError& e) {
        std::cerr << "trace error: " << e.what() << "\n";
        return kExitParse;
    } catch (const ResourceLimitError& e) {
        std::cerr << "resource limit: " << e.what() << "\n";
        return kExitResource;
    } catch (const DegenerateInputError& e) {
        std::cerr << "degenerate input: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const InternalConsistencyError& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInternal;
    }
}
