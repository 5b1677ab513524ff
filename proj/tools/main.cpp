// Copyright (c) 2026 The cwrnn authors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: config-driven training, checkpoint evaluation,
// free-run generation, gradient checking, structural benchmarks and
// parameter counting. Exit codes: 0 success, 1 runtime failure, 2 usage
// or configuration error.

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "cwrnn/analysis.hpp"
#include "cwrnn/baselines.hpp"
#include "cwrnn/data_io.hpp"
#include "cwrnn/gradcheck.hpp"
#include "cwrnn/runner.hpp"

namespace {

using namespace cwrnn;

std::size_t worker_count(std::size_t jobs) {
    std::size_t threads = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("CWRNN_THREADS")) {
        try {
            threads = std::max<std::size_t>(1, std::stoull(env));
        } catch (const std::exception&) {
            throw ConfigError("CWRNN_THREADS must be a positive integer");
        }
    }
    return std::min(threads, jobs);
}

std::pair<std::uint64_t, std::uint64_t> parse_seed_range(const std::string& text) {
    const auto dots = text.find("..");
    try {
        if (dots == std::string::npos) {
            const std::uint64_t s = std::stoull(text);
            return {s, s};
        }
        const std::uint64_t a = std::stoull(text.substr(0, dots));
        const std::uint64_t b = std::stoull(text.substr(dots + 2));
        if (b < a) {
            throw ConfigError("--seeds range must be ascending");
        }
        return {a, b};
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        throw ConfigError("--seeds expects N or A..B");
    }
}

std::string metric_name(const std::string& task) {
    return task == "generation" ? "nmse" : "test_error";
}

int cmd_train(const std::string& config_path, const std::string& seeds) {
    RunConfig cfg = load_run_config(config_path);
    if (seeds.empty()) {
        const RunResult result = run_training(cfg);
        std::cout << metric_name(cfg.task.type) << ','
                  << format_real(result.metrics.final_metric) << '\n';
        return 0;
    }

    const auto [first, last] = parse_seed_range(seeds);
    std::vector<std::uint64_t> seed_list;
    for (std::uint64_t s = first; s <= last; ++s) {
        seed_list.push_back(s);
    }
    // Synthetic data is written once up front so parallel workers only read.
    materialize_dataset(cfg, std::filesystem::path(cfg.out.checkpoint).parent_path());

    std::vector<std::pair<std::uint64_t, double>> results(seed_list.size());
    std::vector<std::string> errors;
    std::mutex error_mutex;
    std::atomic<std::size_t> next{0};
    auto work = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= seed_list.size()) {
                return;
            }
            try {
                const RunResult r = run_training(cfg, seed_list[i]);
                results[i] = {seed_list[i], r.metrics.final_metric};
            } catch (const std::exception& e) {
                const std::scoped_lock lock(error_mutex);
                errors.push_back("seed " + std::to_string(seed_list[i]) + ": " + e.what());
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < worker_count(seed_list.size()); ++i) {
        pool.emplace_back(work);
    }
    for (auto& t : pool) {
        t.join();
    }
    if (!errors.empty()) {
        for (const auto& e : errors) {
            std::cerr << "error: " << e << '\n';
        }
        return 1;
    }
    std::cout << "seed," << metric_name(cfg.task.type) << '\n';
    for (const auto& [seed, metric] : results) {
        std::cout << seed << ',' << format_real(metric) << '\n';
    }
    return 0;
}

int cmd_gradcheck(const std::string& kind, std::uint64_t seed, std::size_t hidden,
                  std::size_t groups, std::size_t inputs, std::size_t outputs,
                  std::size_t steps, bool softmax, bool corrupt) {
    if (hidden > 16) {
        throw ConfigError("gradcheck: finite differences are only run for hidden <= 16");
    }
    ModelConfig mc;
    mc.type = kind;
    mc.hidden = hidden;
    mc.groups = groups;
    const auto act = softmax ? OutputActivation::Softmax : OutputActivation::Identity;
    auto model = build_model(mc, inputs, outputs, act, seed);

    GradCheckOptions opts;
    opts.steps = steps;
    opts.corruption = corrupt ? 1e-3 : 0.0;
    Rng rng(derive_seed(seed, 2));
    const GradCheckReport report = gradcheck(*model, rng, opts);
    for (const auto& block : report.blocks) {
        std::printf("%-8s max_rel_err %.3e\n", block.name.c_str(), block.max_rel_err);
    }
    const bool ok = report.passed(opts.tolerance);
    std::printf("gradcheck %s: max %.3e in block %s (tolerance %.0e) %s\n", kind.c_str(),
                report.max_rel_err, report.worst_block.c_str(), opts.tolerance,
                ok ? "PASS" : "FAIL");
    return ok ? 0 : 1;
}

int cmd_bench(std::size_t groups, std::size_t group_size, std::size_t inputs,
              std::uint64_t window, bool csv) {
    const ClockSpec spec = ClockSpec::exponential(groups * group_size, groups);
    const std::uint64_t n_h = recurrent_param_count(spec);
    const AvgOps avg = avg_ops(spec, inputs, window);
    const double speedup = speedup_vs_rnn(spec, inputs);
    const double bound = static_cast<double>(groups) / 4.0;
    const bool claimed = groups >= 2;
    const bool ok = !claimed || speedup >= bound;
    if (csv) {
        std::printf("groups,group_size,inputs,n_h,avg_rec_ops,avg_in_ops,speedup,bound,status\n");
        std::printf("%zu,%zu,%zu,%llu,%.6g,%.6g,%.6g,%s,%s\n", groups, group_size, inputs,
                    static_cast<unsigned long long>(n_h), avg.recurrent(), avg.input(), speedup,
                    claimed ? format_real(bound).c_str() : "-", ok ? "PASS" : "FAIL");
    } else {
        std::printf("clockwork schedule: %zu groups x %zu units, %zu inputs\n", groups,
                    group_size, inputs);
        std::printf("  recurrent weights (N_H)   %llu\n",
                    static_cast<unsigned long long>(n_h));
        std::printf("  avg recurrent ops/step    %.6g\n", avg.recurrent());
        std::printf("  avg input ops/step        %.6g\n", avg.input());
        std::printf("  speedup vs dense RNN      %.6g\n", speedup);
        if (claimed) {
            std::printf("  g/4 lower bound           %.6g  %s\n", bound, ok ? "PASS" : "FAIL");
        } else {
            std::printf("  g/4 lower bound           not claimed for g < 2\n");
        }
    }
    return ok ? 0 : 1;
}

int cmd_params(const std::string& kind, std::size_t hidden, std::size_t groups,
               std::size_t inputs, std::size_t outputs) {
    std::size_t count = 0;
    if (kind == "cwrnn") {
        count = param_count_cwrnn(ClockSpec::exponential(hidden, groups), inputs, outputs);
    } else if (kind == "srn") {
        count = param_count_srn(inputs, hidden, outputs);
    } else {
        count = param_count_lstm(inputs, hidden, outputs);
    }
    std::printf("model=%s hidden=%zu groups=%zu inputs=%zu outputs=%zu params=%zu\n",
                kind.c_str(), hidden, kind == "cwrnn" ? groups : 0, inputs, outputs, count);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Clockwork RNN training, evaluation and analysis toolkit"};
    app.require_subcommand(1);

    auto* train = app.add_subcommand("train", "Train a model from a JSON run config");
    std::string config_path;
    std::string seeds;
    train->add_option("--config", config_path, "Run config JSON")->required();
    train->add_option("--seeds", seeds, "Run several seeds, N or A..B (per-seed output files)");

    auto* gradcheck_cmd =
        app.add_subcommand("gradcheck", "Verify BPTT gradients against finite differences");
    std::string gc_model = "cwrnn";
    std::uint64_t gc_seed = 1;
    std::size_t gc_hidden = 8, gc_groups = 3, gc_inputs = 2, gc_outputs = 2, gc_steps = 8;
    bool gc_softmax = false, gc_corrupt = false;
    gradcheck_cmd->add_option("--model", gc_model, "cwrnn, srn or lstm")
        ->check(CLI::IsMember({"cwrnn", "srn", "lstm"}));
    gradcheck_cmd->add_option("--seed", gc_seed, "Random seed");
    gradcheck_cmd->add_option("--hidden", gc_hidden, "Hidden units / cells (<= 16)");
    gradcheck_cmd->add_option("--groups", gc_groups, "Clockwork groups");
    gradcheck_cmd->add_option("--inputs", gc_inputs, "Input channels");
    gradcheck_cmd->add_option("--outputs", gc_outputs, "Output channels");
    gradcheck_cmd->add_option("--steps", gc_steps, "Sequence length");
    gradcheck_cmd->add_flag("--softmax", gc_softmax, "Use a softmax readout and xent loss");
    gradcheck_cmd->add_flag("--corrupt", gc_corrupt)->group("");  // harness self-test hook

    auto* bench = app.add_subcommand("bench", "Schedule op counts and speedup bound");
    std::size_t b_groups = 4, b_group_size = 2, b_inputs = 0;
    std::uint64_t b_window = 0;
    bool b_csv = false;
    bench->add_option("--groups", b_groups, "Number of modules g");
    bench->add_option("--group-size", b_group_size, "Units per module k");
    bench->add_option("--inputs", b_inputs, "Input channels m");
    bench->add_option("--window", b_window,
                      "Averaging window (multiple of the schedule cycle; 0 = one cycle)");
    bench->add_flag("--csv", b_csv, "Emit CSV instead of aligned text");

    auto* params_cmd = app.add_subcommand("params", "Parameter count for a model shape");
    std::string p_model = "cwrnn";
    std::size_t p_hidden = 0, p_groups = 1, p_inputs = 0, p_outputs = 1;
    params_cmd->add_option("--model", p_model)->check(CLI::IsMember({"cwrnn", "srn", "lstm"}));
    params_cmd->add_option("--hidden", p_hidden, "Hidden units / cells")->required();
    params_cmd->add_option("--groups", p_groups, "Clockwork groups");
    params_cmd->add_option("--inputs", p_inputs, "Input channels");
    params_cmd->add_option("--outputs", p_outputs, "Output channels");

    auto* eval = app.add_subcommand("eval", "Score a checkpoint on a dataset");
    std::string e_checkpoint, e_data;
    eval->add_option("--checkpoint", e_checkpoint)->required();
    eval->add_option("--data", e_data, "Sequence CSV, manifest, or synth:…")->required();

    auto* generate = app.add_subcommand("generate", "Free-run an input-free checkpoint");
    std::string g_checkpoint, g_out;
    std::size_t g_steps = 320;
    generate->add_option("--checkpoint", g_checkpoint)->required();
    generate->add_option("--steps", g_steps, "Steps to generate");
    generate->add_option("--out", g_out, "Output sequence CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (app.got_subcommand(train)) {
            return cmd_train(config_path, seeds);
        }
        if (app.got_subcommand(gradcheck_cmd)) {
            return cmd_gradcheck(gc_model, gc_seed, gc_hidden, gc_groups, gc_inputs, gc_outputs,
                                 gc_steps, gc_softmax, gc_corrupt);
        }
        if (app.got_subcommand(bench)) {
            return cmd_bench(b_groups, b_group_size, b_inputs, b_window, b_csv);
        }
        if (app.got_subcommand(params_cmd)) {
            return cmd_params(p_model, p_hidden, p_groups, p_inputs, p_outputs);
        }
        if (app.got_subcommand(eval)) {
            const auto [name, value] = evaluate_checkpoint(e_checkpoint, e_data);
            std::cout << name << ',' << format_real(value) << '\n';
            return 0;
        }
        if (app.got_subcommand(generate)) {
            const auto frames = generate_from_checkpoint(g_checkpoint, g_steps);
            save_sequence(g_out, frames);
            std::cout << "wrote " << g_out << " (" << frames.size() << " steps)\n";
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
