// Copyright 2026 The rbench Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// rbench: simulate and fit randomized benchmarking experiments.
//
//   rbench run <config> [--seed N] [--out DIR] [--threads T]
//   rbench fit <csv> --dim D [--order 0|1|both] [--c1 C] [--out FILE]
//   rbench table1 [--out DIR] [--threads T]
//   rbench bound --gamma G --m M --k K
//
// Exit codes: 0 success, 2 input or configuration error, 3 resource limit,
// 4 internal invariant violation.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "rbench/commands.hpp"

namespace {

constexpr int kExitInput = 2;
constexpr int kExitResource = 3;
constexpr int kExitInternal = 4;

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Randomized benchmarking simulator and decay-curve fitter"};
    app.require_subcommand(1);

    std::string run_config;
    std::optional<std::uint64_t> run_seed;
    std::optional<std::string> run_out;
    unsigned threads = 0;
    auto* run = app.add_subcommand("run", "Simulate a configured experiment and write decay, fit and offset CSVs");
    run->add_option("config", run_config, "Experiment configuration file")->required()->check(CLI::ExistingFile);
    run->add_option("--seed", run_seed, "Override the configured seed");
    run->add_option("--out", run_out, "Output directory (default: the configured outputs)");
    run->add_option("--threads", threads, "Worker threads; 0 uses all cores");

    std::string fit_csv;
    int fit_dim = 0;
    std::string fit_order = "both";
    std::optional<double> fit_c1;
    std::optional<std::string> fit_out;
    auto* fit = app.add_subcommand("fit", "Fit a decay-curve CSV (m,f_mean[,f_stderr][,n_sequences])");
    fit->add_option("csv", fit_csv, "Decay CSV")->required()->check(CLI::ExistingFile);
    fit->add_option("--dim", fit_dim, "Hilbert-space dimension d")->required();
    fit->add_option("--order", fit_order, "Model order: 0, 1 or both")->check(CLI::IsMember({"0", "1", "both"}));
    fit->add_option("--c1", fit_c1, "Known first-order amplitude C, used to report q - p^2");
    fit->add_option("--out", fit_out, "Fit CSV path (default: <csv stem>.fit.csv)");

    std::optional<std::string> table_out;
    auto* table = app.add_subcommand("table1", "Run the four reference scenarios and tabulate p, r and q - p^2");
    table->add_option("--out", table_out, "Directory for per-scenario CSVs and table1.csv");
    table->add_option("--threads", threads, "Worker threads; 0 uses all cores");

    double gamma = 0.0;
    int bound_m = 0, bound_k = 0;
    auto* bound = app.add_subcommand("bound", "Evaluate the perturbative bound and validity ratio");
    bound->add_option("--gamma", gamma, "Noise variation gamma")->required()->check(CLI::NonNegativeNumber);
    bound->add_option("--m", bound_m, "Sequence length")->required();
    bound->add_option("--k", bound_k, "Expansion order")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitInput;
    }

    try {
        if (*run) {
            rbench::RunRequest req{run_config, run_seed, std::nullopt, threads};
            if (run_out) req.out = *run_out;
            const auto bundle = rbench::cmd_run(req);
            std::cout << bundle.summary << "\nwrote " << bundle.decay_csv.string() << ", " << bundle.fit_csv.string()
                      << ", " << bundle.offset_csv.string() << ", " << bundle.summary_txt.string() << '\n';
        } else if (*fit) {
            rbench::FitRequest req{fit_csv, fit_dim, rbench::parse_fit_order(fit_order), fit_c1, std::nullopt};
            if (fit_out) req.out = *fit_out;
            std::cout << rbench::cmd_fit(req).summary;
        } else if (*table) {
            std::optional<std::filesystem::path> out;
            if (table_out) out = *table_out;
            std::cout << rbench::cmd_table1(out, threads).summary;
        } else if (*bound) {
            std::cout << rbench::cmd_bound(gamma, bound_m, bound_k);
        }
    } catch (const rbench::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const rbench::ResourceError& e) {
        std::cerr << "resource limit: " << e.what() << '\n';
        return kExitResource;
    } catch (const rbench::InvariantError& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kExitInternal;
    } catch (const rbench::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }
    return 0;
}
