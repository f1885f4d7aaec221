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

#include "rbench/commands.hpp"

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

using namespace rbench;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("rbench_commands_test_" + std::to_string(::getpid())) / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int cli(const std::string& args) {
    const std::string cmd = std::string(RBENCH_CLI) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path preset(const std::string& name) { return fs::path(RBENCH_CONFIG_DIR) / name; }

fs::path write_config(const fs::path& dir, const std::string& text) {
    const auto p = dir / "test.config";
    std::ofstream(p) << text;
    return p;
}

const char* kSmall = R"({
  "name": "small",
  "noise": {"type": "overrotation", "range": [0.05, 0.2]},
  "m_values": {"start": 1, "stop": 40, "step": 3},
  "averaging": {"method": "monte_carlo", "k": 200},
  "seed": 11
})";

}  // namespace

TEST(commands, run_writes_bundle) {
    const auto dir = scratch("bundle");
    const auto b = cmd_run({preset("case_a.config"), std::nullopt, dir, 0});
    for (const auto& p : {b.decay_csv, b.fit_csv, b.offset_csv, b.summary_txt}) EXPECT_TRUE(fs::exists(p)) << p;
    EXPECT_NE(slurp(b.decay_csv).find("m,f_mean,f_stderr,n_sequences\n"), std::string::npos);
    EXPECT_EQ(slurp(b.fit_csv).substr(0, 63), "order,A,B,p,C,q,G,r,residual_rms,converged,gamma,validity_m_max");
    EXPECT_NE(b.summary.find("gamma"), std::string::npos);
    EXPECT_NE(b.summary.find("table row"), std::string::npos);
    EXPECT_NE(b.summary.find("eigenbasis"), std::string::npos);
    EXPECT_EQ(slurp(b.summary_txt), b.summary);
    for (const auto& entry : fs::directory_iterator(dir)) EXPECT_NE(entry.path().extension(), ".tmp");
}

TEST(commands, run_is_deterministic) {
    const auto dir = scratch("det");
    const auto cfg = write_config(dir, kSmall);
    const auto a = cmd_run({cfg, std::nullopt, dir / "a", 1});
    const auto b = cmd_run({cfg, std::nullopt, dir / "b", 4});
    const auto c = cmd_run({cfg, std::nullopt, dir / "c", 0});
    for (const char* f : {"decay.csv", "fit.csv", "offset.csv", "summary.txt"}) {
        EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f)) << f;
        EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "c" / f)) << f;
    }
    (void)a, (void)b, (void)c;
}

TEST(commands, seed_override) {
    const auto dir = scratch("seed");
    const auto cfg = write_config(dir, kSmall);
    cmd_run({cfg, std::nullopt, dir / "base", 0});
    cmd_run({cfg, 12, dir / "over", 0});
    cmd_run({cfg, 11, dir / "same", 0});
    EXPECT_NE(slurp(dir / "base" / "decay.csv"), slurp(dir / "over" / "decay.csv"));
    EXPECT_EQ(slurp(dir / "base" / "decay.csv"), slurp(dir / "same" / "decay.csv"));
    EXPECT_NE(slurp(dir / "over" / "decay.csv").find("# seed: 12\n"), std::string::npos);
}

TEST(commands, plan_echo_reproduces_run) {
    const auto dir = scratch("echo");
    const auto cfg = write_config(dir, kSmall);
    cmd_run({cfg, std::nullopt, dir / "a", 0});
    const auto curve = read_decay_csv(dir / "a" / "decay.csv");
    std::string echo;
    for (const auto& [k, v] : curve.metadata) {
        if (k == "plan") echo = v;
    }
    ASSERT_FALSE(echo.empty());
    const auto replay = write_config(dir, echo);
    cmd_run({replay, std::nullopt, dir / "b", 0});
    EXPECT_EQ(slurp(dir / "a" / "decay.csv"), slurp(dir / "b" / "decay.csv"));
}

TEST(commands, fit_round_trips_emitted_curve) {
    const auto dir = scratch("fit");
    const auto cfg = write_config(dir, kSmall);
    const auto b = cmd_run({cfg, std::nullopt, dir / "run", 0});
    const auto plan = build_plan(load_config(cfg));
    const auto original = analyze_curve(read_decay_csv(b.decay_csv), plan);
    const auto refit = cmd_fit({b.decay_csv, 2, FitOrder::Both, std::nullopt, dir / "refit.csv"});
    ASSERT_EQ(refit.fits.size(), 2u);
    EXPECT_EQ(refit.fits[0].p, original.zeroth.p);
    EXPECT_EQ(refit.fits[0].A, original.zeroth.A);
    EXPECT_EQ(refit.fits[1].p, original.first->p);
    EXPECT_EQ(*refit.fits[1].G, *original.first->G);
    EXPECT_TRUE(fs::exists(dir / "refit.csv"));
    EXPECT_NE(refit.summary.find("weights 1/stderr^2"), std::string::npos);

    const auto only0 = cmd_fit({b.decay_csv, 2, FitOrder::Zeroth, std::nullopt, dir / "o0.csv"});
    EXPECT_EQ(only0.fits.size(), 1u);
    const auto with_c = cmd_fit({b.decay_csv, 2, FitOrder::First, 0.5, dir / "o1.csv"});
    ASSERT_TRUE(with_c.fits[0].q_minus_p2().has_value());
    EXPECT_EQ(*with_c.fits[0].q_minus_p2(), *with_c.fits[0].G / 0.5);
}

TEST(commands, fit_external_data) {
    const auto dir = scratch("external");
    {
        std::ofstream out(dir / "lab.csv");
        out.precision(17);
        out << "# source: bench\nm,f_mean\n";
        for (int m = 1; m <= 30; m += 2) out << m << ',' << 0.48 * std::pow(0.97, m) + 0.51 << '\n';
    }
    const auto rep = cmd_fit({dir / "lab.csv", 2, FitOrder::Both, std::nullopt, std::nullopt});
    EXPECT_TRUE(fs::exists(dir / "lab.fit.csv"));
    EXPECT_NE(rep.summary.find("uniform weights"), std::string::npos);
    EXPECT_NEAR(rep.fits[0].p, 0.97, 1e-8);
    EXPECT_NEAR(rep.fits[0].B, 0.51, 1e-8);
}

TEST(commands, malformed_csv) {
    const auto dir = scratch("malformed");
    std::ofstream(dir / "bad.csv") << "m,f_mean\n1,0.9\n2,abc\n";
    EXPECT_THROW(cmd_fit({dir / "bad.csv", 2, FitOrder::Zeroth, std::nullopt, std::nullopt}), ValidationError);
    std::ofstream(dir / "cols.csv") << "m,fidelity\n1,0.9\n";
    EXPECT_THROW(cmd_fit({dir / "cols.csv", 2, FitOrder::Zeroth, std::nullopt, std::nullopt}), ValidationError);
    std::ofstream(dir / "short.csv") << "m,f_mean\n1,0.9\n2,0.8\n3,0.75\n";
    EXPECT_NO_THROW(cmd_fit({dir / "short.csv", 2, FitOrder::Zeroth, std::nullopt, std::nullopt}));
    EXPECT_THROW(cmd_fit({dir / "short.csv", 2, FitOrder::First, std::nullopt, std::nullopt}), ValidationError);
    EXPECT_THROW(parse_fit_order("2"), ValidationError);
}

TEST(commands, table1_reports_reference_rows) {
    const auto dir = scratch("table1");
    const auto res = cmd_table1(dir, 0);
    ASSERT_EQ(res.rows.size(), 4u);
    const auto& s = res.summary;
    EXPECT_NE(s.find("Unitary A          published   0.9800   1.05e-02    -2.730e-04"), std::string::npos) << s;
    EXPECT_NE(s.find("Unitary and T1     published   0.9880   5.85e-03    -2.800e-08"), std::string::npos) << s;
    EXPECT_NE(s.find("Unitary A          simulated"), std::string::npos);
    EXPECT_NE(s.find("No agreement verdict"), std::string::npos);
    EXPECT_TRUE(fs::exists(dir / "table1.csv"));
    EXPECT_TRUE(fs::exists(dir / "unitary_b" / "decay.csv"));
}

TEST(commands, bound) {
    const auto s = cmd_bound(0.01, 20, 2);
    EXPECT_NE(s.find("= 0.021"), std::string::npos) << s;
    EXPECT_NE(s.find("valid"), std::string::npos);
    EXPECT_NE(cmd_bound(0.5, 20, 1).find("invalid"), std::string::npos);
}

TEST(commands, atomic_write_leaves_nothing_on_failure) {
    const auto dir = scratch("atomic");
    EXPECT_THROW(write_file_atomic(dir / "x.csv",
                                   [](std::ostream& o) {
                                       o << "partial";
                                       throw Error("boom");
                                   }),
                 Error);
    EXPECT_TRUE(fs::is_empty(dir));
}

TEST(commands, cli_exit_codes) {
    const auto dir = scratch("cli");
    EXPECT_EQ(cli("bound --gamma 0.01 --m 20 --k 2"), 0);
    EXPECT_EQ(cli("bound --gamma 0.01 --m 0 --k 2"), 2);
    EXPECT_EQ(cli("nonsense"), 2);

    const auto bad = dir / "bad.config";
    std::ofstream(bad) << R"({"name": "bad", "noise": {"type": "telepathy"}, "m_values": [1, 2],
                             "averaging": {"method": "exact"}, "seed": 1})";
    EXPECT_EQ(cli("run " + bad.string() + " --out " + (dir / "bad_out").string()), 2);
    EXPECT_FALSE(fs::exists(dir / "bad_out"));

    const auto big = dir / "big.config";
    std::ofstream(big) << R"({"name": "big", "n_qubits": 2, "noise": {"type": "depolarizing", "value": 0.99},
                             "m_values": [1, 2], "averaging": {"method": "exact"}, "seed": 1})";
    EXPECT_EQ(cli("run " + big.string() + " --out " + (dir / "big_out").string()), 3);
    EXPECT_FALSE(fs::exists(dir / "big_out"));

    const auto ok = write_config(dir, kSmall);
    EXPECT_EQ(cli("run " + ok.string() + " --out " + (dir / "ok").string() + " --seed 3 --threads 2"), 0);
    EXPECT_EQ(cli("fit " + (dir / "ok" / "decay.csv").string() + " --dim 2 --order 0"), 0);
    EXPECT_EQ(cli("fit " + (dir / "ok" / "decay.csv").string() + " --dim 2 --order 3"), 2);
}
