// SPDX-License-Identifier: Apache-2.0
//
// manoma: movable-antenna NOMA downlink optimization toolkit
// ------------------------------------------------------------------------

#include "manoma/harness.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace manoma;

namespace
{

std::string slurp(const std::filesystem::path &p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

int config_error_line(const std::string &text)
{
    try
    {
        parse_config(text);
    }
    catch (const ConfigError &e)
    {
        return e.line();
    }
    return -1;
}

const char *kFastSpec = R"(# tiny sweep
sweep_param = power_budget_dBm
values = 20, 30
schemes = NOMA-FPA, SDMA-FPA, TDMA-FPA
realizations = 2
num_bs_antennas = 4
num_users = 2
num_paths = 3
outer_iters = 3
)";

} // namespace

TEST(Harness, EmptyConfigGivesDefaults)
{
    const SystemConfig c = parse_config("");
    const SystemConfig d;
    EXPECT_EQ(c.num_bs_antennas, 16);
    EXPECT_EQ(c.num_users, 4);
    EXPECT_EQ(c.num_paths, 10);
    EXPECT_DOUBLE_EQ(c.wavelength, 0.01);
    EXPECT_DOUBLE_EQ(c.power_budget, 1.0);
    EXPECT_NEAR(c.noise_power, 1e-11, 1e-25);
    EXPECT_DOUBLE_EQ(c.pathloss_exponent, 2.8);
    EXPECT_DOUBLE_EQ(c.bs_region, 20 * 0.01);
    EXPECT_DOUBLE_EQ(c.user_region, 4 * 0.01);
    EXPECT_DOUBLE_EQ(c.distance_min, 50.0);
    EXPECT_DOUBLE_EQ(c.distance_max, 200.0);
    EXPECT_DOUBLE_EQ(c.reference_gain, d.reference_gain);
}

TEST(Harness, UnitSuffixes)
{
    const SystemConfig c = parse_config("power_budget = 30 dBm\nnoise_power = -80dBm\nwavelength = 0.02\n"
                                        "bs_region = 10 lambda\nuser_region = 0.05\n");
    EXPECT_DOUBLE_EQ(c.power_budget, 1.0);
    EXPECT_NEAR(c.noise_power, 1e-11, 1e-25);
    EXPECT_DOUBLE_EQ(c.bs_region, 0.2);
    EXPECT_DOUBLE_EQ(c.user_region, 0.05);
    EXPECT_NEAR(c.reference_gain, std::pow(0.02 / (4 * std::acos(-1.0)), 2), 1e-20);
}

TEST(Harness, ErrorsCarryLineNumbers)
{
    EXPECT_EQ(config_error_line("num_users = 0\n"), 1);
    EXPECT_EQ(config_error_line("# header\n\nnum_paths = 4\nbogus_key = 1\n"), 4);
    EXPECT_EQ(config_error_line("num_paths = 4\nnum_paths = 5\n"), 2);
    EXPECT_EQ(config_error_line("num_paths = four\n"), 1);
    EXPECT_EQ(config_error_line("num_paths 4\n"), 1);
    EXPECT_EQ(config_error_line("num_users = 2.5\n"), 1);
}

TEST(Harness, FormatConfigRoundTrips)
{
    SystemConfig c;
    c.num_paths = 7;
    c.power_budget = 0.123456789012345;
    c.mrt_coefficient = 2.5;
    c.rng_seed = 99;
    const SystemConfig back = parse_config(format_config(c));
    EXPECT_EQ(back.num_paths, 7);
    EXPECT_EQ(back.power_budget, c.power_budget);
    EXPECT_EQ(back.mrt_coefficient, 2.5);
    EXPECT_EQ(back.rng_seed, 99u);
    EXPECT_EQ(back.reference_gain, c.reference_gain);
}

TEST(Harness, SweepSpecParsing)
{
    const SweepSpec s = parse_sweep_spec(kFastSpec);
    EXPECT_EQ(s.param, SweepParam::power_budget_dbm);
    EXPECT_EQ(s.values, (std::vector<double>{20.0, 30.0}));
    ASSERT_EQ(s.schemes.size(), 3u);
    EXPECT_EQ(s.schemes[1], Scheme::sdma_fpa);
    EXPECT_EQ(s.realizations, 2);
    EXPECT_EQ(s.base.num_users, 2);
    EXPECT_DOUBLE_EQ(apply_sweep_value(s.base, s.param, 20.0).power_budget, 0.1);

    EXPECT_THROW(parse_sweep_spec("realizations = 0\n"), ConfigError);
    EXPECT_THROW(parse_sweep_spec("schemes = NOMA-MA, FDMA\n"), ConfigError);
    EXPECT_THROW(parse_sweep_spec("sweep_param = num_users\nvalues = 1.5\n"), ConfigError);
    EXPECT_THROW(parse_sweep_spec("sweep_param = colour\n"), ConfigError);
}

TEST(Harness, SweepParamNames)
{
    for (auto p : {SweepParam::power_budget_dbm, SweepParam::num_bs_antennas, SweepParam::num_users,
                   SweepParam::num_paths, SweepParam::bs_region_wavelengths, SweepParam::user_region_wavelengths,
                   SweepParam::mrt_coefficient})
        EXPECT_EQ(parse_sweep_param(to_string(p)), p);
    EXPECT_STREQ(to_string(SweepParam::power_budget_dbm), "power_budget_dBm");
}

TEST(Harness, EmptyTableIsHeaderOnly)
{
    SweepTable t;
    EXPECT_EQ(results_csv(t), "sweep_param,value,scheme,realization,throughput_bpshz,runtime_s,outer_iters\r\n");
    EXPECT_EQ(per_user_csv(t), "sweep_param,value,scheme,realization,user,rate_bpshz\r\n");
    EXPECT_TRUE(parse_results_csv(results_csv(t)).empty());
}

TEST(Harness, NumberFormatting)
{
    EXPECT_EQ(format_number(1.0), "1");
    EXPECT_EQ(format_number(0.1234567890123456), "0.123456789012");
    EXPECT_EQ(format_number(std::nan("")), "nan");
    EXPECT_EQ(csv_field("plain"), "plain");
    EXPECT_EQ(csv_field("a,b"), "\"a,b\"");
    EXPECT_EQ(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
}

TEST(Harness, OneRunOneRow)
{
    SweepSpec s;
    s.base.num_bs_antennas = 4;
    s.base.num_users = 2;
    s.base.num_paths = 3;
    s.schemes = {Scheme::tdma_fpa};
    s.realizations = 1;
    s.workers = 1;
    const SweepTable t = run_sweep(s);
    ASSERT_EQ(t.rows.size(), 1u);
    const auto parsed = parse_results_csv(results_csv(t));
    ASSERT_EQ(parsed.size(), 1u);
    EXPECT_EQ(parsed[0].scheme, Scheme::tdma_fpa);
    const double a = t.rows[0].throughput, b = parsed[0].throughput;
    EXPECT_LE(std::abs(a - b), 1e-11 * std::abs(a));
    EXPECT_EQ(format_number(a), format_number(b));
}

TEST(Harness, SweepIsOrderedMatchedAndDeterministic)
{
    SweepSpec s = parse_sweep_spec(kFastSpec);
    s.record_timing = false;
    s.workers = 2;
    const SweepTable a = run_sweep(s);
    ASSERT_EQ(a.rows.size(), 2u * 3u * 2u);
    EXPECT_FALSE(a.any_failed());
    for (size_t i = 1; i < a.rows.size(); ++i)
    {
        const auto &p = a.rows[i - 1], &q = a.rows[i];
        EXPECT_TRUE(std::tie(p.value, p.scheme, p.realization) < std::tie(q.value, q.scheme, q.realization));
    }
    // all schemes in a cell saw the same geometry
    for (const auto &r : a.rows)
        for (const auto &o : a.rows)
            if (r.value == o.value && r.realization == o.realization)
                EXPECT_EQ(r.digest, o.digest);
    for (const auto &r : a.rows)
    {
        EXPECT_EQ(r.seed, s.base.rng_seed + static_cast<std::uint64_t>(r.realization));
        EXPECT_EQ(r.runtime_s, 0.0);
    }
    EXPECT_LT(a.mean_throughput(20.0, Scheme::tdma_fpa), a.mean_throughput(30.0, Scheme::tdma_fpa));

    s.workers = 1;
    const SweepTable b = run_sweep(s);
    EXPECT_EQ(results_csv(a), results_csv(b));
    EXPECT_EQ(per_user_csv(a), per_user_csv(b));
    EXPECT_EQ(manifest_json(a), manifest_json(b));
}

TEST(Harness, FailedCellDoesNotAbortSweep)
{
    SweepSpec s;
    s.param = SweepParam::num_bs_antennas;
    s.values = {2.0, 4.0};
    s.base.num_users = 3;
    s.base.num_paths = 3;
    s.schemes = {Scheme::sdma_fpa};
    s.realizations = 1;
    s.workers = 1;
    const SweepTable t = run_sweep(s);
    ASSERT_EQ(t.rows.size(), 2u);
    EXPECT_TRUE(t.rows[0].failed); // M < N
    EXPECT_FALSE(t.rows[1].failed);
    EXPECT_TRUE(t.any_failed());
    EXPECT_NE(results_csv(t).find(",nan,"), std::string::npos);
}

TEST(Harness, WritesFiles)
{
    namespace fs = std::filesystem;
    SweepSpec s = parse_sweep_spec(kFastSpec);
    s.values = {25.0};
    s.realizations = 1;
    s.workers = 1;
    const SweepTable t = run_sweep(s);
    const fs::path dir = fs::temp_directory_path() / "manoma_harness_test";
    fs::remove_all(dir);
    write_results(t, dir.string());
    EXPECT_EQ(slurp(dir / "results.csv"), results_csv(t));
    const std::string manifest = slurp(dir / "manifest.json");
    EXPECT_NE(manifest.find("\"version\": \"0.1.0\""), std::string::npos);
    EXPECT_NE(manifest.find("\"num_paths\": 3"), std::string::npos);
    const fs::path trace = dir / "traces" / "power_budget_dBm_25_NOMA-FPA_r0.csv";
    ASSERT_TRUE(fs::exists(trace));
    EXPECT_EQ(slurp(trace).rfind("outer_iter,objective_bpshz\r\n", 0), 0u);
    fs::remove_all(dir);
}

TEST(Harness, WorkerResolution)
{
    EXPECT_EQ(resolve_workers(3), 3);
    ::setenv(kWorkersEnv, "5", 1);
    EXPECT_EQ(resolve_workers(0), 5);
    ::setenv(kWorkersEnv, "zero", 1);
    EXPECT_GE(resolve_workers(0), 1);
    ::unsetenv(kWorkersEnv);
}
