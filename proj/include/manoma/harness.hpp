// SPDX-License-Identifier: Apache-2.0
//
// manoma: movable-antenna NOMA downlink optimization toolkit
// ------------------------------------------------------------------------
//
// Config files, seeded Monte Carlo sweeps and result files.
//
// Config format: one `key = value` per line, keys are SystemConfig field names, `#` starts a
// comment. Powers take an optional `dBm` suffix (watts otherwise); region sides take an
// optional `lambda` suffix (meters otherwise).
//
// Sweep spec format: the same syntax, with the reserved keys
//   sweep_param, values, schemes, realizations, output, workers
// and every other key applied to the base config.

#ifndef MANOMA_HARNESS_HPP
#define MANOMA_HARNESS_HPP

#include "manoma/benchmarks.hpp"
#include "manoma/config.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace manoma
{

inline constexpr const char *kToolName = "manoma";
inline constexpr const char *kToolVersion = "0.1.0";
inline constexpr int kDefaultRealizations = 20;
inline constexpr const char *kWorkersEnv = "MANOMA_WORKERS";

// Parse failure, carries the 1-based line number (0 when not tied to a line)
class ConfigError : public std::runtime_error
{
  public:
    ConfigError(int line, const std::string &msg);
    int line() const { return line_; }

  private:
    int line_;
};

SystemConfig parse_config(const std::string &text);
SystemConfig load_config(const std::string &path);

// Inverse of parse_config: every field, powers in watts, 17 significant digits
std::string format_config(const SystemConfig &config);

enum class SweepParam
{
    none, // single run
    power_budget_dbm,
    num_bs_antennas,
    num_users,
    num_paths,
    bs_region_wavelengths,
    user_region_wavelengths,
    mrt_coefficient
};

const char *to_string(SweepParam p);
SweepParam parse_sweep_param(const std::string &name);

// Base config with one swept parameter set; throws std::invalid_argument for non-integral counts
SystemConfig apply_sweep_value(const SystemConfig &base, SweepParam param, double value);

struct SweepSpec
{
    SweepParam param = SweepParam::none;
    std::vector<double> values{0.0};
    std::vector<Scheme> schemes = all_schemes();
    int realizations = kDefaultRealizations;
    SystemConfig base;
    std::string output = "results";
    int workers = 0;            // 0: environment override or hardware concurrency
    bool record_timing = true;  // false writes runtime_s = 0 (byte-reproducible output)

    void validate() const;
};

SweepSpec parse_sweep_spec(const std::string &text);
SweepSpec load_sweep_spec(const std::string &path);

struct RunRecord
{
    SweepParam param = SweepParam::none;
    double value = 0.0;
    Scheme scheme = Scheme::noma_ma;
    int realization = 0;
    std::uint64_t seed = 0;
    std::uint64_t digest = 0; // geometry digest seen by this scheme
    bool failed = false;
    std::string error;
    double throughput = 0.0;
    double runtime_s = 0.0;
    int outer_iters = 0;
    Eigen::VectorXd per_user_rates;
    std::vector<double> trace; // NOMA schemes only
};

struct SweepTable
{
    SweepSpec spec;
    std::vector<RunRecord> rows; // sorted by (value, scheme, realization)
    int workers_used = 1;

    bool any_failed() const;
    // Mean throughput over realizations of one (value, scheme) cell, failed runs excluded
    double mean_throughput(double value, Scheme scheme) const;
};

// Worker count: spec.workers if positive, else MANOMA_WORKERS, else hardware concurrency
int resolve_workers(int requested);

SweepTable run_sweep(const SweepSpec &spec);

// Writes <dir>/results.csv, <dir>/per_user_rates.csv, <dir>/manifest.json and
// <dir>/traces/<param>_<value>_<scheme>_r<realization>.csv for NOMA runs
void write_results(const SweepTable &table, const std::string &dir);

std::string results_csv(const SweepTable &table);
std::string per_user_csv(const SweepTable &table);
std::string trace_csv(const std::vector<double> &trace);
std::string manifest_json(const SweepTable &table);

// 12 significant digits, '.' decimal separator
std::string format_number(double v);

// RFC-4180 field quoting
std::string csv_field(const std::string &s);

// Parses results.csv back (round-trip check)
std::vector<RunRecord> parse_results_csv(const std::string &text);

} // namespace manoma

#endif
