// SPDX-License-Identifier: Apache-2.0
//
// manoma: movable-antenna NOMA downlink optimization toolkit
// ------------------------------------------------------------------------
//
// manoma run   --config FILE [--schemes A,B] [--seed S] [--out DIR]
// manoma sweep --spec FILE [--out DIR] [--seed S] [--schemes A,B] [--realizations R] [--no-timing]
// manoma check [--config FILE] [--seed S]

#include "manoma/checks.hpp"
#include "manoma/harness.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>

using namespace manoma;

namespace
{

std::vector<Scheme> parse_scheme_list(const std::string &list)
{
    std::vector<Scheme> out;
    std::string item;
    std::istringstream in(list);
    while (std::getline(in, item, ','))
    {
        if (item.empty())
            continue;
        const auto s = parse_scheme(item);
        if (!s)
            throw std::invalid_argument("unknown scheme '" + item + "'");
        out.push_back(*s);
    }
    if (out.empty())
        throw std::invalid_argument("--schemes: empty list");
    return out;
}

void print_summary(const SweepTable &table)
{
    for (double v : table.spec.values)
        for (Scheme s : table.spec.schemes)
            std::printf("%-24s %-12s %-10s mean throughput %.6f bits/s/Hz\n", to_string(table.spec.param),
                        format_number(v).c_str(), to_string(s), table.mean_throughput(v, s));
    for (const auto &r : table.rows)
        if (r.failed)
            std::fprintf(stderr, "failed: value %s scheme %s realization %d: %s\n", format_number(r.value).c_str(),
                         to_string(r.scheme), r.realization, r.error.c_str());
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Movable-antenna NOMA downlink optimizer"};
    app.require_subcommand(1);

    std::string config_path, spec_path, out_dir, schemes;
    std::optional<std::uint64_t> seed;
    std::optional<int> realizations;
    bool no_timing = false;

    auto *run = app.add_subcommand("run", "Run schemes on one channel realization");
    run->add_option("--config", config_path, "Config file (key = value)");
    run->add_option("--schemes", schemes, "Comma-separated scheme ids (default: all)");
    run->add_option("--seed", seed, "Channel seed (overrides rng_seed)");
    run->add_option("--out", out_dir, "Directory for result files");

    auto *sweep = app.add_subcommand("sweep", "Run a Monte Carlo sweep");
    sweep->add_option("--spec", spec_path, "Sweep spec file")->required();
    sweep->add_option("--out", out_dir, "Output directory (overrides the spec)");
    sweep->add_option("--seed", seed, "Base seed (overrides rng_seed)");
    sweep->add_option("--schemes", schemes, "Comma-separated scheme ids (overrides the spec)");
    sweep->add_option("--realizations", realizations, "Realizations per value (overrides the spec)");
    sweep->add_flag("--no-timing", no_timing, "Write runtime_s = 0 for byte-reproducible results");

    auto *check = app.add_subcommand("check", "Run the invariant and bound battery");
    check->add_option("--config", config_path, "Config file (key = value)");
    check->add_option("--seed", seed, "Sampling seed");

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (run->parsed())
        {
            SweepSpec spec;
            spec.base = config_path.empty() ? parse_config("") : load_config(config_path);
            if (seed)
                spec.base.rng_seed = *seed;
            spec.realizations = 1;
            if (!schemes.empty())
                spec.schemes = parse_scheme_list(schemes);
            const SweepTable table = run_sweep(spec);
            for (const auto &r : table.rows)
            {
                if (r.failed)
                {
                    std::fprintf(stderr, "%s failed: %s\n", to_string(r.scheme), r.error.c_str());
                    continue;
                }
                std::printf("%-11s throughput %.6f bits/s/Hz  outer %d  runtime %.3f s  rates", to_string(r.scheme),
                            r.throughput, r.outer_iters, r.runtime_s);
                for (Eigen::Index k = 0; k < r.per_user_rates.size(); ++k)
                    std::printf(" %.4f", r.per_user_rates[k]);
                std::printf("\n");
            }
            if (!out_dir.empty())
                write_results(table, out_dir);
            return table.any_failed() ? 1 : 0;
        }
        if (sweep->parsed())
        {
            SweepSpec spec = load_sweep_spec(spec_path);
            if (seed)
                spec.base.rng_seed = *seed;
            if (!schemes.empty())
                spec.schemes = parse_scheme_list(schemes);
            if (realizations)
                spec.realizations = *realizations;
            if (!out_dir.empty())
                spec.output = out_dir;
            spec.record_timing = !no_timing;
            const SweepTable table = run_sweep(spec);
            write_results(table, spec.output);
            print_summary(table);
            return table.any_failed() ? 1 : 0;
        }
        if (check->parsed())
        {
            const SystemConfig cfg = config_path.empty() ? parse_config("") : load_config(config_path);
            CheckOptions opts;
            if (seed)
                opts.seed = *seed;
            bool ok = true;
            for (const auto &r : run_checks(cfg, opts))
            {
                std::printf("[%s] %s: %s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str());
                ok = ok && r.passed;
            }
            return ok ? 0 : 1;
        }
    }
    catch (const std::exception &e)
    {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
