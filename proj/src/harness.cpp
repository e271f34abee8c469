// SPDX-License-Identifier: Apache-2.0
//
// manoma: movable-antenna NOMA downlink optimization toolkit
// ------------------------------------------------------------------------

#include "manoma/harness.hpp"

#include "manoma/channel.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

namespace manoma
{

namespace
{

std::string trim(const std::string &s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool ends_with(const std::string &s, const std::string &suffix)
{
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

double parse_double(const std::string &raw, int line, const std::string &key)
{
    const std::string s = trim(raw);
    char *end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v))
        throw ConfigError(line, key + ": '" + s + "' is not a number");
    return v;
}

std::int64_t parse_integer(const std::string &raw, int line, const std::string &key)
{
    const double v = parse_double(raw, line, key);
    if (v != std::floor(v) || std::abs(v) > 9.0e15)
        throw ConfigError(line, key + ": '" + trim(raw) + "' is not an integer");
    return static_cast<std::int64_t>(v);
}

std::string read_file(const std::string &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const std::filesystem::path &path, const std::string &content)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    out << content;
    if (!out)
        throw std::runtime_error("write failed: " + path.string());
}

struct Entry
{
    int line;
    std::string key;
    std::string value;
};

std::vector<Entry> tokenize(const std::string &text)
{
    std::vector<Entry> out;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw))
    {
        ++line;
        const auto hash = raw.find('#');
        const std::string body = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (body.empty())
            continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw ConfigError(line, "expected key = value");
        Entry e{line, trim(body.substr(0, eq)), trim(body.substr(eq + 1))};
        if (e.key.empty())
            throw ConfigError(line, "missing key");
        if (e.value.empty())
            throw ConfigError(line, e.key + ": missing value");
        out.push_back(std::move(e));
    }
    return out;
}

// Region values may be given in wavelengths, so they are resolved after every key is read
struct PendingRegion
{
    bool set = false;
    bool in_wavelengths = false;
    double value = 0.0;
};

struct ConfigBuilder
{
    SystemConfig c;
    PendingRegion bs, user;
    bool reference_gain_set = false;
    std::map<std::string, int> seen;

    bool apply(const Entry &e)
    {
        if (seen.count(e.key))
            throw ConfigError(e.line, e.key + ": duplicate key (first on line " + std::to_string(seen[e.key]) + ")");

        auto as_int = [&] { return static_cast<int>(parse_integer(e.value, e.line, e.key)); };
        auto as_double = [&] { return parse_double(e.value, e.line, e.key); };
        auto as_power = [&] {
            if (ends_with(e.value, "dBm"))
                return dbm_to_watts(parse_double(e.value.substr(0, e.value.size() - 3), e.line, e.key));
            return as_double();
        };
        auto as_region = [&](PendingRegion &r) {
            r.set = true;
            r.in_wavelengths = ends_with(e.value, "lambda");
            r.value = parse_double(r.in_wavelengths ? e.value.substr(0, e.value.size() - 6) : e.value, e.line, e.key);
        };

        const std::string &k = e.key;
        if (k == "num_bs_antennas")
            c.num_bs_antennas = as_int();
        else if (k == "num_users")
            c.num_users = as_int();
        else if (k == "num_paths")
            c.num_paths = as_int();
        else if (k == "wavelength")
            c.wavelength = as_double();
        else if (k == "power_budget")
            c.power_budget = as_power();
        else if (k == "noise_power")
            c.noise_power = as_power();
        else if (k == "mrt_coefficient")
            c.mrt_coefficient = as_double();
        else if (k == "bs_region")
            as_region(bs);
        else if (k == "user_region")
            as_region(user);
        else if (k == "pathloss_exponent")
            c.pathloss_exponent = as_double();
        else if (k == "reference_gain")
        {
            c.reference_gain = as_double();
            reference_gain_set = true;
        }
        else if (k == "distance_min")
            c.distance_min = as_double();
        else if (k == "distance_max")
            c.distance_max = as_double();
        else if (k == "outer_iters")
            c.outer_iters = as_int();
        else if (k == "inner_iters_bf")
            c.inner_iters_bf = as_int();
        else if (k == "inner_iters_user")
            c.inner_iters_user = as_int();
        else if (k == "inner_iters_bs")
            c.inner_iters_bs = as_int();
        else if (k == "convergence_tol_outer")
            c.convergence_tol_outer = as_double();
        else if (k == "convergence_tol_inner")
            c.convergence_tol_inner = as_double();
        else if (k == "rng_seed")
        {
            const auto v = parse_integer(e.value, e.line, k);
            if (v < 0)
                throw ConfigError(e.line, "rng_seed: must be >= 0");
            c.rng_seed = static_cast<std::uint64_t>(v);
        }
        else
            return false;
        seen[k] = e.line;
        return true;
    }

    SystemConfig finish()
    {
        const double lambda = c.wavelength;
        c.bs_region = bs.set ? (bs.in_wavelengths ? bs.value * lambda : bs.value) : 20.0 * lambda;
        c.user_region = user.set ? (user.in_wavelengths ? user.value * lambda : user.value) : 4.0 * lambda;
        if (!reference_gain_set)
            c.reference_gain = free_space_reference_gain(lambda);
        try
        {
            c.validate();
        }
        catch (const std::invalid_argument &err)
        {
            const std::string msg = err.what();
            const std::string field = msg.substr(0, msg.find(':'));
            throw ConfigError(seen.count(field) ? seen[field] : 0, msg);
        }
        return c;
    }
};

std::vector<std::string> split_list(const std::string &s)
{
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, ','))
    {
        item = trim(item);
        if (!item.empty())
            out.push_back(item);
    }
    return out;
}

int scheme_rank(Scheme s)
{
    const auto all = all_schemes();
    return static_cast<int>(std::find(all.begin(), all.end(), s) - all.begin());
}

bool is_noma(Scheme s) { return s == Scheme::noma_ma || s == Scheme::noma_ma_ue || s == Scheme::noma_fpa; }

std::string trace_name(const RunRecord &r)
{
    std::string v = format_number(r.value);
    std::replace(v.begin(), v.end(), '.', 'p');
    std::replace(v.begin(), v.end(), '-', 'm');
    return std::string(to_string(r.param)) + "_" + v + "_" + to_string(r.scheme) + "_r" +
           std::to_string(r.realization) + ".csv";
}

} // namespace

ConfigError::ConfigError(int line, const std::string &msg)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg), line_(line)
{
}

SystemConfig parse_config(const std::string &text)
{
    ConfigBuilder b;
    for (const Entry &e : tokenize(text))
        if (!b.apply(e))
            throw ConfigError(e.line, "unknown key '" + e.key + "'");
    return b.finish();
}

SystemConfig load_config(const std::string &path) { return parse_config(read_file(path)); }

std::string format_config(const SystemConfig &c)
{
    std::ostringstream os;
    os.precision(17);
    os << "num_bs_antennas = " << c.num_bs_antennas << "\n"
       << "num_users = " << c.num_users << "\n"
       << "num_paths = " << c.num_paths << "\n"
       << "wavelength = " << c.wavelength << "\n"
       << "power_budget = " << c.power_budget << "\n"
       << "noise_power = " << c.noise_power << "\n"
       << "mrt_coefficient = " << c.mrt_coefficient << "\n"
       << "bs_region = " << c.bs_region << "\n"
       << "user_region = " << c.user_region << "\n"
       << "pathloss_exponent = " << c.pathloss_exponent << "\n"
       << "reference_gain = " << c.reference_gain << "\n"
       << "distance_min = " << c.distance_min << "\n"
       << "distance_max = " << c.distance_max << "\n"
       << "outer_iters = " << c.outer_iters << "\n"
       << "inner_iters_bf = " << c.inner_iters_bf << "\n"
       << "inner_iters_user = " << c.inner_iters_user << "\n"
       << "inner_iters_bs = " << c.inner_iters_bs << "\n"
       << "convergence_tol_outer = " << c.convergence_tol_outer << "\n"
       << "convergence_tol_inner = " << c.convergence_tol_inner << "\n"
       << "rng_seed = " << c.rng_seed << "\n";
    return os.str();
}

// ------------------------------------------------------------------ sweeps

const char *to_string(SweepParam p)
{
    switch (p)
    {
    case SweepParam::none:
        return "none";
    case SweepParam::power_budget_dbm:
        return "power_budget_dBm";
    case SweepParam::num_bs_antennas:
        return "num_bs_antennas";
    case SweepParam::num_users:
        return "num_users";
    case SweepParam::num_paths:
        return "num_paths";
    case SweepParam::bs_region_wavelengths:
        return "bs_region_wavelengths";
    case SweepParam::user_region_wavelengths:
        return "user_region_wavelengths";
    case SweepParam::mrt_coefficient:
        return "mrt_coefficient";
    }
    return "?";
}

SweepParam parse_sweep_param(const std::string &name)
{
    for (SweepParam p : {SweepParam::none, SweepParam::power_budget_dbm, SweepParam::num_bs_antennas,
                         SweepParam::num_users, SweepParam::num_paths, SweepParam::bs_region_wavelengths,
                         SweepParam::user_region_wavelengths, SweepParam::mrt_coefficient})
        if (name == to_string(p))
            return p;
    throw std::invalid_argument("unknown sweep parameter '" + name + "'");
}

SystemConfig apply_sweep_value(const SystemConfig &base, SweepParam param, double value)
{
    SystemConfig c = base;
    auto count = [&](const char *what) {
        if (value != std::floor(value) || value < 1.0 || value > 1e6)
            throw std::invalid_argument(std::string(what) + ": sweep value must be a positive integer");
        return static_cast<int>(value);
    };
    switch (param)
    {
    case SweepParam::none:
        break;
    case SweepParam::power_budget_dbm:
        c.power_budget = dbm_to_watts(value);
        break;
    case SweepParam::num_bs_antennas:
        c.num_bs_antennas = count("num_bs_antennas");
        break;
    case SweepParam::num_users:
        c.num_users = count("num_users");
        break;
    case SweepParam::num_paths:
        c.num_paths = count("num_paths");
        break;
    case SweepParam::bs_region_wavelengths:
        c.bs_region = value * c.wavelength;
        break;
    case SweepParam::user_region_wavelengths:
        c.user_region = value * c.wavelength;
        break;
    case SweepParam::mrt_coefficient:
        c.mrt_coefficient = value;
        break;
    }
    c.validate();
    return c;
}

void SweepSpec::validate() const
{
    if (values.empty())
        throw std::invalid_argument("values: must not be empty");
    if (schemes.empty())
        throw std::invalid_argument("schemes: must not be empty");
    if (realizations < 1)
        throw std::invalid_argument("realizations: must be >= 1");
    if (workers < 0)
        throw std::invalid_argument("workers: must be >= 0");
    for (double v : values)
        apply_sweep_value(base, param, v);
}

SweepSpec parse_sweep_spec(const std::string &text)
{
    SweepSpec spec;
    ConfigBuilder b;
    for (const Entry &e : tokenize(text))
    {
        if (e.key == "sweep_param")
        {
            try
            {
                spec.param = parse_sweep_param(e.value);
            }
            catch (const std::invalid_argument &err)
            {
                throw ConfigError(e.line, err.what());
            }
        }
        else if (e.key == "values")
        {
            spec.values.clear();
            for (const auto &item : split_list(e.value))
                spec.values.push_back(parse_double(item, e.line, "values"));
            if (spec.values.empty())
                throw ConfigError(e.line, "values: must not be empty");
        }
        else if (e.key == "schemes")
        {
            spec.schemes.clear();
            for (const auto &item : split_list(e.value))
            {
                const auto s = parse_scheme(item);
                if (!s)
                    throw ConfigError(e.line, "schemes: unknown scheme '" + item + "'");
                spec.schemes.push_back(*s);
            }
        }
        else if (e.key == "realizations")
            spec.realizations = static_cast<int>(parse_integer(e.value, e.line, e.key));
        else if (e.key == "workers")
            spec.workers = static_cast<int>(parse_integer(e.value, e.line, e.key));
        else if (e.key == "output")
            spec.output = e.value;
        else if (!b.apply(e))
            throw ConfigError(e.line, "unknown key '" + e.key + "'");
    }
    spec.base = b.finish();
    try
    {
        spec.validate();
    }
    catch (const std::invalid_argument &err)
    {
        throw ConfigError(0, err.what());
    }
    return spec;
}

SweepSpec load_sweep_spec(const std::string &path) { return parse_sweep_spec(read_file(path)); }

bool SweepTable::any_failed() const
{
    return std::any_of(rows.begin(), rows.end(), [](const RunRecord &r) { return r.failed; });
}

double SweepTable::mean_throughput(double value, Scheme scheme) const
{
    double sum = 0.0;
    int n = 0;
    for (const auto &r : rows)
        if (!r.failed && r.value == value && r.scheme == scheme)
        {
            sum += r.throughput;
            ++n;
        }
    return n ? sum / n : std::nan("");
}

int resolve_workers(int requested)
{
    if (requested > 0)
        return requested;
    if (const char *env = std::getenv(kWorkersEnv))
    {
        char *end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0)
            return static_cast<int>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

SweepTable run_sweep(const SweepSpec &spec)
{
    spec.validate();
    SweepTable table;
    table.spec = spec;

    // One work item per (value, realization); every scheme in a cell sees the same channels
    struct Cell
    {
        size_t value_index;
        int realization;
    };
    std::vector<Cell> cells;
    for (size_t v = 0; v < spec.values.size(); ++v)
        for (int r = 0; r < spec.realizations; ++r)
            cells.push_back({v, r});

    const size_t S = spec.schemes.size();
    std::vector<RunRecord> rows(cells.size() * S);
    std::atomic<size_t> next{0};

    auto work = [&] {
        for (size_t i = next++; i < cells.size(); i = next++)
        {
            const Cell &cell = cells[i];
            const double value = spec.values[cell.value_index];
            SystemConfig cfg = apply_sweep_value(spec.base, spec.param, value);
            cfg.rng_seed = spec.base.rng_seed + static_cast<std::uint64_t>(cell.realization);
            const auto users = sample_geometry(cfg);
            const std::uint64_t digest = geometry_digest(users);
            for (size_t s = 0; s < S; ++s)
            {
                RunRecord &row = rows[i * S + s];
                row.param = spec.param;
                row.value = value;
                row.scheme = spec.schemes[s];
                row.realization = cell.realization;
                row.seed = cfg.rng_seed;
                try
                {
                    // independent draw per scheme; the digest proves the channels match
                    const auto own = sample_geometry(cfg);
                    row.digest = geometry_digest(own);
                    if (row.digest != digest)
                        throw std::logic_error("geometry digest mismatch within a sweep cell");
                    const SchemeResult res = run_scheme(row.scheme, cfg, own);
                    row.throughput = res.throughput;
                    row.runtime_s = spec.record_timing ? res.wall_time_s : 0.0;
                    row.outer_iters = res.outer_iters;
                    row.per_user_rates = res.per_user_rates;
                    row.trace = res.trace;
                }
                catch (const std::exception &err)
                {
                    row.failed = true;
                    row.error = err.what();
                    row.throughput = std::nan("");
                    row.runtime_s = 0.0;
                }
            }
        }
    };

    table.workers_used = std::min<int>(resolve_workers(spec.workers), static_cast<int>(cells.size()));
    if (table.workers_used <= 1)
        work();
    else
    {
        std::vector<std::thread> pool;
        for (int w = 0; w < table.workers_used; ++w)
            pool.emplace_back(work);
        for (auto &t : pool)
            t.join();
    }

    std::stable_sort(rows.begin(), rows.end(), [](const RunRecord &a, const RunRecord &b) {
        if (a.value != b.value)
            return a.value < b.value;
        if (a.scheme != b.scheme)
            return scheme_rank(a.scheme) < scheme_rank(b.scheme);
        return a.realization < b.realization;
    });
    table.rows = std::move(rows);
    return table;
}

// ------------------------------------------------------------------ output

std::string format_number(double v)
{
    if (std::isnan(v))
        return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string csv_field(const std::string &s)
{
    if (s.find_first_of(",\"\r\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char ch : s)
    {
        if (ch == '"')
            out += '"';
        out += ch;
    }
    return out + "\"";
}

std::string results_csv(const SweepTable &table)
{
    std::string out = "sweep_param,value,scheme,realization,throughput_bpshz,runtime_s,outer_iters\r\n";
    for (const auto &r : table.rows)
        out += csv_field(to_string(r.param)) + "," + format_number(r.value) + "," + csv_field(to_string(r.scheme)) +
               "," + std::to_string(r.realization) + "," + format_number(r.throughput) + "," +
               format_number(r.runtime_s) + "," + std::to_string(r.outer_iters) + "\r\n";
    return out;
}

std::string per_user_csv(const SweepTable &table)
{
    std::string out = "sweep_param,value,scheme,realization,user,rate_bpshz\r\n";
    for (const auto &r : table.rows)
        for (Eigen::Index k = 0; k < r.per_user_rates.size(); ++k)
            out += csv_field(to_string(r.param)) + "," + format_number(r.value) + "," +
                   csv_field(to_string(r.scheme)) + "," + std::to_string(r.realization) + "," + std::to_string(k) +
                   "," + format_number(r.per_user_rates[k]) + "\r\n";
    return out;
}

std::string trace_csv(const std::vector<double> &trace)
{
    std::string out = "outer_iter,objective_bpshz\r\n";
    for (size_t i = 0; i < trace.size(); ++i)
        out += std::to_string(i) + "," + format_number(trace[i]) + "\r\n";
    return out;
}

std::string manifest_json(const SweepTable &table)
{
    using nlohmann::ordered_json;
    const SweepSpec &s = table.spec;
    ordered_json j;
    j["tool"] = kToolName;
    j["version"] = kToolVersion;
    j["sweep_param"] = to_string(s.param);
    j["values"] = s.values;
    std::vector<std::string> schemes;
    for (Scheme sc : s.schemes)
        schemes.push_back(to_string(sc));
    j["schemes"] = schemes;
    j["realizations"] = s.realizations;
    j["base_seed"] = s.base.rng_seed;
    j["seed_rule"] = "base_seed + realization";
    j["runtime_recorded"] = s.record_timing;

    const SystemConfig &c = s.base;
    ordered_json cfg;
    cfg["num_bs_antennas"] = c.num_bs_antennas;
    cfg["num_users"] = c.num_users;
    cfg["num_paths"] = c.num_paths;
    cfg["wavelength"] = c.wavelength;
    cfg["power_budget"] = c.power_budget;
    cfg["power_budget_dBm"] = watts_to_dbm(c.power_budget);
    cfg["noise_power"] = c.noise_power;
    cfg["noise_power_dBm"] = watts_to_dbm(c.noise_power);
    cfg["mrt_coefficient"] = c.mrt_coefficient;
    cfg["bs_region"] = c.bs_region;
    cfg["user_region"] = c.user_region;
    cfg["pathloss_exponent"] = c.pathloss_exponent;
    cfg["reference_gain"] = c.reference_gain;
    cfg["distance_min"] = c.distance_min;
    cfg["distance_max"] = c.distance_max;
    cfg["outer_iters"] = c.outer_iters;
    cfg["inner_iters_bf"] = c.inner_iters_bf;
    cfg["inner_iters_user"] = c.inner_iters_user;
    cfg["inner_iters_bs"] = c.inner_iters_bs;
    cfg["convergence_tol_outer"] = c.convergence_tol_outer;
    cfg["convergence_tol_inner"] = c.convergence_tol_inner;
    cfg["rng_seed"] = c.rng_seed;
    j["base_config"] = cfg;

    // One digest per (value, realization): every scheme in the cell matched it
    ordered_json digests = ordered_json::array();
    ordered_json failures = ordered_json::array();
    std::map<std::pair<double, int>, std::uint64_t> seen;
    for (const auto &r : table.rows)
    {
        if (r.failed)
            failures.push_back({{"value", r.value},
                                {"scheme", to_string(r.scheme)},
                                {"realization", r.realization},
                                {"error", r.error}});
        else if (!seen.count({r.value, r.realization}))
        {
            seen[{r.value, r.realization}] = r.digest;
            char hex[32];
            std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(r.digest));
            digests.push_back({{"value", r.value}, {"realization", r.realization}, {"seed", r.seed}, {"digest", hex}});
        }
    }
    j["geometry_digests"] = digests;
    j["failures"] = failures;
    return j.dump(2) + "\n";
}

void write_results(const SweepTable &table, const std::string &dir)
{
    namespace fs = std::filesystem;
    const fs::path root(dir);
    fs::create_directories(root / "traces");
    write_file(root / "results.csv", results_csv(table));
    write_file(root / "per_user_rates.csv", per_user_csv(table));
    write_file(root / "manifest.json", manifest_json(table));
    for (const auto &r : table.rows)
        if (is_noma(r.scheme) && !r.failed)
            write_file(root / "traces" / trace_name(r), trace_csv(r.trace));
}

std::vector<RunRecord> parse_results_csv(const std::string &text)
{
    std::vector<RunRecord> out;
    std::istringstream in(text);
    std::string line;
    bool header = true;
    while (std::getline(in, line))
    {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (header)
        {
            header = false;
            continue;
        }
        if (line.empty())
            continue;
        // Fields written by this tool never need quoting, but quoted fields are accepted
        std::vector<std::string> f;
        std::string cur;
        bool quoted = false;
        for (size_t i = 0; i < line.size(); ++i)
        {
            const char ch = line[i];
            if (quoted)
            {
                if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"')
                    cur += '"', ++i;
                else if (ch == '"')
                    quoted = false;
                else
                    cur += ch;
            }
            else if (ch == '"')
                quoted = true;
            else if (ch == ',')
                f.push_back(cur), cur.clear();
            else
                cur += ch;
        }
        f.push_back(cur);
        if (f.size() != 7)
            throw std::runtime_error("results csv: expected 7 fields, got " + std::to_string(f.size()));
        RunRecord r;
        r.param = parse_sweep_param(f[0]);
        r.value = std::strtod(f[1].c_str(), nullptr);
        const auto s = parse_scheme(f[2]);
        if (!s)
            throw std::runtime_error("results csv: unknown scheme " + f[2]);
        r.scheme = *s;
        r.realization = std::stoi(f[3]);
        r.throughput = std::strtod(f[4].c_str(), nullptr);
        r.runtime_s = std::strtod(f[5].c_str(), nullptr);
        r.outer_iters = std::stoi(f[6]);
        r.failed = std::isnan(r.throughput);
        out.push_back(r);
    }
    return out;
}

} // namespace manoma
