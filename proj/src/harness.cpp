#include "rps/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <sstream>
#include <thread>

#include "rps/heat_kernel.hpp"

namespace rps {

namespace {

// ---------------------------------------------------------------------------
// Enum <-> string tables

std::string to_string(ExperimentKind k) {
    switch (k) {
    case ExperimentKind::VmfSphere:   return "vmf_sphere";
    case ExperimentKind::SpdQuartic:  return "spd_quartic";
    case ExperimentKind::CircleKl:    return "circle_kl";
    case ExperimentKind::KernelTable: return "kernel_table";
    }
    return "?";
}

std::string to_string(Algorithm a) {
    return a == Algorithm::Proximal ? "proximal" : "lmc";
}

std::string to_string(MbiOracle o) {
    switch (o) {
    case MbiOracle::SeriesRejection:    return "series";
    case MbiOracle::GeodesicRandomWalk: return "grw";
    case MbiOracle::RGaussianVaradhan:  return "rgaussian";
    }
    return "?";
}

std::string to_string(RhkOracle o) {
    return o == RhkOracle::TruncatedKernelRejection ? "truncated" : "varadhan";
}

std::string to_string(ProposalCenter c) {
    return c == ProposalCenter::Mode ? "mode" : "y";
}

std::string to_string(InitRule r) {
    switch (r) {
    case InitRule::Mode:    return "mode";
    case InitRule::Oracle:  return "oracle";
    case InitRule::Uniform: return "uniform";
    }
    return "?";
}

std::string to_string(LmcSchedule s) {
    return s == LmcSchedule::Constant ? "constant" : "decreasing";
}

template <typename Enum>
Enum enum_from(const std::string& key, const std::string& value,
               std::initializer_list<std::pair<const char*, Enum>> table) {
    for (const auto& [name, v] : table)
        if (value == name)
            return v;
    std::string options;
    for (const auto& [name, v] : table) {
        if (!options.empty())
            options += ", ";
        options += name;
    }
    throw ConfigError(key, "unknown value '" + value + "' (expected one of: " + options + ")");
}

// ---------------------------------------------------------------------------
// Scalar formatting / parsing

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos)
        return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& value) {
    const std::string v = trim(value);
    if (v.empty())
        throw ConfigError(key, "empty value, expected a number");
    char* end = nullptr;
    const double out = std::strtod(v.c_str(), &end);
    if (end != v.c_str() + v.size())
        throw ConfigError(key, "could not parse '" + v + "' as a number");
    return out;
}

long long parse_int(const std::string& key, const std::string& value) {
    const std::string v = trim(value);
    if (v.empty())
        throw ConfigError(key, "empty value, expected an integer");
    char* end = nullptr;
    const long long out = std::strtoll(v.c_str(), &end, 10);
    if (end != v.c_str() + v.size())
        throw ConfigError(key, "could not parse '" + v + "' as an integer");
    return out;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    const std::string v = trim(value);
    if (v.empty())
        throw ConfigError(key, "empty value, expected an unsigned integer");
    char* end = nullptr;
    const unsigned long long out = std::strtoull(v.c_str(), &end, 10);
    if (end != v.c_str() + v.size())
        throw ConfigError(key, "could not parse '" + v + "' as an unsigned integer");
    return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
    const std::string v = trim(value);
    if (v == "true")
        return true;
    if (v == "false")
        return false;
    throw ConfigError(key, "expected true or false, got '" + v + "'");
}

std::vector<std::string> split_commas(const std::string& value) {
    std::vector<std::string> parts;
    std::string cur;
    for (char ch : value) {
        if (ch == ',') {
            parts.push_back(trim(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    const std::string last = trim(cur);
    if (!last.empty() || !parts.empty())
        parts.push_back(last);
    return parts;
}

std::vector<double> parse_double_list(const std::string& key, const std::string& value) {
    std::vector<double> out;
    for (const std::string& part : split_commas(value))
        out.push_back(parse_double(key, part));
    return out;
}

std::vector<int> parse_int_list(const std::string& key, const std::string& value) {
    std::vector<int> out;
    for (const std::string& part : split_commas(value))
        out.push_back(static_cast<int>(parse_int(key, part)));
    return out;
}

std::string join_doubles(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i)
            out += ",";
        out += fmt_double(v[i]);
    }
    return out;
}

std::string join_ints(const std::vector<int>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i)
            out += ",";
        out += std::to_string(v[i]);
    }
    return out;
}

} // namespace

// ---------------------------------------------------------------------------
// Presets

ExperimentConfig ExperimentConfig::preset_vmf_s2() {
    ExperimentConfig cfg; // field initializers are the S^2 experiment
    cfg.out = "vmf_s2.csv";
    return cfg;
}

ExperimentConfig ExperimentConfig::preset_vmf_s5() {
    ExperimentConfig cfg;
    cfg.d = 5;
    cfg.mu = {5.0, 0.1, 2.0, 1.0, 1.0, 1.0};
    cfg.chains = 1000;
    cfg.out = "vmf_s5.csv";
    return cfg;
}

ExperimentConfig ExperimentConfig::preset_spd() {
    ExperimentConfig cfg;
    cfg.experiment = ExperimentKind::SpdQuartic;
    cfg.m = 3;
    cfg.sigma = 0.03;
    cfg.center = ProposalCenter::Mode;
    cfg.init = InitRule::Mode;
    cfg.chains = 500;
    cfg.iters = 40;
    cfg.out = "spd.csv";
    return cfg;
}

ExperimentConfig ExperimentConfig::preset_circle() {
    ExperimentConfig cfg;
    cfg.experiment = ExperimentKind::CircleKl;
    cfg.kappa = 2.0;
    cfg.eta = 0.2;
    cfg.mbi_oracle = MbiOracle::SeriesRejection;
    cfg.rhk_oracle = RhkOracle::TruncatedKernelRejection;
    cfg.center = ProposalCenter::Mode;
    cfg.init = InitRule::Uniform;
    cfg.chains = 5000;
    cfg.iters = 10;
    cfg.out = "circle_kl.csv";
    return cfg;
}

ExperimentConfig ExperimentConfig::preset_kernel_table() {
    ExperimentConfig cfg;
    cfg.experiment = ExperimentKind::KernelTable;
    cfg.out = "kernel_table.csv";
    return cfg;
}

// ---------------------------------------------------------------------------
// Config parse / serialize / validate

std::string serialize_config(const ExperimentConfig& cfg) {
    std::ostringstream os;
    os << "experiment = " << to_string(cfg.experiment) << "\n";
    os << "algorithm = " << to_string(cfg.algorithm) << "\n";
    os << "d = " << cfg.d << "\n";
    os << "m = " << cfg.m << "\n";
    os << "kappa = " << fmt_double(cfg.kappa) << "\n";
    os << "mu = " << join_doubles(cfg.mu) << "\n";
    os << "sigma = " << fmt_double(cfg.sigma) << "\n";
    os << "eta = " << fmt_double(cfg.eta) << "\n";
    os << "epsilon = " << fmt_double(cfg.epsilon) << "\n";
    os << "mbi_oracle = " << to_string(cfg.mbi_oracle) << "\n";
    os << "rhk_oracle = " << to_string(cfg.rhk_oracle) << "\n";
    os << "center = " << to_string(cfg.center) << "\n";
    os << "proposal_t = " << fmt_double(cfg.proposal_t) << "\n";
    os << "level = " << cfg.level << "\n";
    os << "zeta = " << fmt_double(cfg.zeta) << "\n";
    os << "grw_substeps = " << cfg.grw_substeps << "\n";
    os << "clip = " << (cfg.clip ? "true" : "false") << "\n";
    os << "rejection_cap = " << cfg.rejection_cap << "\n";
    os << "init = " << to_string(cfg.init) << "\n";
    os << "init_radius = " << fmt_double(cfg.init_radius) << "\n";
    os << "lmc_step = " << fmt_double(cfg.lmc_step) << "\n";
    os << "lmc_schedule = " << to_string(cfg.lmc_schedule) << "\n";
    os << "divergence_threshold = " << fmt_double(cfg.divergence_threshold) << "\n";
    os << "chains = " << cfg.chains << "\n";
    os << "iters = " << cfg.iters << "\n";
    os << "bins = " << cfg.bins << "\n";
    os << "t = " << fmt_double(cfg.t) << "\n";
    os << "levels = " << join_ints(cfg.levels) << "\n";
    os << "grid_points = " << cfg.grid_points << "\n";
    os << "seed = " << cfg.seed << "\n";
    os << "threads = " << cfg.threads << "\n";
    os << "out = " << cfg.out << "\n";
    return os.str();
}

ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty())
            continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno),
                              "expected 'key = value', got '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));

        if (key == "experiment") {
            cfg.experiment = enum_from<ExperimentKind>(
                key, value,
                {{"vmf_sphere", ExperimentKind::VmfSphere},
                 {"spd_quartic", ExperimentKind::SpdQuartic},
                 {"circle_kl", ExperimentKind::CircleKl},
                 {"kernel_table", ExperimentKind::KernelTable}});
        } else if (key == "algorithm") {
            cfg.algorithm = enum_from<Algorithm>(
                key, value, {{"proximal", Algorithm::Proximal}, {"lmc", Algorithm::Lmc}});
        } else if (key == "d") {
            cfg.d = static_cast<int>(parse_int(key, value));
        } else if (key == "m") {
            cfg.m = static_cast<int>(parse_int(key, value));
        } else if (key == "kappa") {
            cfg.kappa = parse_double(key, value);
        } else if (key == "mu") {
            cfg.mu = parse_double_list(key, value);
        } else if (key == "sigma") {
            cfg.sigma = parse_double(key, value);
        } else if (key == "eta") {
            cfg.eta = parse_double(key, value);
        } else if (key == "epsilon") {
            cfg.epsilon = parse_double(key, value);
        } else if (key == "mbi_oracle") {
            cfg.mbi_oracle = enum_from<MbiOracle>(
                key, value,
                {{"series", MbiOracle::SeriesRejection},
                 {"grw", MbiOracle::GeodesicRandomWalk},
                 {"rgaussian", MbiOracle::RGaussianVaradhan}});
        } else if (key == "rhk_oracle") {
            cfg.rhk_oracle = enum_from<RhkOracle>(
                key, value,
                {{"truncated", RhkOracle::TruncatedKernelRejection},
                 {"varadhan", RhkOracle::VaradhanRejection}});
        } else if (key == "center") {
            cfg.center = enum_from<ProposalCenter>(
                key, value, {{"mode", ProposalCenter::Mode}, {"y", ProposalCenter::Y}});
        } else if (key == "proposal_t") {
            cfg.proposal_t = parse_double(key, value);
        } else if (key == "level") {
            cfg.level = static_cast<int>(parse_int(key, value));
        } else if (key == "zeta") {
            cfg.zeta = parse_double(key, value);
        } else if (key == "grw_substeps") {
            cfg.grw_substeps = static_cast<int>(parse_int(key, value));
        } else if (key == "clip") {
            cfg.clip = parse_bool(key, value);
        } else if (key == "rejection_cap") {
            cfg.rejection_cap = parse_int(key, value);
        } else if (key == "init") {
            cfg.init = enum_from<InitRule>(key, value,
                                           {{"mode", InitRule::Mode},
                                            {"oracle", InitRule::Oracle},
                                            {"uniform", InitRule::Uniform}});
        } else if (key == "init_radius") {
            cfg.init_radius = parse_double(key, value);
        } else if (key == "lmc_step") {
            cfg.lmc_step = parse_double(key, value);
        } else if (key == "lmc_schedule") {
            cfg.lmc_schedule = enum_from<LmcSchedule>(
                key, value,
                {{"constant", LmcSchedule::Constant}, {"decreasing", LmcSchedule::Decreasing}});
        } else if (key == "divergence_threshold") {
            cfg.divergence_threshold = parse_double(key, value);
        } else if (key == "chains") {
            cfg.chains = static_cast<int>(parse_int(key, value));
        } else if (key == "iters") {
            cfg.iters = static_cast<int>(parse_int(key, value));
        } else if (key == "bins") {
            cfg.bins = static_cast<int>(parse_int(key, value));
        } else if (key == "t") {
            cfg.t = parse_double(key, value);
        } else if (key == "levels") {
            cfg.levels = parse_int_list(key, value);
        } else if (key == "grid_points") {
            cfg.grid_points = static_cast<int>(parse_int(key, value));
        } else if (key == "seed") {
            cfg.seed = parse_u64(key, value);
        } else if (key == "threads") {
            cfg.threads = static_cast<int>(parse_int(key, value));
        } else if (key == "out") {
            cfg.out = value;
        } else {
            throw ConfigError(key, "unknown key");
        }
    }
    return cfg;
}

void validate_config(const ExperimentConfig& cfg) {
    if (cfg.chains < 1)
        throw ConfigError("chains", "must be >= 1");
    if (cfg.iters < 1)
        throw ConfigError("iters", "must be >= 1");
    if (!(cfg.epsilon > 0.0 && cfg.epsilon < 1.0))
        throw ConfigError("epsilon", "must lie in (0, 1)");
    if (cfg.eta < 0.0)
        throw ConfigError("eta", "must be >= 0 (0 = automatic)");
    if (cfg.proposal_t < 0.0)
        throw ConfigError("proposal_t", "must be >= 0 (0 = automatic)");
    if (cfg.threads < 0)
        throw ConfigError("threads", "must be >= 0 (0 = hardware concurrency)");
    if (cfg.rejection_cap < 1)
        throw ConfigError("rejection_cap", "must be >= 1");
    if (cfg.grw_substeps < 1)
        throw ConfigError("grw_substeps", "must be >= 1");
    if (!(cfg.zeta > 0.0))
        throw ConfigError("zeta", "must be > 0");
    if (cfg.out.empty())
        throw ConfigError("out", "must not be empty");
    if (cfg.init_radius < 0.0)
        throw ConfigError("init_radius", "must be >= 0 (0 = start exactly at the init rule)");
    if (cfg.init_radius > 0.0 && cfg.init != InitRule::Mode)
        throw ConfigError("init_radius", "only combines with init = mode");

    switch (cfg.experiment) {
    case ExperimentKind::VmfSphere: {
        if (cfg.d < 2)
            throw ConfigError("d", "vmf_sphere needs d >= 2");
        if (static_cast<int>(cfg.mu.size()) != cfg.d + 1)
            throw ConfigError("mu", "needs exactly d+1 = " + std::to_string(cfg.d + 1) +
                                        " components, got " + std::to_string(cfg.mu.size()));
        double norm2 = 0.0;
        for (double v : cfg.mu)
            norm2 += v * v;
        if (!(norm2 > 0.0))
            throw ConfigError("mu", "must be nonzero");
        if (!(cfg.kappa > 0.0))
            throw ConfigError("kappa", "vmf_sphere needs kappa > 0");
        break;
    }
    case ExperimentKind::SpdQuartic: {
        if (cfg.m < 2)
            throw ConfigError("m", "spd_quartic needs m >= 2");
        if (!(cfg.sigma > 0.0))
            throw ConfigError("sigma", "must be > 0");
        if (cfg.init == InitRule::Oracle)
            throw ConfigError("init", "no exact oracle sampler on the SPD manifold");
        if (cfg.init == InitRule::Uniform)
            throw ConfigError("init", "no uniform distribution on the (noncompact) SPD manifold");
        if (cfg.mbi_oracle == MbiOracle::SeriesRejection ||
            cfg.rhk_oracle == RhkOracle::TruncatedKernelRejection)
            throw ConfigError("mbi_oracle", "no heat-kernel series on the SPD manifold");
        if (cfg.algorithm == Algorithm::Proximal && cfg.center == ProposalCenter::Y &&
            cfg.eta == 0.0)
            throw ConfigError("center", "spd_quartic has no Lipschitz constant for the "
                                        "y-centered step rule; set eta explicitly or center = mode");
        break;
    }
    case ExperimentKind::CircleKl: {
        if (cfg.bins < 2)
            throw ConfigError("bins", "must be >= 2");
        if (cfg.init == InitRule::Oracle)
            throw ConfigError("init", "the oracle init rule is specific to vmf_sphere");
        if (cfg.center == ProposalCenter::Y && cfg.algorithm == Algorithm::Proximal &&
            cfg.rhk_oracle == RhkOracle::VaradhanRejection)
            throw ConfigError("center", "the y-centered step rule needs dimension >= 2; "
                                        "use center = mode on the circle");
        if (cfg.eta == 0.0 && cfg.algorithm == Algorithm::Proximal)
            throw ConfigError("eta", "circle_kl needs an explicit eta (no theory default at d=1)");
        break;
    }
    case ExperimentKind::KernelTable: {
        if (cfg.d < 1)
            throw ConfigError("d", "kernel_table needs d >= 1 (1 = circle)");
        if (!(cfg.t > 0.0))
            throw ConfigError("t", "must be > 0");
        if (cfg.levels.empty())
            throw ConfigError("levels", "must not be empty");
        for (int l : cfg.levels)
            if (l < 0)
                throw ConfigError("levels", "levels must be >= 0");
        if (cfg.grid_points < 2)
            throw ConfigError("grid_points", "must be >= 2");
        break;
    }
    }

    if (cfg.algorithm == Algorithm::Lmc) {
        if (!(cfg.lmc_step > 0.0))
            throw ConfigError("lmc_step", "must be > 0");
        if (!(cfg.divergence_threshold > 0.0))
            throw ConfigError("divergence_threshold", "must be > 0");
    }
}

// ---------------------------------------------------------------------------
// Experiment assembly

TargetSpec experiment_target(const ExperimentConfig& cfg) {
    switch (cfg.experiment) {
    case ExperimentKind::VmfSphere: {
        Eigen::VectorXd mu(cfg.mu.size());
        for (std::size_t i = 0; i < cfg.mu.size(); ++i)
            mu[static_cast<int>(i)] = cfg.mu[i];
        return TargetSpec::vmf(mu, cfg.kappa);
    }
    case ExperimentKind::SpdQuartic:
        return TargetSpec::spd_quartic(cfg.m, cfg.sigma);
    case ExperimentKind::CircleKl:
        return TargetSpec::circle_cosine(cfg.kappa);
    case ExperimentKind::KernelTable:
        break;
    }
    throw std::invalid_argument("experiment_target: kernel_table has no sampling target");
}

Point experiment_reference(const ExperimentConfig& cfg) {
    switch (cfg.experiment) {
    case ExperimentKind::VmfSphere: {
        Eigen::VectorXd mu(cfg.mu.size());
        for (std::size_t i = 0; i < cfg.mu.size(); ++i)
            mu[static_cast<int>(i)] = cfg.mu[i];
        return Point::sphere(mu / mu.norm());
    }
    case ExperimentKind::SpdQuartic:
        return Point::spd(Eigen::MatrixXd::Identity(cfg.m, cfg.m));
    case ExperimentKind::CircleKl:
        return Point::circle(0.0);
    case ExperimentKind::KernelTable:
        break;
    }
    throw std::invalid_argument("experiment_reference: kernel_table has no reference point");
}

namespace {

double resolved_eta(const ExperimentConfig& cfg) {
    if (cfg.eta > 0.0)
        return cfg.eta;
    switch (cfg.experiment) {
    case ExperimentKind::VmfSphere: {
        double norm2 = 0.0;
        for (double v : cfg.mu)
            norm2 += v * v;
        const double l1 = cfg.kappa * std::sqrt(norm2);
        return TheoryParams::varadhan_triple(l1, cfg.d, cfg.epsilon).eta;
    }
    case ExperimentKind::SpdQuartic:
        // Harness default: the proposal spread sqrt(eta) matches the target
        // length scale (2 sigma^2)^{1/4} ~ 0.2, keeping backward rejections
        // in the single digits.
        return 0.01;
    case ExperimentKind::CircleKl:
    case ExperimentKind::KernelTable:
        break;
    }
    throw ConfigError("eta", "no automatic step rule for this experiment");
}

} // namespace

SamplerConfig experiment_sampler_config(const ExperimentConfig& cfg) {
    SamplerConfig out;
    out.eta = resolved_eta(cfg);
    out.mbi = cfg.mbi_oracle;
    out.rhk = cfg.rhk_oracle;
    out.center = cfg.center;
    out.grw_substeps = cfg.grw_substeps;
    out.proposal_t = cfg.proposal_t;
    out.epsilon = cfg.epsilon;
    out.zeta = cfg.zeta;
    out.level = cfg.level;
    out.rejection_cap = cfg.rejection_cap;
    out.clip_acceptance = cfg.clip;
    return out;
}

Point experiment_init(const ExperimentConfig& cfg, CounterRng& chain_rng) {
    const Point ref = experiment_reference(cfg);
    switch (cfg.init) {
    case InitRule::Mode: {
        if (cfg.init_radius <= 0.0)
            return ref;
        // Displace the reference by the requested geodesic distance in a
        // random direction.
        for (;;) {
            const TangentVector v = sample_tangent_gaussian(ref, 1.0, chain_rng);
            const double n = norm(v);
            if (n > 1e-12)
                return exp_map(ref, v * (cfg.init_radius / n));
        }
    }
    case InitRule::Oracle: {
        double norm2 = 0.0;
        for (double v : cfg.mu)
            norm2 += v * v;
        return vmf_oracle_sample(ref, cfg.kappa * std::sqrt(norm2), chain_rng);
    }
    case InitRule::Uniform: {
        if (cfg.experiment == ExperimentKind::CircleKl)
            return Point::circle(chain_rng.uniform(0.0, 2.0 * M_PI));
        Eigen::VectorXd v(cfg.d + 1);
        for (;;) {
            for (int i = 0; i <= cfg.d; ++i)
                v[i] = chain_rng.normal();
            if (v.norm() > 1e-12)
                return Point::sphere(v / v.norm());
        }
    }
    }
    throw std::invalid_argument("experiment_init: unreachable");
}

// ---------------------------------------------------------------------------
// Kernel table

namespace {

// Bound on the wrapped-Gaussian images omitted beyond wrap count l: for
// |phi| <= pi the nearest omitted image of the +-n pair sits at distance
// >= (2n-1) pi, so each pair contributes at most twice that Gaussian value.
double circle_tail_bound(double t, int level) {
    const double norm = 1.0 / std::sqrt(2.0 * M_PI * t);
    double total = 0.0;
    for (int n = level + 1; n < level + 2000; ++n) {
        const double r = (2.0 * n - 1.0) * M_PI;
        const double term = 2.0 * norm * std::exp(-r * r / (2.0 * t));
        total += term;
        if (term < 1e-18 * total || term == 0.0)
            break;
    }
    return total;
}

} // namespace

KernelTableRow kernel_table_row(int d, double t, int level, double c) {
    KernelTableRow row;
    row.d = d;
    row.t = t;
    row.level = level;
    row.c = c;
    if (d == 1) {
        row.value = circle_heat_kernel(t, c, level);
        row.tail_bound = circle_tail_bound(t, level);
    } else {
        row.value = sphere_heat_kernel(d, t, c, level);
        row.tail_bound = truncation_tail_bound(d, t, level);
    }
    return row;
}

namespace {

RunResult run_kernel_table(const ExperimentConfig& cfg) {
    RunResult result;
    for (int level : cfg.levels) {
        for (int i = 0; i < cfg.grid_points; ++i) {
            const double frac = static_cast<double>(i) / (cfg.grid_points - 1);
            // Inner-product grid on [-1, 1] for spheres, angle grid on
            // [0, pi] for the circle.
            const double c = cfg.d == 1 ? frac * M_PI : -1.0 + 2.0 * frac;
            result.table.push_back(kernel_table_row(cfg.d, cfg.t, level, c));
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// Sampling experiments

struct ChainOutputs {
    std::vector<ChainTrace> traces;
    long n_flagged = 0;
};

ChainOutputs run_chains(const ExperimentConfig& cfg) {
    const TargetSpec target = experiment_target(cfg);
    const Point ref = experiment_reference(cfg);

    // Construct the sampler once; chains only read it.
    std::unique_ptr<ProximalSampler> sampler;
    if (cfg.algorithm == Algorithm::Proximal)
        sampler = std::make_unique<ProximalSampler>(target, experiment_sampler_config(cfg));

    LmcConfig lmc;
    lmc.step = cfg.lmc_step;
    lmc.schedule = cfg.lmc_schedule;
    lmc.divergence_threshold = cfg.divergence_threshold;

    ChainOutputs out;
    out.traces.resize(cfg.chains);

    const CounterRng root(cfg.seed);
    std::atomic<int> next{0};
    const auto worker = [&]() {
        for (;;) {
            const int j = next.fetch_add(1);
            if (j >= cfg.chains)
                return;
            CounterRng rng = root.stream(static_cast<std::uint64_t>(j));
            const Point x0 = experiment_init(cfg, rng);
            if (cfg.algorithm == Algorithm::Proximal)
                out.traces[j] = sampler->run_chain(x0, cfg.iters, rng);
            else
                out.traces[j] = rlmc_run(target, x0, cfg.iters, lmc, rng, &ref);
        }
    };

    int n_threads = cfg.threads;
    if (n_threads == 0) {
        n_threads = static_cast<int>(std::thread::hardware_concurrency());
        if (n_threads < 1)
            n_threads = 1;
    }
    n_threads = std::min(n_threads, cfg.chains);

    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (int i = 0; i < n_threads; ++i)
            pool.emplace_back(worker);
        for (auto& th : pool)
            th.join();
    }

    for (const ChainTrace& trace : out.traces)
        if (trace.flagged)
            ++out.n_flagged;
    return out;
}

RunResult aggregate(const ExperimentConfig& cfg, const ChainOutputs& chains) {
    const Point ref = experiment_reference(cfg);
    const double nan = std::numeric_limits<double>::quiet_NaN();

    RunResult result;
    result.flagged_chains = chains.n_flagged;
    const std::string base_flag =
        chains.n_flagged == 0 ? "ok" : "n_flagged=" + std::to_string(chains.n_flagged);

    for (int k = 0; k <= cfg.iters; ++k) {
        std::vector<double> dist_sq;
        double max_dist = 0.0;
        std::vector<double> mbi_rej;
        std::vector<double> rhk_rej;
        std::vector<double> angles;
        dist_sq.reserve(cfg.chains);

        for (const ChainTrace& trace : chains.traces) {
            if (trace.flagged)
                continue;
            const Point& x = trace.states[static_cast<std::size_t>(k)];
            const double dist = distance(x, ref);
            dist_sq.push_back(dist * dist);
            max_dist = std::max(max_dist, dist);
            if (k >= 1) {
                const StepStats& s = trace.step_stats[static_cast<std::size_t>(k - 1)];
                mbi_rej.push_back(static_cast<double>(s.mbi_proposals - s.mbi_accepts));
                rhk_rej.push_back(static_cast<double>(s.rhk_proposals - s.rhk_accepts));
            }
            if (cfg.experiment == ExperimentKind::CircleKl)
                angles.push_back(x.angle());
        }

        const bool empty = dist_sq.empty();
        const MeanStderr fv = empty ? MeanStderr{nan, nan} : mean_and_stderr(dist_sq);
        result.rows.push_back({k, "frechet_variance", fv.mean, fv.se, base_flag});
        result.rows.push_back({k, "max_distance", empty ? nan : max_dist, 0.0, base_flag});

        const MeanStderr mbi =
            mbi_rej.empty() ? MeanStderr{k == 0 ? 0.0 : nan, 0.0} : mean_and_stderr(mbi_rej);
        const MeanStderr rhk =
            rhk_rej.empty() ? MeanStderr{k == 0 ? 0.0 : nan, 0.0} : mean_and_stderr(rhk_rej);
        result.rows.push_back({k, "mbi_rej_mean", mbi.mean, mbi.se, base_flag});
        result.rows.push_back({k, "rhk_rej_mean", rhk.mean, rhk.se, base_flag});

        if (cfg.experiment == ExperimentKind::CircleKl) {
            if (empty) {
                result.rows.push_back({k, "kl_nats", nan, 0.0, base_flag});
            } else {
                const GridDensity p = GridDensity::from_samples(angles, cfg.bins);
                const double kappa = cfg.kappa;
                const KlResult kl =
                    kl_grid(p, [kappa](double a) { return std::exp(kappa * std::cos(a)); });
                std::string flag = base_flag;
                if (kl.infinite)
                    flag = base_flag == "ok" ? "inf" : base_flag + ",inf";
                result.rows.push_back({k, "kl_nats", kl.nats, 0.0, flag});
            }
        }
    }
    return result;
}

} // namespace

RunResult run_experiment(const ExperimentConfig& cfg) {
    validate_config(cfg);
    const auto start = std::chrono::steady_clock::now();

    RunResult result;
    if (cfg.experiment == ExperimentKind::KernelTable) {
        result = run_kernel_table(cfg);
    } else {
        // Per-chain failures (divergence, oracle caps) flag the chain and the
        // rows; the run itself still completes and writes its CSV.
        const ChainOutputs chains = run_chains(cfg);
        result = aggregate(cfg, chains);
    }

    const auto end = std::chrono::steady_clock::now();
    result.wall_ms = std::chrono::duration<double, std::milli>(end - start).count();
    return result;
}

// ---------------------------------------------------------------------------
// CSV emission

std::string format_csv(const RunResult& result) {
    std::ostringstream os;
    if (!result.table.empty()) {
        os << "d,t,l,c,value,tail_bound\n";
        for (const KernelTableRow& row : result.table)
            os << row.d << "," << fmt_double(row.t) << "," << row.level << ","
               << fmt_double(row.c) << "," << fmt_double(row.value) << ","
               << fmt_double(row.tail_bound) << "\n";
        return os.str();
    }
    os << "iter,metric,value,stderr,flag\n";
    for (const CsvRow& row : result.rows)
        os << row.iter << "," << row.metric << "," << fmt_double(row.value) << ","
           << fmt_double(row.se) << "," << row.flag << "\n";
    return os.str();
}

void write_file_atomic(const std::string& path, const std::string& text) {
    const std::string tmp = path + ".tmp";
    {
        std::FILE* f = std::fopen(tmp.c_str(), "wb");
        if (!f)
            throw std::runtime_error("write_file_atomic: cannot open " + tmp);
        const std::size_t written = std::fwrite(text.data(), 1, text.size(), f);
        const int flush = std::fflush(f);
        std::fclose(f);
        if (written != text.size() || flush != 0)
            throw std::runtime_error("write_file_atomic: short write to " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("write_file_atomic: rename to " + path + " failed");
}

} // namespace rps
