// Experiment configuration files, CSV emission, and run reproducibility.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "rps/harness.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace rps;

namespace {

// Count CSV rows carrying the given metric.
int rows_with_metric(const RunResult& r, const std::string& metric) {
    int n = 0;
    for (const CsvRow& row : r.rows) {
        if (row.metric == metric) ++n;
    }
    return n;
}

std::set<std::string> metric_names(const RunResult& r) {
    std::set<std::string> names;
    for (const CsvRow& row : r.rows) names.insert(row.metric);
    return names;
}

ExperimentConfig tiny_vmf() {
    ExperimentConfig cfg = ExperimentConfig::preset_vmf_s2();
    cfg.chains = 3;
    cfg.iters = 2;
    return cfg;
}

} // namespace

TEST_CASE("presets validate and round-trip through the text format") {
    for (const ExperimentConfig& cfg : {ExperimentConfig::preset_vmf_s2(), ExperimentConfig::preset_vmf_s5(), ExperimentConfig::preset_spd(),
                                        ExperimentConfig::preset_circle(), ExperimentConfig::preset_kernel_table()}) {
        CHECK_NOTHROW(validate_config(cfg));
        const ExperimentConfig back = parse_config(serialize_config(cfg));
        CHECK(back == cfg);
    }
}

TEST_CASE("every field survives a round trip") {
    ExperimentConfig cfg = ExperimentConfig::preset_vmf_s5();
    cfg.kappa = 3.25;
    cfg.sigma = 0.07;
    cfg.eta = 0.125;
    cfg.epsilon = 1e-4;
    cfg.mbi_oracle = MbiOracle::SeriesRejection;
    cfg.rhk_oracle = RhkOracle::TruncatedKernelRejection;
    cfg.center = ProposalCenter::Mode;
    cfg.proposal_t = 0.5;
    cfg.zeta = 1e-8;
    cfg.grw_substeps = 7;
    cfg.clip = false;
    cfg.rejection_cap = 12345;
    cfg.init = InitRule::Mode;
    cfg.init_radius = 0.0;
    cfg.lmc_step = 5e-4;
    cfg.lmc_schedule = LmcSchedule::Decreasing;
    cfg.divergence_threshold = 77.0;
    cfg.chains = 17;
    cfg.iters = 9;
    cfg.bins = 32;
    cfg.seed = 99;
    cfg.threads = 2;
    cfg.out = "other.csv";
    const ExperimentConfig back = parse_config(serialize_config(cfg));
    CHECK(back == cfg);
}

TEST_CASE("parse accepts comments, blank lines, and repeated keys") {
    const std::string text =
        "# experiment file\n"
        "experiment = circle_kl\n"
        "\n"
        "eta = 0.5\n"
        "eta = 0.25   # later assignment wins\n"
        "chains = 10\n";
    const ExperimentConfig cfg = parse_config(text);
    CHECK(cfg.experiment == ExperimentKind::CircleKl);
    CHECK(cfg.eta == 0.25);
    CHECK(cfg.chains == 10);
}

TEST_CASE("parse failures name the offending key") {
    const auto field_of = [](const std::string& text) {
        try {
            (void)parse_config(text);
        } catch (const ConfigError& e) {
            return std::string(e.field);
        }
        return std::string("(no error)");
    };
    CHECK(field_of("no_such_key = 1\n") == "no_such_key");
    CHECK(field_of("chains = eleven\n") == "chains");
    CHECK(field_of("experiment = torus\n") == "experiment");
    CHECK(field_of("just-a-line-without-equals\n") == "line 1");
    CHECK(field_of("init = nowhere\n") == "init");
}

TEST_CASE("validation names the field that violates a constraint") {
    const auto field_of = [](ExperimentConfig cfg) {
        try {
            validate_config(cfg);
        } catch (const ConfigError& e) {
            return std::string(e.field);
        }
        return std::string("(no error)");
    };

    ExperimentConfig cfg = ExperimentConfig::preset_vmf_s2();
    cfg.chains = 0;
    CHECK(field_of(cfg) == "chains");

    cfg = ExperimentConfig::preset_vmf_s2();
    cfg.mu = {1.0, 2.0}; // wrong length for d = 2
    CHECK(field_of(cfg) == "mu");

    cfg = ExperimentConfig::preset_spd();
    cfg.init = InitRule::Oracle; // no closed-form oracle on the quartic
    CHECK(field_of(cfg) == "init");

    cfg = ExperimentConfig::preset_vmf_s2();
    cfg.init_radius = 0.5; // radius only combines with mode initialization
    CHECK(field_of(cfg) == "init_radius");

    cfg = ExperimentConfig::preset_kernel_table();
    cfg.t = 0.0;
    CHECK(field_of(cfg) == "t");

    cfg = ExperimentConfig::preset_circle();
    cfg.bins = 1;
    CHECK(field_of(cfg) == "bins");
}

TEST_CASE("sphere runs emit the documented metrics with iters+1 rows each") {
    RunResult r = run_experiment(tiny_vmf());
    const std::set<std::string> expect = {"frechet_variance", "max_distance", "mbi_rej_mean",
                                          "rhk_rej_mean"};
    CHECK(metric_names(r) == expect);
    for (const std::string& m : expect) {
        CHECK(rows_with_metric(r, m) == 3); // iters + 1
    }
    CHECK(r.flagged_chains == 0);
    CHECK(r.wall_ms >= 0.0);
    // Iteration zero precedes any oracle call, so rejection counts are zero.
    for (const CsvRow& row : r.rows) {
        if (row.iter == 0 && (row.metric == "mbi_rej_mean" || row.metric == "rhk_rej_mean")) {
            CHECK(row.value == 0.0);
        }
        CHECK(row.flag == "ok");
    }
}

TEST_CASE("a single chain and iteration produce two rows per metric") {
    ExperimentConfig cfg = tiny_vmf();
    cfg.chains = 1;
    cfg.iters = 1;
    RunResult r = run_experiment(cfg);
    CHECK(rows_with_metric(r, "frechet_variance") == 2);
}

TEST_CASE("circle runs add the grid KL metric") {
    ExperimentConfig cfg = ExperimentConfig::preset_circle();
    cfg.chains = 40;
    cfg.iters = 2;
    RunResult r = run_experiment(cfg);
    CHECK(metric_names(r).count("kl_nats") == 1);
    // The chains start uniform: the iteration-zero KL sits near its known
    // coarse-grid value (small-sample bias inflates it slightly).
    for (const CsvRow& row : r.rows) {
        if (row.iter == 0 && row.metric == "kl_nats") {
            CHECK(row.value > 0.5);
            CHECK(row.value < 2.5);
        }
    }
}

TEST_CASE("kernel-table runs tabulate the configured levels") {
    ExperimentConfig cfg = ExperimentConfig::preset_kernel_table();
    cfg.levels = {5, 10};
    cfg.grid_points = 9;
    RunResult r = run_experiment(cfg);
    CHECK(r.rows.empty());
    REQUIRE(r.table.size() == 2 * 9);
    for (const KernelTableRow& row : r.table) {
        CHECK(row.d == cfg.d);
        CHECK(row.t == cfg.t);
        CHECK((row.level == 5 || row.level == 10));
        CHECK(row.c >= -1.0);
        CHECK(row.c <= 1.0);
        CHECK(row.tail_bound > 0.0);
    }
    // Deeper truncation tightens the published bound.
    CHECK(r.table.back().tail_bound < r.table.front().tail_bound);
}

TEST_CASE("reruns of one configuration are byte-identical") {
    const ExperimentConfig cfg = tiny_vmf();
    const RunResult a = run_experiment(cfg);
    const RunResult b = run_experiment(cfg);
    CHECK(format_csv(a) == format_csv(b));
}

TEST_CASE("the thread count does not change the numbers") {
    ExperimentConfig cfg = tiny_vmf();
    cfg.chains = 8;
    cfg.threads = 1;
    const std::string serial = format_csv(run_experiment(cfg));
    cfg.threads = 4;
    const std::string parallel = format_csv(run_experiment(cfg));
    CHECK(serial == parallel);
}

TEST_CASE("the seed does change the numbers") {
    ExperimentConfig cfg = tiny_vmf();
    const std::string a = format_csv(run_experiment(cfg));
    cfg.seed = cfg.seed + 1;
    const std::string b = format_csv(run_experiment(cfg));
    CHECK(a != b);
}

TEST_CASE("CSV output carries the expected headers") {
    const ExperimentConfig cfg = tiny_vmf();
    const std::string csv = format_csv(run_experiment(cfg));
    CHECK(csv.rfind("iter,metric,value,stderr,flag\n", 0) == 0);

    ExperimentConfig kt = ExperimentConfig::preset_kernel_table();
    kt.levels = {5};
    kt.grid_points = 3;
    const std::string table = format_csv(run_experiment(kt));
    CHECK(table.rfind("d,t,l,c,value,tail_bound\n", 0) == 0);
}

TEST_CASE("atomic writes land complete files without temporaries") {
    const std::string path = "harness_test_atomic.csv";
    write_file_atomic(path, "x,y\n1,2\n");
    std::ifstream in(path);
    std::stringstream buf;
    buf << in.rdbuf();
    CHECK(buf.str() == "x,y\n1,2\n");
    CHECK_FALSE(std::ifstream(path + ".tmp").good());
    std::remove(path.c_str());
}

TEST_CASE("experiment initialization rules are deterministic per stream") {
    const ExperimentConfig cfg = tiny_vmf();
    CounterRng a = CounterRng(cfg.seed).stream(2);
    CounterRng b = CounterRng(cfg.seed).stream(2);
    const Point p = experiment_init(cfg, a);
    const Point q = experiment_init(cfg, b);
    CHECK((p.value() - q.value()).norm() == 0.0);
}

TEST_CASE("mode initialization honors the displacement radius") {
    ExperimentConfig cfg = ExperimentConfig::preset_spd();
    cfg.init_radius = 1.2;
    const Point ref = experiment_reference(cfg);
    CounterRng rng = CounterRng(cfg.seed).stream(0);
    const Point p = experiment_init(cfg, rng);
    CHECK(distance(ref, p) == doctest::Approx(1.2).epsilon(1e-9));
}
