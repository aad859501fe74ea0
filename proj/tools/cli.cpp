#include "sigcmp/cli.hpp"

#include <CLI11.hpp>
#include <omp.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>

#include "sigcmp/error.hpp"
#include "sigcmp/pipeline.hpp"
#include "sigcmp/service.hpp"
#include "sigcmp/text.hpp"

namespace sigcmp::cli {

namespace {

using json::Json;

// Every default is read from the struct the flag configures.
struct Globals {
    std::size_t eu_size = EuConfig{}.eu_size;
    std::string aggregator{to_string(EuConfig{}.aggregator)};
    std::uint64_t seed = TestConfig{}.seed;
    std::optional<std::uint64_t> shuffle_seed;
    double alpha1 = CompareOptions{}.alpha1;
    double alpha2 = TestConfig{}.alpha2;
    double delta = TestConfig{}.delta;
    std::string direction{to_string(TestConfig{}.direction)};
    std::uint64_t trials = TestConfig{}.trials;
    std::string format = "json";
    std::string out_dir;
    std::string input_format = "auto";
    std::string header = "auto";
    int threads = 0;
    bool quiet = false;
    bool verbose = false;
};

class Logger {
public:
    Logger(std::ostream& err, const Globals& g) : err_(err), g_(g) {}
    void warn(const std::string& msg) const {
        if (!g_.quiet) err_ << "warning: " << msg << '\n';
    }
    void info(const std::string& msg) const {
        if (g_.verbose) err_ << "info: " << msg << '\n';
    }

private:
    std::ostream& err_;
    const Globals& g_;
};

struct Input {
    std::string text;
    std::string source_name;
    InputFormat format = InputFormat::csv;
};

Input read_input(const std::string& path, const Globals& g) {
    Input in;
    if (path == "-") {
        in.text.assign(std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>());
        in.source_name = "stdin";
    } else {
        std::ifstream file(path, std::ios::binary);
        if (!file) throw DataError("cannot open input file '" + path + "'");
        in.text.assign(std::istreambuf_iterator<char>(file), std::istreambuf_iterator<char>());
        in.source_name = std::filesystem::path(path).filename().string();
    }
    if (g.input_format == "auto") {
        const auto ext = std::filesystem::path(path).extension().string();
        in.format = (ext == ".tsv" || ext == ".tab") ? InputFormat::tsv : InputFormat::csv;
    } else {
        in.format = parse_format(g.input_format);
    }
    return in;
}

bool header_flag(const Input& in, const Globals& g) {
    if (g.header == "auto") return detect_header(in.text, in.format);
    if (g.header == "true" || g.header == "yes") return true;
    if (g.header == "false" || g.header == "no") return false;
    throw ConfigError("--header must be auto, true or false");
}

EuConfig eu_config(const Globals& g) {
    EuConfig c;
    c.eu_size = g.eu_size;
    c.aggregator = parse_aggregator(g.aggregator);
    c.shuffle_seed = g.shuffle_seed;
    return c;
}

EuSeries load_series(const std::string& path, const Globals& g, const Logger& log) {
    const auto in = read_input(path, g);
    const auto scores = parse_scores(in.text, in.format, header_flag(in, g), in.source_name);
    auto series = aggregate_to_eus(scores, eu_config(g));
    if (series.provenance().dropped_rows > 0) {
        log.warn(std::to_string(series.provenance().dropped_rows) + " trailing rows did not fill an EU of size " +
                 std::to_string(g.eu_size) + " and were dropped");
    }
    log.info("read " + std::to_string(scores.rows.size()) + " rows into " + std::to_string(series.n()) + " EUs");
    return series;
}

TestConfig test_config(const Globals& g) {
    TestConfig c;
    c.direction = parse_direction(g.direction);
    c.delta = g.delta;
    c.alpha2 = g.alpha2;
    c.trials = g.trials;
    c.seed = g.seed;
    return c;
}

Sidedness sidedness(const Globals& g) {
    return parse_direction(g.direction) == Direction::two_sided ? Sidedness::two_sided : Sidedness::one_sided;
}

class Sink {
public:
    Sink(std::ostream& out, const Globals& g, const Logger& log) : out_(out), g_(g), log_(log) {
        if (!g_.out_dir.empty()) std::filesystem::create_directories(g_.out_dir);
    }

    bool to_dir() const { return !g_.out_dir.empty(); }

    void file(const std::string& name, const std::string& content) const {
        if (!to_dir()) return;
        const auto path = std::filesystem::path(g_.out_dir) / name;
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        f << content;
        if (!f) throw DataError("cannot write '" + path.string() + "'");
        log_.info("wrote " + path.string());
    }

    // The document for the chosen --format; stdout unless writing to a directory.
    void primary(const std::string& content) const {
        if (!to_dir()) out_ << content;
    }

private:
    std::ostream& out_;
    const Globals& g_;
    const Logger& log_;
};

void require_format(const Globals& g, std::initializer_list<std::string_view> allowed) {
    if (std::find(allowed.begin(), allowed.end(), g.format) == allowed.end()) {
        std::string list;
        for (auto a : allowed) list += (list.empty() ? "" : ", ") + std::string(a);
        throw ConfigError("--format " + g.format + " is not available here (use " + list + ")");
    }
}

Json envelope(const Provenance& prov) {
    Json j;
    j["schema_version"] = kReportSchemaVersion;
    j["provenance"] = json::encode(prov);
    return j;
}

std::vector<EffectIndex> parse_indices(const std::vector<std::string>& names) {
    std::vector<EffectIndex> out;
    for (const auto& n : names) out.push_back(parse_effect_index(n));
    return out;
}

void warn_if_not_recommended(const AnalysisReport& a, TestId id, const Logger& log) {
    if (std::find(a.recommended_tests.begin(), a.recommended_tests.end(), id) == a.recommended_tests.end()) {
        std::string rec;
        for (TestId t : a.recommended_tests) rec += (rec.empty() ? "" : ", ") + std::string(to_string(t));
        log.warn(std::string(to_string(id)) + " is not recommended for this data (recommended: " + rec +
                 "); running it as requested");
    }
}

// ---- subcommands -----------------------------------------------------------

struct AnalyzeArgs {
    std::string input;
    std::optional<std::size_t> bins;
};

void cmd_analyze(const AnalyzeArgs& a, const Globals& g, const Sink& sink, const Logger& log) {
    require_format(g, {"json", "csv"});
    const auto series = load_series(a.input, g, log);
    const auto report = analyze(series, g.alpha1, a.bins);
    for (const auto& w : report.warnings) log.warn(w);
    auto j = envelope(series.provenance());
    j["analysis"] = json::encode(report);
    const auto names = default_histogram_files();
    for (std::size_t i = 0; i < names.size(); ++i) sink.file(names[i], json::histogram_to_csv(report.histograms[i]));
    sink.file("analysis.json", json::to_text(j));
    sink.primary(g.format == "csv" ? json::histogram_to_csv(report.histograms.back()) : json::to_text(j));
}

struct TestArgs {
    std::string input;
    std::optional<std::string> test;
};

void cmd_test(const TestArgs& a, const Globals& g, const Sink& sink, const Logger& log) {
    require_format(g, {"json", "csv"});
    const auto series = load_series(a.input, g, log);
    const auto analysis = analyze(series, g.alpha1);
    auto cfg = test_config(g);
    if (a.test) {
        cfg.test_id = parse_test_id(*a.test);
        warn_if_not_recommended(analysis, cfg.test_id, log);
    } else {
        cfg.test_id = analysis.recommended_tests.front();
        log.info("no --test given; using the first recommended test " + std::string(to_string(cfg.test_id)));
    }
    const auto result = run_test(series, cfg);
    auto j = envelope(series.provenance());
    j["test"] = json::encode(result);
    std::ostringstream csv;
    csv << "test_id,statistic_name,statistic_value,p_value,reject_h0,n\n"
        << to_string(result.config.test_id) << ',' << result.statistic_name << ','
        << format_double(result.statistic_value) << ',' << format_double(result.p_value) << ','
        << (result.reject_h0 ? "true" : "false") << ',' << result.n << '\n';
    sink.file("test.json", json::to_text(j));
    sink.file("test.csv", csv.str());
    sink.primary(g.format == "csv" ? csv.str() : json::to_text(j));
}

struct EffectArgs {
    std::string input;
    std::vector<std::string> indices;
};

void cmd_effect(const EffectArgs& a, const Globals& g, const Sink& sink, const Logger& log) {
    require_format(g, {"json", "csv"});
    const auto series = load_series(a.input, g, log);
    std::vector<EffectIndex> indices = parse_indices(a.indices);
    if (indices.empty()) indices = default_effect_indices(analyze(series, g.alpha1));
    std::vector<std::string> warnings;
    const auto estimates = estimate_all(series.diffs(), indices, warnings);
    for (const auto& w : warnings) log.warn(w);
    if (estimates.empty()) throw DegenerateError("no effect size index is defined for this sample");
    auto j = envelope(series.provenance());
    j["effect_sizes"] = Json::array();
    for (const auto& e : estimates) j["effect_sizes"].push_back(json::encode(e));
    std::ostringstream csv;
    csv << "index,value,n\n";
    for (const auto& e : estimates) csv << to_string(e.index) << ',' << format_double(e.value) << ',' << e.n << '\n';
    sink.file("effect_sizes.json", json::to_text(j));
    sink.file("effect_sizes.csv", csv.str());
    sink.primary(g.format == "csv" ? csv.str() : json::to_text(j));
}

struct PowerArgs {
    std::string mode;
    std::string input;
    std::optional<double> mean_diff;
    std::optional<double> std_dev;
    double target = ProspectiveSpec{}.target_power;
    std::vector<std::size_t> sizes;
    std::uint64_t power_trials = kDefaultPowerTrials;
    std::uint64_t inner_trials = PowerTest{}.inner_trials;
    std::optional<std::string> test;
    std::uint64_t ceiling = kDefaultSampleSizeCeiling;
};

void cmd_power(const PowerArgs& a, const Globals& g, const Sink& sink, const Logger& log) {
    require_format(g, {"json", "csv"});
    if (a.mode == "prospective") {
        if (!a.mean_diff) throw ConfigError("power prospective needs --mean-diff");
        ProspectiveSpec spec;
        spec.expected_mean_diff = *a.mean_diff;
        spec.expected_std_dev = a.std_dev.value_or(1.0);
        spec.target_power = a.target;
        spec.alpha = g.alpha2;
        spec.direction = sidedness(g);
        const auto r = prospective_sample_size(spec, a.ceiling);
        Json j;
        j["schema_version"] = kReportSchemaVersion;
        j["prospective"] = {{"spec", json::encode(spec)}, {"result", json::encode(r)}};
        std::ostringstream csv;
        csv << "effect,closed_form,refined,achieved_power\n"
            << format_double(r.effect) << ',' << r.closed_form << ',' << r.refined << ','
            << format_double(r.achieved_power) << '\n';
        sink.file("prospective.json", json::to_text(j));
        sink.file("prospective.csv", csv.str());
        sink.primary(g.format == "csv" ? csv.str() : json::to_text(j));
        return;
    }

    const auto method = parse_power_method(a.mode);
    auto cfg = test_config(g);
    PowerCurve curve;
    Json j;
    if (!a.input.empty()) {
        const auto series = load_series(a.input, g, log);
        const auto analysis = analyze(series, g.alpha1);
        if (a.test) {
            cfg.test_id = parse_test_id(*a.test);
            warn_if_not_recommended(analysis, cfg.test_id, log);
        } else {
            cfg.test_id = analysis.recommended_tests.front();
        }
        curve = retrospective_power(series, cfg, method, a.sizes, a.power_trials, a.inner_trials);
        j = envelope(series.provenance());
    } else {
        if (method == PowerMethod::bootstrap) throw ConfigError("power bootstrap needs an input file");
        if (!a.mean_diff || !a.std_dev) throw ConfigError("power mc without an input file needs --mean-diff and --sd");
        if (a.sizes.empty()) throw ConfigError("power mc without an input file needs --sizes");
        cfg.test_id = a.test ? parse_test_id(*a.test) : TestId::t_test;
        PowerTest test;
        test.test_id = cfg.test_id;
        test.alpha = cfg.alpha2;
        test.direction = cfg.direction;
        test.delta = cfg.delta;
        test.inner_trials = a.inner_trials;
        curve = retrospective_power_mc({*a.mean_diff, *a.std_dev}, test, a.sizes, a.power_trials,
                                       power_seed(cfg.seed));
        j["schema_version"] = kReportSchemaVersion;
    }
    j["power"] = json::encode(curve);
    sink.file("power.json", json::to_text(j));
    sink.file(kPowerCurveFile, power_curve_to_csv(curve));
    sink.primary(g.format == "csv" ? power_curve_to_csv(curve) : json::to_text(j));
}

struct SweepArgs {
    std::string generator = "normal";
    std::vector<double> params;
    std::string test = "t_test";
    std::uint64_t iterations = 20;
    std::vector<std::size_t> sizes;
    std::uint64_t inner_trials = PowerTest{}.inner_trials;
};

void cmd_sweep(const SweepArgs& a, const Globals& g, const Sink& sink, const Logger& log) {
    require_format(g, {"json", "csv"});
    SweepGenerator gen;
    if (a.generator == "normal") {
        NormalPair np;
        if (!a.params.empty()) {
            if (a.params.size() != 4) throw ConfigError("--params for normal takes mu1,sigma1,mu2,sigma2");
            np = {a.params[0], a.params[1], a.params[2], a.params[3]};
        }
        gen = np;
    } else if (a.generator == "beta") {
        BetaPair bp;
        if (!a.params.empty()) {
            if (a.params.size() != 4) throw ConfigError("--params for beta takes a1,b1,a2,b2");
            bp = {a.params[0], a.params[1], a.params[2], a.params[3]};
        }
        gen = bp;
    } else {
        throw ConfigError("--generator must be normal or beta");
    }
    const auto sizes = a.sizes.empty() ? default_sample_sizes() : a.sizes;
    const auto table = pvalue_sweep(gen, parse_test_id(a.test), sizes, a.iterations, g.seed, Exec::parallel,
                                    a.inner_trials);
    log.info("swept " + std::to_string(sizes.size()) + " sample sizes");
    Json j;
    j["schema_version"] = kReportSchemaVersion;
    j["sweep"] = json::encode(table);
    sink.file("sweep.json", json::to_text(j));
    sink.file("sweep.csv", sweep_to_csv(table));
    sink.primary(g.format == "csv" ? sweep_to_csv(table) : json::to_text(j));
}

struct GridArgs {
    std::string input;
    std::string test{to_string(TestId::wilcoxon_signed_rank)};
};

void cmd_grid(const GridArgs& a, const Globals& g, const Sink& sink, const Logger& log) {
    require_format(g, {"json", "csv"});
    const auto in = read_input(a.input, g);
    const auto table = parse_score_table(in.text, in.format, in.source_name);
    std::vector<NamedColumn> systems;
    for (std::size_t k = 0; k < table.names.size(); ++k) systems.push_back({table.names[k], table.columns[k]});
    auto cfg = test_config(g);
    cfg.test_id = parse_test_id(a.test);
    const auto grid = pairwise_grid(systems, eu_config(g), cfg);
    log.info(std::to_string(grid.comparisons) + " pairwise comparisons");
    for (const auto& c : grid.cells) {
        if (c.result.method == "degenerate") {
            log.warn(grid.systems[c.row] + " vs " + grid.systems[c.col] + ": identical EU scores, p set to 1");
        }
    }
    Json j;
    j["schema_version"] = kReportSchemaVersion;
    j["source"] = in.source_name;
    j["eu"] = json::encode(eu_config(g));
    j["grid"] = json::encode(grid);
    sink.file("grid.json", json::to_text(j));
    sink.file("grid.csv", grid_to_csv(grid));
    sink.primary(g.format == "csv" ? grid_to_csv(grid) : json::to_text(j));
}

struct CompareArgs {
    std::string input;
    std::optional<std::string> test;
    std::vector<std::string> indices;
    std::string power_method = "bootstrap";
    std::vector<std::size_t> sizes;
    std::uint64_t power_trials = kDefaultPowerTrials;
    std::uint64_t inner_trials = CompareOptions{}.power_inner_trials;
    std::optional<std::size_t> bins;
    std::optional<double> mean_diff;
    std::optional<double> std_dev;
    double target = ProspectiveSpec{}.target_power;
};

void cmd_compare(const CompareArgs& a, const Globals& g, const Sink& sink, const Logger& log) {
    require_format(g, {"json", "markdown"});
    const auto series = load_series(a.input, g, log);
    CompareOptions opt;
    opt.alpha1 = g.alpha1;
    opt.histogram_bins = a.bins;
    opt.test = test_config(g);
    if (a.test) opt.test_id = parse_test_id(*a.test);
    opt.effect_indices = parse_indices(a.indices);
    if (a.power_method == "none") {
        opt.power = false;
    } else {
        opt.power_method = parse_power_method(a.power_method);
    }
    opt.power_sizes = a.sizes;
    opt.power_trials = a.power_trials;
    opt.power_inner_trials = a.inner_trials;
    if (a.mean_diff) {
        ProspectiveSpec spec;
        spec.expected_mean_diff = *a.mean_diff;
        spec.expected_std_dev = a.std_dev.value_or(1.0);
        spec.target_power = a.target;
        spec.alpha = g.alpha2;
        spec.direction = sidedness(g);
        opt.prospective = spec;
    }
    const auto report = compare(series, opt);
    if (report.analysis) {
        for (const auto& w : report.analysis->warnings) log.warn(w);
    }
    for (const auto& w : report.warnings) log.warn(w);

    const auto text = json::to_text(to_json(report));
    const auto md = render_markdown(report);
    const auto names = default_histogram_files();
    for (std::size_t i = 0; i < names.size(); ++i) {
        sink.file(names[i], json::histogram_to_csv(report.analysis->histograms[i]));
    }
    if (report.power) sink.file(kPowerCurveFile, power_curve_to_csv(*report.power));
    sink.file("report.json", text);
    sink.file("report.md", md);
    sink.primary(g.format == "markdown" ? md : text);
}

struct ServeArgs {
    std::string listen;
    std::string data_dir;
    std::string static_dir;
    double ttl_hours = 24.0;
    double max_upload_mb = 50.0;
    std::string cors_origin = service::ServiceConfig{}.cors_origin;
};

void cmd_serve(const ServeArgs& a, const Logger& log) {
    std::string listen = a.listen;
    if (listen.empty()) {
        const char* env = std::getenv("SIGCMP_LISTEN");
        listen = env ? env : "127.0.0.1:8080";
    }
    const auto [host, port] = service::parse_listen(listen);
    if (!(a.ttl_hours > 0.0)) throw ConfigError("--ttl-hours must be positive");
    if (!(a.max_upload_mb > 0.0)) throw ConfigError("--max-upload-mb must be positive");
    service::ServiceConfig cfg;
    cfg.ttl = std::chrono::seconds(static_cast<std::int64_t>(a.ttl_hours * 3600.0));
    cfg.max_upload_bytes = static_cast<std::size_t>(a.max_upload_mb * 1024.0 * 1024.0);
    if (!a.data_dir.empty()) cfg.data_dir = a.data_dir;
    if (!a.static_dir.empty()) cfg.static_dir = a.static_dir;
    cfg.cors_origin = a.cors_origin;
    service::Service svc(cfg);
    log.info("listening on " + host + ":" + std::to_string(port));
    if (!service::serve(svc, host, port)) throw ConfigError("cannot listen on " + listen);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Paired significance testing for comparing two systems", "sigcmp"};
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    app.add_option("--eu-size", g.eu_size, "Instances per evaluation unit")->capture_default_str();
    app.add_option("--aggregator", g.aggregator, "EU aggregator: mean or median")->capture_default_str();
    app.add_option("--seed", g.seed, "Seed for resampling tests and simulations")->capture_default_str();
    app.add_option("--shuffle-seed", g.shuffle_seed, "Shuffle instances with this seed before forming EUs");
    app.add_option("--alpha1", g.alpha1, "Significance level of the normality test")->capture_default_str();
    app.add_option("--alpha2", g.alpha2, "Significance level of the paired test")->capture_default_str();
    app.add_option("--delta", g.delta, "Hypothesized difference under H0")->capture_default_str();
    app.add_option("--direction", g.direction, "two_sided, left or right")->capture_default_str();
    app.add_option("--trials", g.trials, "Resamples B for bootstrap and permutation tests")->capture_default_str();
    app.add_option("--format", g.format, "Output format: json, csv or markdown")->capture_default_str();
    app.add_option("--out", g.out_dir, "Write every output file into this directory");
    app.add_option("--input-format", g.input_format, "auto, csv or tsv")->capture_default_str();
    app.add_option("--header", g.header, "Input header row: auto, true or false")->capture_default_str();
    app.add_option("--threads", g.threads, "OpenMP threads (0 = runtime default)")->capture_default_str();
    auto* quiet = app.add_flag("--quiet,-q", g.quiet, "Suppress warnings");
    app.add_flag("--verbose,-v", g.verbose, "Log progress to stderr")->excludes(quiet);

    auto* analyze_cmd = app.add_subcommand("analyze", "Summary statistics, skewness, normality, recommendations");
    AnalyzeArgs analyze_args;
    analyze_cmd->add_option("input", analyze_args.input, "Two-column score file ('-' for stdin)")->required();
    analyze_cmd->add_option("--bins", analyze_args.bins, "Histogram bins (default ceil(sqrt n) in [5, 50])");

    auto* test_cmd = app.add_subcommand("test", "Run one paired significance test");
    TestArgs test_args;
    test_cmd->add_option("input", test_args.input, "Two-column score file")->required();
    test_cmd->add_option("--test", test_args.test, "Test id (default: first recommended)");

    auto* effect_cmd = app.add_subcommand("effect", "Effect size estimates");
    EffectArgs effect_args;
    effect_cmd->add_option("input", effect_args.input, "Two-column score file")->required();
    effect_cmd->add_option("--index", effect_args.indices, "cohens_d, hedges_g, wilcoxon_r, hodges_lehmann");

    auto* power_cmd = app.add_subcommand("power", "Prospective sample size or retrospective power curve");
    PowerArgs power_args;
    power_cmd->add_option("mode", power_args.mode, "prospective, mc or bootstrap")
        ->required()
        ->check(CLI::IsMember({"prospective", "mc", "bootstrap"}));
    power_cmd->add_option("input", power_args.input, "Two-column score file (mc, bootstrap)");
    power_cmd->add_option("--mean-diff", power_args.mean_diff, "Expected mean difference");
    power_cmd->add_option("--sd", power_args.std_dev, "Expected standard deviation of the differences");
    power_cmd->add_option("--power", power_args.target, "Target power")->capture_default_str();
    power_cmd->add_option("--sizes", power_args.sizes, "Sample sizes of the curve")->delimiter(',');
    power_cmd->add_option("--power-trials", power_args.power_trials, "Simulated datasets per size")
        ->capture_default_str();
    power_cmd->add_option("--inner-trials", power_args.inner_trials, "Resamples inside each simulated test")
        ->capture_default_str();
    power_cmd->add_option("--test", power_args.test, "Test id");
    power_cmd->add_option("--max-n", power_args.ceiling, "Largest sample size to search")->capture_default_str();

    auto* sweep_cmd = app.add_subcommand("sweep", "p-value versus sample size simulation");
    SweepArgs sweep_args;
    sweep_cmd->add_option("--generator", sweep_args.generator, "normal or beta")->capture_default_str();
    sweep_cmd->add_option("--params", sweep_args.params, "mu1,sigma1,mu2,sigma2 or a1,b1,a2,b2")->delimiter(',');
    sweep_cmd->add_option("--test", sweep_args.test, "Test id")->capture_default_str();
    sweep_cmd->add_option("--iterations", sweep_args.iterations, "Datasets per sample size")->capture_default_str();
    sweep_cmd->add_option("--sizes", sweep_args.sizes, "Sample sizes")->delimiter(',');
    sweep_cmd->add_option("--inner-trials", sweep_args.inner_trials, "Resamples for resampling tests")
        ->capture_default_str();

    auto* grid_cmd = app.add_subcommand("grid", "All pairwise comparisons with Bonferroni correction");
    GridArgs grid_args;
    grid_cmd->add_option("input", grid_args.input, "Score table, one column per system")->required();
    grid_cmd->add_option("--test", grid_args.test, "Test id")->capture_default_str();

    auto* compare_cmd = app.add_subcommand("compare", "Full pipeline into one report");
    CompareArgs cmp;
    compare_cmd->add_option("input", cmp.input, "Two-column score file")->required();
    compare_cmd->add_option("--test", cmp.test, "Test id (default: first recommended)");
    compare_cmd->add_option("--index", cmp.indices, "Effect size indices (default: by recommended statistic)");
    compare_cmd->add_option("--power-method", cmp.power_method, "bootstrap, mc or none")->capture_default_str();
    compare_cmd->add_option("--sizes", cmp.sizes, "Power curve sample sizes")->delimiter(',');
    compare_cmd->add_option("--power-trials", cmp.power_trials, "Simulated datasets per size")->capture_default_str();
    compare_cmd->add_option("--inner-trials", cmp.inner_trials, "Resamples inside each simulated test")
        ->capture_default_str();
    compare_cmd->add_option("--bins", cmp.bins, "Histogram bins");
    compare_cmd->add_option("--mean-diff", cmp.mean_diff, "Also plan a sample size for this mean difference");
    compare_cmd->add_option("--sd", cmp.std_dev, "Standard deviation for the sample size plan");
    compare_cmd->add_option("--power", cmp.target, "Target power for the sample size plan")->capture_default_str();

    auto* serve_cmd = app.add_subcommand("serve", "Start the HTTP API");
    ServeArgs serve_args;
    serve_cmd->add_option("--listen", serve_args.listen, "host:port (default $SIGCMP_LISTEN or 127.0.0.1:8080)");
    serve_cmd->add_option("--data-dir", serve_args.data_dir, "Spill sessions to this directory");
    serve_cmd->add_option("--static-dir", serve_args.static_dir, "Serve the UI bundle from this directory");
    serve_cmd->add_option("--ttl-hours", serve_args.ttl_hours, "Idle session lifetime")->capture_default_str();
    serve_cmd->add_option("--max-upload-mb", serve_args.max_upload_mb, "Request size cap")->capture_default_str();
    serve_cmd->add_option("--cors-origin", serve_args.cors_origin, "Access-Control-Allow-Origin")->capture_default_str();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n' << app.help();
        return kExitUsage;
    }

    const Logger log(err, g);
    try {
        if (g.threads < 0) throw ConfigError("--threads must be non-negative");
        if (g.threads > 0) omp_set_num_threads(g.threads);
        const Sink sink(out, g, log);
        if (*analyze_cmd) cmd_analyze(analyze_args, g, sink, log);
        if (*test_cmd) cmd_test(test_args, g, sink, log);
        if (*effect_cmd) cmd_effect(effect_args, g, sink, log);
        if (*power_cmd) cmd_power(power_args, g, sink, log);
        if (*sweep_cmd) cmd_sweep(sweep_args, g, sink, log);
        if (*grid_cmd) cmd_grid(grid_args, g, sink, log);
        if (*compare_cmd) cmd_compare(cmp, g, sink, log);
        if (*serve_cmd) cmd_serve(serve_args, log);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const DataError& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const DegenerateError& e) {
        err << "error: " << e.what() << '\n';
        return kExitDegenerate;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitOk;
}

}  // namespace sigcmp::cli
