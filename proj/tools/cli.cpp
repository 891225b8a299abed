#include "cli.hpp"

#include "vcrown/attention.hpp"
#include "vcrown/certified.hpp"
#include "vcrown/harness.hpp"
#include "vcrown/interval.hpp"
#include "vcrown/selfcheck.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>

namespace vcrown::cli {

namespace {

using nlohmann::json;

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file(const std::string& path, const std::string& text)
{
    std::ofstream out(path);
    if (!out || !(out << text))
        throw IoError("cannot write " + path);
}

json parse_document(const std::string& text, const std::string& path)
{
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw InvalidInputError(path + ": " + e.what());
    }
}

std::vector<double> number_array(const json& doc, const std::string& field)
{
    if (!doc.contains(field))
        throw InvalidInputError(field + ": missing");
    const json& a = doc.at(field);
    if (!a.is_array())
        throw InvalidInputError(field + ": expected an array of numbers");
    std::vector<double> out;
    out.reserve(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (!a[k].is_number())
            throw InvalidInputError(field + "[" + std::to_string(k) + "]: not a number");
        out.push_back(a[k].get<double>());
    }
    return out;
}

std::string join(std::span<const double> v)
{
    std::ostringstream s;
    s << std::setprecision(17);
    for (std::size_t k = 0; k < v.size(); ++k)
        s << (k ? "," : "") << v[k];
    return s.str();
}

// ---- solve ----

struct SolveArgs {
    std::string file;
    bool certified = false;
    std::string out;
};

int cmd_solve(const SolveArgs& a, std::ostream& out)
{
    const json doc = parse_document(read_file(a.file), a.file);
    if (!doc.is_object())
        throw InvalidInputError(a.file + ": expected an object with c, ell, u");
    for (const auto& [key, value] : doc.items()) {
        if (key != "c" && key != "ell" && key != "u")
            throw InvalidInputError(key + ": unknown field");
    }
    const std::vector<double> c = number_array(doc, "c");
    const ScoreBox box(number_array(doc, "ell"), number_array(doc, "u"));
    if (c.size() != box.size())
        throw InvalidInputError("c: length " + std::to_string(c.size()) + " does not match ell/u");

    const ThresholdResult r = directional_min(c, box);
    json report{{"value", r.value}, {"threshold", r.threshold}, {"vertex", r.vertex}};
    out << std::setprecision(17);
    out << "value=" << r.value << '\n';
    out << "threshold=" << r.threshold << '\n';
    out << "vertex=" << join(r.vertex) << '\n';
    if (a.certified) {
        const CertifiedBound cb = certified_directional_min(c, box);
        out << "certified_lower=" << cb.lower << '\n';
        out << "saturated=" << (cb.saturated ? "true" : "false") << '\n';
        report["certified_lower"] = cb.lower;
        report["saturated"] = cb.saturated;
        if (!a.out.empty())
            write_file(a.out, report.dump(2) + "\n");
        if (cb.saturated)
            return kSaturation;
        return kOk;
    }
    if (!a.out.empty())
        write_file(a.out, report.dump(2) + "\n");
    return kOk;
}

// ---- certify ----

struct CertifyArgs {
    std::string model;
    std::string input;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> label;
    double epsilon = 0.0;
    std::size_t budget = 64;
    bool certified = false;
    unsigned threads = 1;
    std::string out;
};

int cmd_certify(const CertifyArgs& a, std::ostream& out)
{
    if (!std::filesystem::exists(a.model))
        throw IoError("cannot open " + a.model);
    const AttentionModel model = load_model(a.model);

    std::vector<double> x;
    std::optional<std::size_t> label = a.label;
    if (!a.input.empty()) {
        const json doc = parse_document(read_file(a.input), a.input);
        if (!doc.is_object())
            throw InvalidInputError(a.input + ": expected an object with x");
        for (const auto& [key, value] : doc.items()) {
            if (key != "x" && key != "label")
                throw InvalidInputError(key + ": unknown field");
        }
        x = number_array(doc, "x");
        if (doc.contains("label") && !label) {
            if (!doc["label"].is_number_unsigned())
                throw InvalidInputError("label: expected a non-negative integer");
            label = doc["label"].get<std::size_t>();
        }
    } else {
        Rng rng(*a.seed);
        x.resize(model.input_size());
        for (double& v : x)
            v = rng.uniform();
    }
    if (x.size() != model.input_size())
        throw ModelError("x", "has " + std::to_string(x.size()) + " pixels, model expects " +
                                  std::to_string(model.input_size()));

    const std::vector<double> clean = forward(model, x);
    const std::size_t predicted = argmax(clean);
    const std::size_t y = label.value_or(predicted);
    if (y >= model.classes)
        throw InvalidInputError("label: " + std::to_string(y) + " out of range");

    const InputBox box = InputBox::clipped_linf(x, a.epsilon);
    const auto t0 = std::chrono::steady_clock::now();
    const CertificationResult result = target_hybrid_certify(model, box, y, {a.certified, a.threads});
    const auto elapsed = std::chrono::steady_clock::now() - t0;
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(elapsed).count();

    json targets = json::array();
    double min_attack = std::numeric_limits<double>::infinity();
    for (const MarginBound& m : result.margins) {
        Rng rng = Rng::stream(a.seed.value_or(0), y, m.target);
        const double attack = attack_min_margin(model, box, y, m.target, a.budget, rng);
        min_attack = std::min(min_attack, attack);
        targets.push_back({{"target", m.target},
                           {"l_vertex", m.l_vertex},
                           {"l_baseline", m.l_baseline},
                           {"l_hybrid", m.l_hybrid},
                           {"attack", attack},
                           {"clean_margin", clean[y] - clean[m.target]}});
    }

    json report{{"schema", "vcrown.certification.v1"},
                {"model", a.model},
                {"label", y},
                {"predicted", predicted},
                {"epsilon", a.epsilon},
                {"certified_mode", a.certified},
                {"certified", result.certified},
                {"min_hybrid", result.min_hybrid},
                {"min_attack", min_attack},
                {"targets", targets},
                {"time_ms", ms}};
    if (!a.out.empty())
        write_file(a.out, report.dump(2) + "\n");

    out << std::setprecision(10) << "certified=" << (result.certified ? "true" : "false")
        << " min_hybrid=" << result.min_hybrid << " targets=" << result.margins.size()
        << " time_ms=" << ms << '\n';
    return kOk;
}

// ---- sweep ----

struct SweepArgs {
    SweepConfig config;
    std::string out;
    std::string aggregate;
};

int cmd_sweep(const SweepArgs& a, std::ostream& out)
{
    const std::vector<TrialRecord> records = run_sweep(a.config);
    const std::vector<AggregateRow> rows = aggregate(records);
    if (!a.out.empty()) {
        std::ostringstream csv;
        write_trials_csv(csv, records);
        write_file(a.out, csv.str());
    }
    std::ostringstream agg;
    write_aggregate_csv(agg, rows);
    if (!a.aggregate.empty())
        write_file(a.aggregate, agg.str());
    out << agg.str();
    return kOk;
}

// ---- selfcheck ----

int cmd_selfcheck(const SelfcheckOptions& options, std::ostream& out)
{
    bool ok = true;
    for (const SuiteResult& suite : run_selfcheck(options)) {
        out << "suite=" << suite.name << " checked=" << suite.checked
            << " violations=" << suite.violations;
        if (suite.first_failure)
            out << " first_failure_trial=" << *suite.first_failure << " seed=" << options.seed;
        out << (suite.passed() ? " PASS" : " FAIL") << '\n';
        ok = ok && suite.passed();
    }
    out << "selfcheck=" << (ok ? "pass" : "fail") << '\n';
    return ok ? kOk : kInvariant;
}

// ---- init-model ----

struct InitArgs {
    RandomModelConfig config;
    std::uint64_t seed = 0;
    std::string out;
};

int cmd_init_model(const InitArgs& a, std::ostream& out)
{
    const AttentionModel model = random_model(a.config, a.seed);
    model.validate();
    try {
        save_model(model, a.out);
    } catch (const std::runtime_error& e) {
        throw IoError(e.what());
    }
    out << "wrote " << a.out << " tokens=" << model.tokens() << " heads=" << model.head_count()
        << " classes=" << model.classes << '\n';
    return kOk;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Exact softmax score-box bounds and attention certification", "vcrown"};
    app.require_subcommand(1);

    SolveArgs solve;
    auto* solve_cmd = app.add_subcommand("solve", "Minimize c^T softmax(s) over a score box");
    solve_cmd->add_option("file", solve.file, "JSON instance with c, ell, u")->required();
    solve_cmd->add_flag("--certified", solve.certified, "Also print the interval-certified bound");
    solve_cmd->add_option("--out", solve.out, "Write the result as JSON");

    CertifyArgs cert;
    auto* cert_cmd = app.add_subcommand("certify", "Certify a model on one input box");
    cert_cmd->add_option("model", cert.model, "Model JSON file")->required();
    auto* input_opt = cert_cmd->add_option("--input", cert.input, "JSON input with x and label");
    auto* seed_opt = cert_cmd->add_option("--seed", cert.seed, "Draw a uniform random input");
    input_opt->excludes(seed_opt);
    cert_cmd->add_option("--label", cert.label, "True class; defaults to the clean prediction");
    cert_cmd->add_option("--epsilon", cert.epsilon, "Pixel l-inf radius")
        ->required()
        ->check(CLI::NonNegativeNumber);
    cert_cmd->add_option("--budget", cert.budget, "Attack samples per target")
        ->check(CLI::PositiveNumber);
    cert_cmd->add_flag("--certified", cert.certified, "Use interval-certified row minima");
    cert_cmd->add_option("--threads", cert.threads, "Worker threads")->check(CLI::PositiveNumber);
    cert_cmd->add_option("--out", cert.out, "Write the JSON report");

    SweepArgs sweep;
    auto* sweep_cmd = app.add_subcommand("sweep", "Synthetic score-box sweep");
    sweep_cmd->add_option("--k", sweep.config.ks, "Comma-separated K values")->delimiter(',');
    sweep_cmd->add_option("--trials", sweep.config.trials, "Instances per K")->check(CLI::PositiveNumber);
    sweep_cmd->add_option("--seed", sweep.config.seed, "Base seed");
    sweep_cmd->add_option("--width-scale", sweep.config.generator.width_scale, "Box width multiplier")
        ->check(CLI::NonNegativeNumber);
    sweep_cmd->add_option("--coeff-scale", sweep.config.generator.coeff_scale, "Std. dev. of c");
    sweep_cmd->add_option("--budget", sweep.config.attack_budget, "Attack samples per instance")->check(CLI::PositiveNumber);
    sweep_cmd->add_option("--threads", sweep.config.threads, "Worker threads")->check(CLI::PositiveNumber);
    sweep_cmd->add_option("--out", sweep.out, "Per-trial CSV");
    sweep_cmd->add_option("--aggregate", sweep.aggregate, "Aggregate CSV");
    bool empty_k = false;
    sweep_cmd->add_flag("--no-k", empty_k, "Run with an empty K list")->excludes("--k");

    SelfcheckOptions check;
    auto* check_cmd = app.add_subcommand("selfcheck", "Run the property suites");
    check_cmd->add_option("--trials", check.trials, "Trials per suite")->check(CLI::PositiveNumber);
    check_cmd->add_option("--seed", check.seed, "Base seed");
    check_cmd->add_option("--threads", check.threads, "Worker threads")->check(CLI::PositiveNumber);
    check_cmd->add_flag("--inject-fault", check.inject_fault)->group("");

    InitArgs init;
    auto* init_cmd = app.add_subcommand("init-model", "Write a randomly initialized model");
    init_cmd->add_option("--out", init.out, "Model JSON to write")->required();
    init_cmd->add_option("--seed", init.seed, "Weight seed");
    init_cmd->add_option("--height", init.config.image.height);
    init_cmd->add_option("--width", init.config.image.width);
    init_cmd->add_option("--channels", init.config.image.channels);
    init_cmd->add_option("--patch", init.config.patch, "Square patch side");
    init_cmd->add_option("--dim", init.config.model_dim, "Model dimension");
    init_cmd->add_option("--heads", init.config.heads);
    init_cmd->add_option("--classes", init.config.classes);
    init_cmd->add_option("--hidden", init.config.hidden, "Hidden width; 0 gives a linear suffix");
    init_cmd->add_option("--weight-scale", init.config.weight_scale, "Std. dev. of weights");
    bool no_residual = false;
    init_cmd->add_flag("--no-residual", no_residual, "Drop the attention residual");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*solve_cmd)
            return cmd_solve(solve, out);
        if (*cert_cmd) {
            if (cert.input.empty() && !cert.seed) {
                err << "certify: one of --input or --seed is required\n";
                return kUsage;
            }
            return cmd_certify(cert, out);
        }
        if (*sweep_cmd) {
            if (empty_k)
                sweep.config.ks.clear();
            return cmd_sweep(sweep, out);
        }
        if (*check_cmd)
            return cmd_selfcheck(check, out);
        if (*init_cmd) {
            init.config.residual = !no_residual;
            return cmd_init_model(init, out);
        }
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kIo;
    } catch (const SaturationError& e) {
        err << "error: " << e.what() << '\n';
        return kSaturation;
    } catch (const ModelError& e) {
        err << "error: " << e.what() << '\n';
        return kValidation;
    } catch (const InvalidInputError& e) {
        err << "error: " << e.what() << '\n';
        return kValidation;
    } catch (const IntervalDomainError& e) {
        err << "error: " << e.what() << '\n';
        return kValidation;
    } catch (const json::exception& e) {
        err << "error: " << e.what() << '\n';
        return kValidation;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return kInvariant;
    }
    return kUsage;
}

} // namespace vcrown::cli
