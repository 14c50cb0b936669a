#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "apa/activation.hpp"
#include "apa/collapse.hpp"
#include "apa/csv.hpp"
#include "apa/datagen.hpp"
#include "apa/gradcheck.hpp"
#include "apa/report.hpp"
#include "apa/rng.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitAssertion = 1;
constexpr int kExitNumeric = 2;
constexpr int kExitUsage = 64;
constexpr int kExitData = 65;

std::uint64_t resolve_seed(std::optional<std::uint64_t> flag_seed) {
    if (flag_seed) return *flag_seed;
    if (const char* env = std::getenv("APA_SEED")) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (end == env || *end != '\0') throw CLI::ValidationError("APA_SEED", "not an integer");
        return static_cast<std::uint64_t>(v);
    }
    return 0;
}

apa::Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw apa::CsvError("cannot open " + path, 0, 0);
    try {
        return apa::Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw apa::CsvError(std::string("invalid JSON in ") + path + ": " + e.what(), 0, 0);
    }
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

int cmd_grad_check(std::size_t probes, std::optional<std::uint64_t> seed, double tolerance) {
    const auto report = apa::run_scalar_grad_check(probes, resolve_seed(seed));
    std::printf("%-14s %-12s %s\n", "op", "max_rel_err", "worst (z, kappa, lambda)");
    for (const auto& op : report.ops)
        std::printf("%-14s %-12.3g (%.4g, %.4g, %.4g)\n", op.name.c_str(), op.max_rel_err,
                    op.worst_z, op.worst_kappa, op.worst_lambda);
    if (!report.all_finite) {
        std::fprintf(stderr, "non-finite evaluation encountered\n");
        return kExitNumeric;
    }
    const bool pass = report.max_rel_err < tolerance;
    std::printf("max relative error %.3g, tolerance %.3g -> %s\n", report.max_rel_err, tolerance,
                pass ? "PASS" : "FAIL");
    return pass ? kExitOk : kExitAssertion;
}

int cmd_limits_check(double tolerance) {
    const auto report = apa::limits_check(tolerance);
    std::printf("%-14s %-12s %-10s %-8s %s\n", "identity", "max_dev", "tol", "status", "worst_z");
    for (const auto& row : report.rows)
        std::printf("%-14s %-12.3g %-10.3g %-8s %.3g\n", row.name.c_str(), row.max_deviation,
                    row.tolerance, row.pass ? "pass" : "FAIL", row.worst_z);
    return report.all_pass ? kExitOk : kExitAssertion;
}

int cmd_analyze_logits(const std::string& input, const std::string& out_path,
                       const std::string& csv_path) {
    const apa::CsvTable table = apa::read_csv_table(input);
    const apa::ClassLogitTable logit_table = apa::logit_table_from_csv(table);
    const apa::AlignmentReport report = apa::logit_alignment_report(logit_table);

    write_text_file(out_path, apa::alignment_to_json(report, input).dump(2) + "\n");
    if (!csv_path.empty()) apa::write_alignment_csv(csv_path, report);

    if (report.evaluated == 0)
        std::fprintf(stderr, "warning: no class had enough samples; all classes skipped\n");
    std::printf("classes evaluated %zu of %zu, gumbel-closer fraction %.4g, winner %s\n",
                report.evaluated, report.classes.size(), report.gumbel_fraction,
                apa::to_string(report.aggregate_winner));
    return kExitOk;
}

int cmd_train_toy(const std::string& config_path, const std::string& out_path,
                  std::optional<std::uint64_t> seed_flag) {
    const std::uint64_t fallback = resolve_seed(seed_flag);
    apa::ToyRunConfig cfg = apa::toy_config_from_json(
        config_path.empty() ? apa::Json::object() : read_json_file(config_path), fallback);

    apa::RunOutput out = apa::run_toy(cfg);
    write_text_file(out_path, apa::to_json(out.report).dump(2) + "\n");

    const auto& acc = out.report.final_accuracy;
    auto fmt = [](const std::optional<double>& v) { return v ? *v : -1.0; };
    std::printf("final avg %.4f  many %.4f  medium %.4f  few %.4f  (train avg %.4f)\n",
                acc.average, fmt(acc.many), fmt(acc.medium), fmt(acc.few),
                out.report.train_avg_acc);
    return kExitOk;
}

int cmd_attention_entropy(const std::string& run_path, const std::string& split,
                          const std::string& out_path) {
    const apa::RunReport report = apa::run_report_from_json(read_json_file(run_path));
    const apa::Json j = apa::entropy_report(report);

    std::printf("%-8s %-8s %-12s %s\n", "layer", "group", "entropy", "variance");
    for (const auto& layer : j.at("overall"))
        std::printf("%-8s %-8s %-12.5g %.5g\n", layer.at("layer").get<std::string>().c_str(),
                    "all", layer.at("entropy").get<double>(), layer.at("variance").get<double>());
    if (split == "groups") {
        for (const auto& [group, layers] : j.at("groups").items())
            for (const auto& layer : layers)
                std::printf("%-8s %-8s %-12.5g %.5g\n",
                            layer.at("layer").get<std::string>().c_str(), group.c_str(),
                            layer.at("entropy").get<double>(), layer.at("variance").get<double>());
    }
    if (!out_path.empty()) write_text_file(out_path, j.dump(2) + "\n");
    return kExitOk;
}

int cmd_nc1(const std::string& features_path, const std::string& out_path) {
    const apa::CsvTable table = apa::read_csv_table(features_path);
    const apa::CovariancePair pair = apa::covariances(table.values, table.labels);
    const double value = apa::nc1(pair);
    std::printf("nc1 %.10g\n", value);
    if (!out_path.empty()) {
        apa::Json j;
        j["version"] = apa::kReportVersion;
        j["nc1"] = value;
        j["classes"] = pair.class_count;
        j["dim"] = pair.dim;
        j["samples"] = table.values.rows;
        write_text_file(out_path, j.dump(2) + "\n");
    }
    return kExitOk;
}

int cmd_synth_logits(const std::string& family_name, std::size_t classes, std::size_t samples,
                     std::optional<std::uint64_t> seed_flag, const std::string& out_path) {
    const apa::CdfFamily family =
        family_name == "gumbel" ? apa::CdfFamily::Gumbel : apa::CdfFamily::Logistic;
    const std::uint64_t seed = resolve_seed(seed_flag);

    apa::Rng param_rng = apa::Rng(seed).derive(1001);
    apa::Tensor values(samples, classes);
    for (std::size_t k = 0; k < classes; ++k) {
        const double mu = param_rng.uniform(-3.0, 3.0);
        const double s = param_rng.uniform(0.5, 2.0);
        const auto dist = apa::sample_theoretical(family, mu, s, samples,
                                                  apa::Rng(seed).derive(2000 + k).next_u64());
        for (std::size_t r = 0; r < samples; ++r) values.at(r, k) = dist.samples[r];
    }
    std::vector<int> labels(samples);
    for (std::size_t r = 0; r < samples; ++r) labels[r] = static_cast<int>(r % classes);
    apa::write_csv_table(out_path, apa::logit_column_names(classes), values, labels);
    std::printf("wrote %zu rows x %zu classes of %s logits to %s\n", samples, classes,
                family_name.c_str(), out_path.c_str());
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adaptive parametric activation toolkit"};
    app.require_subcommand(1);

    auto* grad = app.add_subcommand("grad-check", "Check analytic gradients against finite differences");
    std::size_t probes = 1000;
    std::optional<std::uint64_t> grad_seed;
    double grad_tol = 1e-5;
    grad->add_option("--probes", probes, "number of random probes");
    grad->add_option("--seed", grad_seed, "probe seed (default APA_SEED or 0)");
    grad->add_option("--tolerance", grad_tol, "max relative error accepted");

    auto* limits = app.add_subcommand("limits-check", "Check the activation unification identities");
    double limits_tol = 1e-5;
    limits->add_option("--tolerance", limits_tol, "tolerance for the limit approximations");

    auto* analyze = app.add_subcommand("analyze-logits", "Per-class Logistic/Gumbel KS comparison");
    std::string analyze_input, analyze_out, analyze_csv;
    analyze->add_option("--input", analyze_input, "logit CSV")->required();
    analyze->add_option("--out", analyze_out, "JSON report path")->required();
    analyze->add_option("--csv", analyze_csv, "optional plot-ready CSV path");

    auto* train = app.add_subcommand("train-toy", "Train the toy long-tail classifier");
    std::string train_config, train_out;
    std::optional<std::uint64_t> train_seed;
    train->add_option("--config", train_config, "config JSON (defaults used when omitted)");
    train->add_option("--out", train_out, "run report path")->required();
    train->add_option("--seed", train_seed, "seed fallback when the config has none");

    auto* entropy = app.add_subcommand("attention-entropy", "Gate entropy/variance of a trained run");
    std::string entropy_run, entropy_split = "groups", entropy_out;
    entropy->add_option("--run", entropy_run, "run report JSON")->required();
    entropy->add_option("--split", entropy_split, "groups|overall")
        ->check(CLI::IsMember({"groups", "overall"}));
    entropy->add_option("--out", entropy_out, "optional JSON output path");

    auto* nc1cmd = app.add_subcommand("nc1", "Neural-collapse NC1 of a feature CSV");
    std::string nc1_features, nc1_out;
    nc1cmd->add_option("--features", nc1_features, "feature CSV with label column")->required();
    nc1cmd->add_option("--out", nc1_out, "optional JSON output path");

    auto* synth = app.add_subcommand("synth-logits", "Generate a synthetic logit table CSV");
    std::string synth_family = "gumbel", synth_out;
    std::size_t synth_classes = 10, synth_samples = 5000;
    std::optional<std::uint64_t> synth_seed;
    synth->add_option("--family", synth_family)->check(CLI::IsMember({"gumbel", "logistic"}));
    synth->add_option("--classes", synth_classes);
    synth->add_option("--samples", synth_samples);
    synth->add_option("--seed", synth_seed);
    synth->add_option("--out", synth_out, "CSV path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return kExitUsage;
    }

    try {
        if (grad->parsed()) {
            if (probes == 0) {
                std::fprintf(stderr, "usage error: --probes must be >= 1\n");
                return kExitUsage;
            }
            return cmd_grad_check(probes, grad_seed, grad_tol);
        }
        if (limits->parsed()) return cmd_limits_check(limits_tol);
        if (analyze->parsed()) return cmd_analyze_logits(analyze_input, analyze_out, analyze_csv);
        if (train->parsed()) return cmd_train_toy(train_config, train_out, train_seed);
        if (entropy->parsed()) return cmd_attention_entropy(entropy_run, entropy_split, entropy_out);
        if (nc1cmd->parsed()) return cmd_nc1(nc1_features, nc1_out);
        if (synth->parsed()) {
            if (synth_classes == 0 || synth_samples < 2) {
                std::fprintf(stderr, "usage error: need --classes >= 1 and --samples >= 2\n");
                return kExitUsage;
            }
            return cmd_synth_logits(synth_family, synth_classes, synth_samples, synth_seed,
                                    synth_out);
        }
    } catch (const apa::CsvError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return kExitData;
    } catch (const CLI::ValidationError& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return kExitUsage;
    } catch (const std::domain_error& e) {
        std::fprintf(stderr, "numeric error: %s\n", e.what());
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitNumeric;
    }
    return kExitUsage;
}
