#include "apa/report.hpp"

#include <fstream>
#include <stdexcept>

namespace apa {

namespace {

Json group_acc_to_json(const GroupAccuracy& acc) {
    Json g;
    g["many"] = acc.many ? Json(*acc.many) : Json(nullptr);
    g["medium"] = acc.medium ? Json(*acc.medium) : Json(nullptr);
    g["few"] = acc.few ? Json(*acc.few) : Json(nullptr);
    return g;
}

GroupAccuracy group_acc_from_json(const Json& g, double avg) {
    GroupAccuracy acc;
    acc.average = avg;
    if (!g.at("many").is_null()) acc.many = g.at("many").get<double>();
    if (!g.at("medium").is_null()) acc.medium = g.at("medium").get<double>();
    if (!g.at("few").is_null()) acc.few = g.at("few").get<double>();
    return acc;
}

bool opt_equal(const std::optional<double>& a, const std::optional<double>& b) {
    return a.has_value() == b.has_value() && (!a || *a == *b);
}

}  // namespace

Json to_json(const ToyRunConfig& cfg) {
    Json j;
    j["seed"] = cfg.seed;
    j["data"] = {{"classes", cfg.data.classes},
                 {"dim", cfg.data.dim},
                 {"n_max", cfg.data.n_max},
                 {"imbalance", cfg.data.imbalance},
                 {"spread", cfg.data.spread}};
    j["eval_per_class"] = cfg.eval_per_class;
    j["model"] = {{"hidden", cfg.model.hidden},
                  {"reduction", cfg.model.reduction},
                  {"dense_activation", to_string(cfg.model.dense_activation)},
                  {"gate", to_string(cfg.model.gate)},
                  {"attention", cfg.model.attention},
                  {"layer_norm", cfg.model.layer_norm},
                  {"gate_dropout", cfg.model.gate_dropout}};
    j["train"] = {{"epochs", cfg.train.epochs},
                  {"batch_size", cfg.train.batch_size},
                  {"learning_rate", cfg.train.learning_rate},
                  {"momentum", cfg.train.momentum},
                  {"loss", to_string(cfg.train.loss)},
                  {"lambda_clamp", {cfg.train.lambda_clamp_lo, cfg.train.lambda_clamp_hi}},
                  {"init",
                   {{"aglu_kappa", {cfg.train.init.aglu_kappa_lo, cfg.train.init.aglu_kappa_hi}},
                    {"aglu_lambda", {cfg.train.init.aglu_lambda_lo, cfg.train.init.aglu_lambda_hi}},
                    {"gate_kappa", {cfg.train.init.gate_kappa_lo, cfg.train.init.gate_kappa_hi}},
                    {"gate_lambda", {cfg.train.init.gate_lambda_lo, cfg.train.init.gate_lambda_hi}}}}};
    return j;
}

ToyRunConfig toy_config_from_json(const Json& j, std::uint64_t fallback_seed) {
    ToyRunConfig cfg;
    cfg.seed = j.value("seed", fallback_seed);
    if (j.contains("data")) {
        const Json& d = j.at("data");
        cfg.data.classes = d.value("classes", cfg.data.classes);
        cfg.data.dim = d.value("dim", cfg.data.dim);
        cfg.data.n_max = d.value("n_max", cfg.data.n_max);
        cfg.data.imbalance = d.value("imbalance", cfg.data.imbalance);
        cfg.data.spread = d.value("spread", cfg.data.spread);
    }
    cfg.eval_per_class = j.value("eval_per_class", cfg.eval_per_class);
    if (j.contains("model")) {
        const Json& m = j.at("model");
        if (m.contains("hidden")) cfg.model.hidden = m.at("hidden").get<std::vector<std::size_t>>();
        cfg.model.reduction = m.value("reduction", cfg.model.reduction);
        if (m.contains("dense_activation"))
            cfg.model.dense_activation =
                activation_tag_from_string(m.at("dense_activation").get<std::string>());
        if (m.contains("gate"))
            cfg.model.gate = activation_tag_from_string(m.at("gate").get<std::string>());
        cfg.model.attention = m.value("attention", cfg.model.attention);
        cfg.model.layer_norm = m.value("layer_norm", cfg.model.layer_norm);
        cfg.model.gate_dropout = m.value("gate_dropout", cfg.model.gate_dropout);
    }
    if (j.contains("train")) {
        const Json& t = j.at("train");
        cfg.train.epochs = t.value("epochs", cfg.train.epochs);
        cfg.train.batch_size = t.value("batch_size", cfg.train.batch_size);
        cfg.train.learning_rate = t.value("learning_rate", cfg.train.learning_rate);
        cfg.train.momentum = t.value("momentum", cfg.train.momentum);
        if (t.contains("loss")) cfg.train.loss = loss_kind_from_string(t.at("loss").get<std::string>());
        if (t.contains("lambda_clamp")) {
            cfg.train.lambda_clamp_lo = t.at("lambda_clamp").at(0).get<double>();
            cfg.train.lambda_clamp_hi = t.at("lambda_clamp").at(1).get<double>();
        }
        if (t.contains("init")) {
            const Json& i = t.at("init");
            auto range = [&](const char* key, double& lo, double& hi) {
                if (!i.contains(key)) return;
                lo = i.at(key).at(0).get<double>();
                hi = i.at(key).at(1).get<double>();
            };
            range("aglu_kappa", cfg.train.init.aglu_kappa_lo, cfg.train.init.aglu_kappa_hi);
            range("aglu_lambda", cfg.train.init.aglu_lambda_lo, cfg.train.init.aglu_lambda_hi);
            range("gate_kappa", cfg.train.init.gate_kappa_lo, cfg.train.init.gate_kappa_hi);
            range("gate_lambda", cfg.train.init.gate_lambda_lo, cfg.train.init.gate_lambda_hi);
        }
    }
    cfg.data.seed = cfg.seed;
    cfg.train.seed = cfg.seed;
    return cfg;
}

bool RunReport::operator==(const RunReport& other) const {
    const Json a = to_json(*this);
    const Json b = to_json(other);
    return a == b;
}

Json to_json(const RunReport& report) {
    Json j;
    j["version"] = report.version;
    j["config"] = to_json(report.config);
    j["per_epoch"] = report.per_epoch_loss;
    j["final"] = {{"group_acc", group_acc_to_json(report.final_accuracy)},
                  {"avg_acc", report.final_accuracy.average},
                  {"train_avg_acc", report.train_avg_acc}};
    Json params = Json::object();
    for (const auto& site : report.trajectories)
        params[site.name] = {{"kappa", site.kappa}, {"lambda", site.lambda}};
    j["params"] = params;
    j["model_state"] = report.model_state;
    j["notes"] = {{"gap", "identity pooling: inputs are already per-sample channel vectors"},
                  {"layer_norm_placement", "pooled descriptor, before the reduction MLP"},
                  {"dropout_placement", "gate vector, after the nonlinearity"}};
    return j;
}

RunReport run_report_from_json(const Json& j) {
    RunReport report;
    report.version = j.at("version").get<int>();
    if (report.version != kReportVersion)
        throw std::runtime_error("unsupported report version " + std::to_string(report.version));
    report.config = toy_config_from_json(j.at("config"));
    report.per_epoch_loss = j.at("per_epoch").get<std::vector<double>>();
    const Json& fin = j.at("final");
    report.final_accuracy = group_acc_from_json(fin.at("group_acc"), fin.at("avg_acc").get<double>());
    report.train_avg_acc = fin.at("train_avg_acc").get<double>();
    for (const auto& [name, traj] : j.at("params").items()) {
        SiteTrajectory site;
        site.name = name;
        site.kappa = traj.at("kappa").get<std::vector<double>>();
        site.lambda = traj.at("lambda").get<std::vector<double>>();
        report.trajectories.push_back(std::move(site));
    }
    report.model_state = j.at("model_state").get<std::vector<double>>();
    return report;
}

RunOutput run_toy(const ToyRunConfig& cfg) {
    LongTailSpec spec = cfg.data;
    spec.seed = cfg.seed;

    RunOutput out;
    out.train_data = make_longtail(spec);
    out.eval_data = make_balanced_eval(spec, cfg.eval_per_class);
    out.model = build_model(cfg.model, spec.dim, spec.classes, cfg.train.init, cfg.seed);

    TrainConfig tc = cfg.train;
    tc.seed = cfg.seed;
    const TrainResult result = train(out.model, out.train_data, tc, &out.eval_data);

    out.report.config = cfg;
    out.report.per_epoch_loss = result.per_epoch_loss;
    out.report.final_accuracy = result.final_accuracy;
    out.report.train_avg_acc = result.train_accuracy.average;
    out.report.trajectories = result.trajectories;
    out.report.model_state = out.model.state();
    return out;
}

Model model_from_report(const RunReport& report) {
    Model model = build_model(report.config.model, report.config.data.dim,
                              report.config.data.classes, report.config.train.init,
                              report.config.seed);
    model.load_state(report.model_state);
    return model;
}

Json alignment_to_json(const AlignmentReport& report, const std::string& source) {
    Json j;
    j["version"] = kReportVersion;
    j["source"] = source;
    j["fit_convention"] = report.fit_convention;
    Json classes = Json::array();
    for (const auto& c : report.classes) {
        Json e;
        e["class"] = c.class_id;
        e["n"] = c.n;
        e["group"] = to_string(c.group);
        e["skipped"] = c.skipped;
        if (c.skipped) {
            e["skip_reason"] = c.skip_reason;
        } else {
            e["skewness"] = c.skewness;
            e["logistic"] = {{"location", c.logistic_fit.location},
                             {"scale", c.logistic_fit.scale},
                             {"ks", c.ks_logistic}};
            e["gumbel"] = {{"location", c.gumbel_fit.location},
                           {"scale", c.gumbel_fit.scale},
                           {"ks", c.ks_gumbel}};
            e["winner"] = to_string(c.winner);
        }
        classes.push_back(std::move(e));
    }
    j["classes"] = classes;
    j["aggregate"] = {{"evaluated", report.evaluated},
                      {"gumbel_wins", report.gumbel_wins},
                      {"gumbel_fraction", report.gumbel_fraction},
                      {"winner", to_string(report.aggregate_winner)}};
    return j;
}

void write_alignment_csv(const std::string& path, const AlignmentReport& report) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "class,n,group,skipped,skewness,ks_logistic,ks_gumbel,winner\n";
    for (const auto& c : report.classes) {
        out << c.class_id << ',' << c.n << ',' << to_string(c.group) << ','
            << (c.skipped ? 1 : 0) << ',';
        if (c.skipped) {
            out << ",,,\n";
        } else {
            const Json skew = c.skewness, kl = c.ks_logistic, kg = c.ks_gumbel;
            out << skew.dump() << ',' << kl.dump() << ',' << kg.dump() << ','
                << to_string(c.winner) << '\n';
        }
    }
}

Json entropy_report(const RunReport& report) {
    Model model = model_from_report(report);
    LongTailSpec spec = report.config.data;
    spec.seed = report.config.seed;
    const SampledDataset eval = make_balanced_eval(spec, report.config.eval_per_class);

    const auto layer_stats = [&](const Tensor& rows) {
        model.forward(rows, /*training=*/false, nullptr);
        const auto gates = model.last_gates();
        Json layers = Json::array();
        const auto variances = attention_variance(gates);
        for (std::size_t l = 0; l < gates.size(); ++l)
            layers.push_back({{"layer", "attn" + std::to_string(l)},
                              {"entropy", attention_entropy(gates[l])},
                              {"variance", variances[l]}});
        return layers;
    };

    const std::size_t dim = eval.features.cols;
    auto rows_for = [&](std::optional<Group> g) {
        std::vector<double> vals;
        std::size_t count = 0;
        for (std::size_t r = 0; r < eval.features.rows; ++r) {
            const auto cls = static_cast<std::size_t>(eval.labels[r]);
            if (g && eval.class_groups[cls] != *g) continue;
            for (std::size_t c = 0; c < dim; ++c) vals.push_back(eval.features.at(r, c));
            ++count;
        }
        return Tensor::from_rows(count, dim, std::move(vals));
    };

    Json j;
    j["version"] = kReportVersion;
    j["seed"] = report.config.seed;
    j["overall"] = layer_stats(rows_for(std::nullopt));
    Json groups = Json::object();
    for (Group g : {Group::Many, Group::Medium, Group::Few}) {
        const Tensor rows = rows_for(g);
        if (rows.rows == 0) continue;
        groups[to_string(g)] = layer_stats(rows);
    }
    j["groups"] = groups;
    return j;
}

}  // namespace apa
