#include "ee/run_config.hpp"

#include "ee/errors.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <set>
#include <sstream>

namespace ee {

std::string to_string(DivisionRule r) {
    return r == DivisionRule::equal_parts ? "equal_parts" : "paper_formula";
}

std::string to_string(PoolScope s) {
    return s == PoolScope::endpoint ? "endpoint" : "class_pair";
}

std::string to_string(TripletReduction r) {
    return r == TripletReduction::inner_mean ? "inner_mean" : "inner_sum";
}

void RunConfig::resolve() {
    train.seed = seed;
    gradcheck.seed = seed;
    bench.seed = seed;
    train.model.normalize_output = model_normalize_output.value_or(loss_expects_normalized(train.loss.kind));
    train.model.input_dim = static_cast<std::size_t>(data.blobs.input_dim);
}

namespace {

void check_keys(const YAML::Node& node, const std::string& where, const std::set<std::string>& allowed) {
    if (!node.IsMap()) {
        throw ConfigError("'" + where + "' must be a mapping");
    }
    for (const auto& kv : node) {
        const auto key = kv.first.as<std::string>();
        if (!allowed.count(key)) {
            throw ConfigError("unknown key '" + (where.empty() ? key : where + "." + key) + "'");
        }
    }
}

template <typename T>
void read(const YAML::Node& node, const std::string& where, const char* key, T& out) {
    const YAML::Node v = node[key];
    if (!v) {
        return;
    }
    try {
        out = v.as<T>();
    } catch (const YAML::Exception&) {
        throw ConfigError("bad value for '" + where + "." + key + "'");
    }
}

template <typename Enum, typename Parse>
void read_enum(const YAML::Node& node, const std::string& where, const char* key, Enum& out, Parse parse) {
    std::string name;
    read(node, where, key, name);
    if (!name.empty()) {
        out = parse(name);
    }
}

DivisionRule parse_rule(const std::string& s) {
    if (s == "equal_parts") return DivisionRule::equal_parts;
    if (s == "paper_formula") return DivisionRule::paper_formula;
    throw ConfigError("unknown division rule '" + s + "'");
}

PoolScope parse_pool(const std::string& s) {
    if (s == "endpoint") return PoolScope::endpoint;
    if (s == "class_pair") return PoolScope::class_pair;
    throw ConfigError("unknown pool scope '" + s + "'");
}

TripletReduction parse_reduction(const std::string& s) {
    if (s == "inner_mean") return TripletReduction::inner_mean;
    if (s == "inner_sum") return TripletReduction::inner_sum;
    throw ConfigError("unknown triplet reduction '" + s + "'");
}

// Enum parsers from other modules throw their own ConfigError already; the
// wrappers keep every failure inside the config category.
template <typename F>
auto guarded(F f) {
    return [f](const std::string& s) {
        try {
            return f(s);
        } catch (const Error& e) {
            throw ConfigError(e.what());
        }
    };
}

void parse_data(const YAML::Node& n, DataConfig& d) {
    check_keys(n, "data", {"source", "path", "test_path", "classes", "per_class", "input_dim", "center_scale",
                           "noise_sigma", "train_fraction", "seed"});
    read(n, "data", "source", d.source);
    read(n, "data", "path", d.path);
    read(n, "data", "test_path", d.test_path);
    read(n, "data", "classes", d.blobs.classes);
    read(n, "data", "per_class", d.blobs.per_class);
    read(n, "data", "input_dim", d.blobs.input_dim);
    read(n, "data", "center_scale", d.blobs.center_scale);
    read(n, "data", "noise_sigma", d.blobs.noise_sigma);
    read(n, "data", "train_fraction", d.train_fraction);
    if (n["seed"]) {
        std::uint64_t s = 0;
        read(n, "data", "seed", s);
        d.seed = s;
    }
    if (d.source != "blobs" && d.source != "csv") {
        throw ConfigError("data.source must be 'blobs' or 'csv'");
    }
    if (d.source == "csv" && d.path.empty()) {
        throw ConfigError("data.path is required when data.source is 'csv'");
    }
}

void parse_model(const YAML::Node& n, RunConfig& c) {
    check_keys(n, "model", {"architecture", "embed_dim", "hidden_width", "activation", "normalize_output"});
    EmbedderSpec& m = c.train.model;
    read_enum(n, "model", "architecture", m.architecture, guarded(parse_architecture));
    read(n, "model", "embed_dim", m.embed_dim);
    read(n, "model", "hidden_width", m.hidden_width);
    read_enum(n, "model", "activation", m.activation, guarded(parse_activation));
    if (n["normalize_output"]) {
        bool v = true;
        read(n, "model", "normalize_output", v);
        c.model_normalize_output = v;
    }
}

void parse_loss(const YAML::Node& n, LossConfig& l) {
    check_keys(n, "loss", {"kind", "margin", "ms_alpha", "ms_beta", "ms_lambda", "ms_epsilon", "npair_reg_coeff",
                           "triplet_reduction"});
    read_enum(n, "loss", "kind", l.kind, parse_loss_kind);
    read(n, "loss", "margin", l.margin);
    read(n, "loss", "ms_alpha", l.ms_alpha);
    read(n, "loss", "ms_beta", l.ms_beta);
    read(n, "loss", "ms_lambda", l.ms_lambda);
    read(n, "loss", "ms_epsilon", l.ms_epsilon);
    read(n, "loss", "npair_reg_coeff", l.npair_reg_coeff);
    read_enum(n, "loss", "triplet_reduction", l.triplet_reduction, parse_reduction);
}

void parse_expansion(const YAML::Node& n, ExpansionConfig& e) {
    check_keys(n, "expansion", {"enabled", "n", "normalize", "rule", "pool"});
    read(n, "expansion", "enabled", e.enabled);
    read(n, "expansion", "n", e.n);
    read(n, "expansion", "normalize", e.normalize);
    read_enum(n, "expansion", "rule", e.rule, parse_rule);
    read_enum(n, "expansion", "pool", e.pool, parse_pool);
}

void parse_optimizer(const YAML::Node& n, OptimizerConfig& o) {
    check_keys(n, "optimizer", {"kind", "lr", "beta1", "beta2", "eps", "momentum"});
    read_enum(n, "optimizer", "kind", o.kind, guarded(parse_optimizer_kind));
    read(n, "optimizer", "lr", o.lr);
    read(n, "optimizer", "beta1", o.beta1);
    read(n, "optimizer", "beta2", o.beta2);
    read(n, "optimizer", "eps", o.eps);
    read(n, "optimizer", "momentum", o.momentum);
}

void parse_train(const YAML::Node& n, TrainConfig& t) {
    check_keys(n, "train", {"epochs", "steps_per_epoch", "classes_per_batch", "samples_per_class", "eval_every",
                            "recall_ks", "label_certainty", "train_recall"});
    read(n, "train", "epochs", t.epochs);
    read(n, "train", "steps_per_epoch", t.steps_per_epoch);
    read(n, "train", "classes_per_batch", t.batch.classes);
    read(n, "train", "samples_per_class", t.batch.per_class);
    read(n, "train", "eval_every", t.eval_every);
    read(n, "train", "recall_ks", t.recall_ks);
    read(n, "train", "label_certainty", t.label_certainty);
    read(n, "train", "train_recall", t.train_recall);
}

void parse_eval(const YAML::Node& n, EvalConfig& e) {
    check_keys(n, "eval", {"checkpoint", "recall_ks", "combine_counts", "robustness_trials"});
    read(n, "eval", "checkpoint", e.checkpoint);
    read(n, "eval", "recall_ks", e.recall_ks);
    read(n, "eval", "combine_counts", e.combine_counts);
    read(n, "eval", "robustness_trials", e.robustness_trials);
}

std::vector<LossKind> parse_kinds(const std::vector<std::string>& names) {
    std::vector<LossKind> out;
    for (const auto& s : names) {
        out.push_back(parse_loss_kind(s));
    }
    return out;
}

void parse_ablate(const YAML::Node& n, AblateConfig& a) {
    check_keys(n, "ablate", {"losses", "n_values", "normalize_values", "seeds"});
    if (n["losses"]) {
        std::vector<std::string> names;
        read(n, "ablate", "losses", names);
        a.losses = parse_kinds(names);
    }
    read(n, "ablate", "n_values", a.n_values);
    read(n, "ablate", "normalize_values", a.normalize_values);
    read(n, "ablate", "seeds", a.seeds);
    if (a.losses.empty() || a.n_values.empty() || a.normalize_values.empty() || a.seeds.empty()) {
        throw ConfigError("ablate lists must be non-empty");
    }
}

void parse_gradcheck(const YAML::Node& n, GradcheckSpec& g) {
    check_keys(n, "gradcheck", {"losses", "trials", "batch", "dim", "classes", "n", "h", "threshold",
                                "max_resamples", "corrupt_gradient"});
    if (n["losses"]) {
        std::vector<std::string> names;
        read(n, "gradcheck", "losses", names);
        g.variants.clear();
        for (const auto& s : names) {
            g.variants.push_back(LossVariant::parse(s));
        }
    }
    read(n, "gradcheck", "trials", g.trials);
    read(n, "gradcheck", "batch", g.batch);
    read(n, "gradcheck", "dim", g.dim);
    read(n, "gradcheck", "classes", g.classes);
    read(n, "gradcheck", "n", g.n);
    read(n, "gradcheck", "h", g.h);
    read(n, "gradcheck", "threshold", g.threshold);
    read(n, "gradcheck", "max_resamples", g.max_resamples);
    read(n, "gradcheck", "corrupt_gradient", g.corrupt_gradient);
    if (g.trials < 1) {
        throw ConfigError("gradcheck.trials must be >= 1");
    }
}

void parse_bench(const YAML::Node& n, BenchSpec& b) {
    check_keys(n, "bench", {"batch_sizes", "n_values", "dim", "samples_per_class", "repeats", "loss", "normalize"});
    read(n, "bench", "batch_sizes", b.batch_sizes);
    read(n, "bench", "n_values", b.n_values);
    read(n, "bench", "dim", b.dim);
    read(n, "bench", "samples_per_class", b.samples_per_class);
    read(n, "bench", "repeats", b.repeats);
    read_enum(n, "bench", "loss", b.loss, parse_loss_kind);
    read(n, "bench", "normalize", b.normalize);
}

void parse_expand(const YAML::Node& n, ExpandConfig& e) {
    check_keys(n, "expand", {"classes", "per_class"});
    read(n, "expand", "classes", e.classes);
    read(n, "expand", "per_class", e.per_class);
}

} // namespace

RunConfig parse_run_config(const std::string& yaml_text) {
    YAML::Node root;
    try {
        root = YAML::Load(yaml_text);
    } catch (const YAML::Exception& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
    RunConfig c;
    if (root.IsNull()) {
        c.resolve();
        return c;
    }
    check_keys(root, "", {"seed", "output_dir", "data", "model", "loss", "expansion", "optimizer", "train", "eval",
                          "ablate", "gradcheck", "bench", "expand"});
    read(root, "", "seed", c.seed);
    read(root, "", "output_dir", c.output_dir);
    if (root["data"]) parse_data(root["data"], c.data);
    if (root["model"]) parse_model(root["model"], c);
    if (root["loss"]) parse_loss(root["loss"], c.train.loss);
    if (root["expansion"]) parse_expansion(root["expansion"], c.train.loss.expansion);
    if (root["optimizer"]) parse_optimizer(root["optimizer"], c.train.optimizer);
    if (root["train"]) parse_train(root["train"], c.train);
    if (root["eval"]) parse_eval(root["eval"], c.eval);
    if (root["ablate"]) parse_ablate(root["ablate"], c.ablate);
    if (root["gradcheck"]) parse_gradcheck(root["gradcheck"], c.gradcheck);
    if (root["bench"]) parse_bench(root["bench"], c.bench);
    if (root["expand"]) parse_expand(root["expand"], c.expand);
    c.resolve();
    c.train.validate();
    return c;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot read config file '" + path + "'");
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_run_config(buf.str());
}

namespace {

template <typename T>
void emit_seq(YAML::Emitter& out, const char* key, const std::vector<T>& v) {
    out << YAML::Key << key << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (const auto& x : v) {
        out << x;
    }
    out << YAML::EndSeq;
}

} // namespace

std::string dump_run_config(const RunConfig& c) {
    YAML::Emitter out;
    out.SetDoublePrecision(17);
    out << YAML::BeginMap;
    out << YAML::Key << "seed" << YAML::Value << c.seed;
    out << YAML::Key << "output_dir" << YAML::Value << c.output_dir;

    out << YAML::Key << "data" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "source" << YAML::Value << c.data.source;
    if (!c.data.path.empty()) out << YAML::Key << "path" << YAML::Value << c.data.path;
    if (!c.data.test_path.empty()) out << YAML::Key << "test_path" << YAML::Value << c.data.test_path;
    out << YAML::Key << "classes" << YAML::Value << c.data.blobs.classes;
    out << YAML::Key << "per_class" << YAML::Value << c.data.blobs.per_class;
    out << YAML::Key << "input_dim" << YAML::Value << c.data.blobs.input_dim;
    out << YAML::Key << "center_scale" << YAML::Value << c.data.blobs.center_scale;
    out << YAML::Key << "noise_sigma" << YAML::Value << c.data.blobs.noise_sigma;
    out << YAML::Key << "train_fraction" << YAML::Value << c.data.train_fraction;
    if (c.data.seed) out << YAML::Key << "seed" << YAML::Value << *c.data.seed;
    out << YAML::EndMap;

    const EmbedderSpec& m = c.train.model;
    out << YAML::Key << "model" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "architecture" << YAML::Value << to_string(m.architecture);
    out << YAML::Key << "embed_dim" << YAML::Value << m.embed_dim;
    out << YAML::Key << "hidden_width" << YAML::Value << m.hidden_width;
    out << YAML::Key << "activation" << YAML::Value << to_string(m.activation);
    out << YAML::Key << "normalize_output" << YAML::Value << m.normalize_output;
    out << YAML::EndMap;

    const LossConfig& l = c.train.loss;
    out << YAML::Key << "loss" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "kind" << YAML::Value << to_string(l.kind);
    out << YAML::Key << "margin" << YAML::Value << l.margin;
    out << YAML::Key << "ms_alpha" << YAML::Value << l.ms_alpha;
    out << YAML::Key << "ms_beta" << YAML::Value << l.ms_beta;
    out << YAML::Key << "ms_lambda" << YAML::Value << l.ms_lambda;
    out << YAML::Key << "ms_epsilon" << YAML::Value << l.ms_epsilon;
    out << YAML::Key << "npair_reg_coeff" << YAML::Value << l.npair_reg_coeff;
    out << YAML::Key << "triplet_reduction" << YAML::Value << to_string(l.triplet_reduction);
    out << YAML::EndMap;

    const ExpansionConfig& e = l.expansion;
    out << YAML::Key << "expansion" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "enabled" << YAML::Value << e.enabled;
    out << YAML::Key << "n" << YAML::Value << e.n;
    out << YAML::Key << "normalize" << YAML::Value << e.normalize;
    out << YAML::Key << "rule" << YAML::Value << to_string(e.rule);
    out << YAML::Key << "pool" << YAML::Value << to_string(e.pool);
    out << YAML::EndMap;

    const OptimizerConfig& o = c.train.optimizer;
    out << YAML::Key << "optimizer" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "kind" << YAML::Value << to_string(o.kind);
    out << YAML::Key << "lr" << YAML::Value << o.lr;
    out << YAML::Key << "beta1" << YAML::Value << o.beta1;
    out << YAML::Key << "beta2" << YAML::Value << o.beta2;
    out << YAML::Key << "eps" << YAML::Value << o.eps;
    out << YAML::Key << "momentum" << YAML::Value << o.momentum;
    out << YAML::EndMap;

    const TrainConfig& t = c.train;
    out << YAML::Key << "train" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "epochs" << YAML::Value << t.epochs;
    out << YAML::Key << "steps_per_epoch" << YAML::Value << t.steps_per_epoch;
    out << YAML::Key << "classes_per_batch" << YAML::Value << t.batch.classes;
    out << YAML::Key << "samples_per_class" << YAML::Value << t.batch.per_class;
    out << YAML::Key << "eval_every" << YAML::Value << t.eval_every;
    emit_seq(out, "recall_ks", t.recall_ks);
    out << YAML::Key << "label_certainty" << YAML::Value << t.label_certainty;
    out << YAML::Key << "train_recall" << YAML::Value << t.train_recall;
    out << YAML::EndMap;

    out << YAML::Key << "eval" << YAML::Value << YAML::BeginMap;
    if (!c.eval.checkpoint.empty()) out << YAML::Key << "checkpoint" << YAML::Value << c.eval.checkpoint;
    emit_seq(out, "recall_ks", c.eval.recall_ks);
    emit_seq(out, "combine_counts", c.eval.combine_counts);
    out << YAML::Key << "robustness_trials" << YAML::Value << c.eval.robustness_trials;
    out << YAML::EndMap;

    std::vector<std::string> names;
    for (LossKind k : c.ablate.losses) names.push_back(to_string(k));
    out << YAML::Key << "ablate" << YAML::Value << YAML::BeginMap;
    emit_seq(out, "losses", names);
    emit_seq(out, "n_values", c.ablate.n_values);
    emit_seq(out, "normalize_values", c.ablate.normalize_values);
    emit_seq(out, "seeds", c.ablate.seeds);
    out << YAML::EndMap;

    names.clear();
    for (const LossVariant& v : c.gradcheck.variants) names.push_back(v.name());
    const GradcheckSpec& g = c.gradcheck;
    out << YAML::Key << "gradcheck" << YAML::Value << YAML::BeginMap;
    emit_seq(out, "losses", names);
    out << YAML::Key << "trials" << YAML::Value << g.trials;
    out << YAML::Key << "batch" << YAML::Value << g.batch;
    out << YAML::Key << "dim" << YAML::Value << g.dim;
    out << YAML::Key << "classes" << YAML::Value << g.classes;
    out << YAML::Key << "n" << YAML::Value << g.n;
    out << YAML::Key << "h" << YAML::Value << g.h;
    out << YAML::Key << "threshold" << YAML::Value << g.threshold;
    out << YAML::Key << "max_resamples" << YAML::Value << g.max_resamples;
    out << YAML::Key << "corrupt_gradient" << YAML::Value << g.corrupt_gradient;
    out << YAML::EndMap;

    const BenchSpec& b = c.bench;
    out << YAML::Key << "bench" << YAML::Value << YAML::BeginMap;
    emit_seq(out, "batch_sizes", b.batch_sizes);
    emit_seq(out, "n_values", b.n_values);
    out << YAML::Key << "dim" << YAML::Value << b.dim;
    out << YAML::Key << "samples_per_class" << YAML::Value << b.samples_per_class;
    out << YAML::Key << "repeats" << YAML::Value << b.repeats;
    out << YAML::Key << "loss" << YAML::Value << to_string(b.loss);
    out << YAML::Key << "normalize" << YAML::Value << b.normalize;
    out << YAML::EndMap;

    out << YAML::Key << "expand" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "classes" << YAML::Value << c.expand.classes;
    out << YAML::Key << "per_class" << YAML::Value << c.expand.per_class;
    out << YAML::EndMap;

    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

} // namespace ee
