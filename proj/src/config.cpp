// Copyright (c) 2026 The lossdecay Authors
// SPDX-License-Identifier: Apache-2.0

#include "lossdecay/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "lossdecay/errors.hpp"

namespace lossdecay {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string join_key(const std::string& prefix, const std::string& key) {
    return prefix.empty() ? key : prefix + "." + key;
}

std::string type_name(const json& j) { return j.type_name(); }

/// Typed, key-tracking view of one JSON object.
class Section {
public:
    Section(const json& j, std::string prefix) : j_(j), prefix_(std::move(prefix)) {
        if (!j_.is_object()) {
            throw ConfigError(prefix_, std::string("expected an object, got ") + type_name(j_));
        }
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    const json& raw(const std::string& key) {
        used_.insert(key);
        return j_.at(key);
    }

    std::string key(const std::string& k) const { return join_key(prefix_, k); }

    double number(const std::string& k, double fallback) {
        if (!has(k)) {
            return fallback;
        }
        const json& v = raw(k);
        if (!v.is_number()) {
            throw ConfigError(key(k), "expected a number, got " + type_name(v));
        }
        return v.get<double>();
    }

    std::int64_t integer(const std::string& k, std::int64_t fallback) {
        if (!has(k)) {
            return fallback;
        }
        return as_integer(raw(k), key(k));
    }

    int small_integer(const std::string& k, int fallback) {
        const std::int64_t v = integer(k, fallback);
        if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
            throw ConfigError(key(k), "integer out of range");
        }
        return static_cast<int>(v);
    }

    std::uint64_t unsigned_integer(const std::string& k, std::uint64_t fallback) {
        if (!has(k)) {
            return fallback;
        }
        const json& v = raw(k);
        if (v.is_number_unsigned()) {
            return v.get<std::uint64_t>();
        }
        if (v.is_number_integer() && v.get<std::int64_t>() >= 0) {
            return static_cast<std::uint64_t>(v.get<std::int64_t>());
        }
        throw ConfigError(key(k), "expected a non-negative integer");
    }

    std::string string(const std::string& k, const std::string& fallback) {
        if (!has(k)) {
            return fallback;
        }
        const json& v = raw(k);
        if (!v.is_string()) {
            throw ConfigError(key(k), "expected a string, got " + type_name(v));
        }
        return v.get<std::string>();
    }

    /// Rejects keys that were never read.
    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!used_.contains(it.key())) {
                throw ConfigError(key(it.key()), "unknown key");
            }
        }
    }

    static std::int64_t as_integer(const json& v, const std::string& key) {
        if (v.is_number_integer()) {
            if (v.is_number_unsigned() && v.get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX)) {
                throw ConfigError(key, "integer out of range");
            }
            return v.get<std::int64_t>();
        }
        if (v.is_number_float()) {
            const double d = v.get<double>();
            if (std::isfinite(d) && d == std::floor(d) && std::abs(d) < 9.0e15) {
                return static_cast<std::int64_t>(d);
            }
        }
        throw ConfigError(key, "expected an integer, got " + (v.is_number() ? v.dump() : type_name(v)));
    }

private:
    const json& j_;
    std::string prefix_;
    std::set<std::string> used_;
};

// Runs `parse` on a name, turning std::invalid_argument into a ConfigError.
template <class F>
auto named(const std::string& key, F&& parse) -> decltype(parse()) {
    try {
        return parse();
    } catch (const std::invalid_argument& e) {
        if (dynamic_cast<const ConfigError*>(&e) != nullptr) {
            throw;
        }
        throw ConfigError(key, e.what());
    }
}

ProblemSpec problem_from_json(const json& j, const std::string& key) {
    if (j.is_string()) {
        const ProblemKind kind = named(key, [&] { return problem_kind_from_name(j.get<std::string>()); });
        switch (kind) {
        case ProblemKind::QuadraticBowl:
            return QuadraticBowlSpec{};
        case ProblemKind::LogisticRegression:
            return LogisticRegressionSpec{};
        case ProblemKind::DeepMLP:
            return DeepMLPSpec{};
        }
    }
    Section s(j, key);
    const std::string kind_str = s.string("kind", "QuadraticBowl");
    const ProblemKind kind = named(s.key("kind"), [&] { return problem_kind_from_name(kind_str); });
    ProblemSpec out;
    switch (kind) {
    case ProblemKind::QuadraticBowl: {
        QuadraticBowlSpec q;
        q.dimension = s.small_integer("dimension", q.dimension);
        q.condition_number = s.number("condition_number", q.condition_number);
        q.noise_sigma = s.number("noise_sigma", q.noise_sigma);
        out = q;
        break;
    }
    case ProblemKind::LogisticRegression: {
        LogisticRegressionSpec l;
        l.n_features = s.small_integer("n_features", l.n_features);
        l.l2 = s.number("l2", l.l2);
        out = l;
        break;
    }
    case ProblemKind::DeepMLP: {
        DeepMLPSpec m;
        m.depth = s.small_integer("depth", m.depth);
        m.width = s.small_integer("width", m.width);
        const std::string act = s.string("activation", std::string(activation_name(m.activation)));
        m.activation = named(s.key("activation"), [&] { return activation_from_name(act); });
        m.init_gain = s.number("init_gain", m.init_gain);
        m.init_bias_std = s.number("init_bias_std", m.init_bias_std);
        m.l2 = s.number("l2", m.l2);
        out = m;
        break;
    }
    }
    s.finish();
    return out;
}

DatasetSpec dataset_from_json(const json& j, const std::string& key) {
    Section s(j, key);
    DatasetSpec d;
    const std::string kind = s.string("kind", std::string(dataset_kind_name(d.kind)));
    d.kind = named(s.key("kind"), [&] { return dataset_kind_from_name(kind); });
    d.n_samples = s.small_integer("n_samples", d.n_samples);
    d.n_classes = s.small_integer("n_classes", d.n_classes);
    d.n_features = s.small_integer("n_features", d.kind == DatasetKind::Spirals ? 2 : d.n_features);
    d.noise = s.number("noise", d.noise);
    d.seed = s.unsigned_integer("seed", d.seed);
    s.finish();
    return d;
}

OptimizerConfig optimizer_from_json(const json& j, const std::string& key) {
    Section s(j, key);
    const std::string rule_str = s.string("rule", "SGD");
    const UpdateRule rule = named(s.key("rule"), [&] { return update_rule_from_name(rule_str); });
    OptimizerConfig c = OptimizerConfig::defaults_for(rule);
    c.eta = s.number("eta", c.eta);
    c.mu = s.number("momentum", c.mu);
    c.beta1 = s.number("beta1", c.beta1);
    c.beta2 = s.number("beta2", c.beta2);
    c.eps_hat = s.number("eps", c.eps_hat);
    const std::string scaling = s.string("scaling", std::string(scaling_mode_name(c.scaling)));
    c.scaling = named(s.key("scaling"), [&] { return scaling_mode_from_name(scaling); });
    if (s.has("weight_decay")) {
        Section d(s.raw("weight_decay"), s.key("weight_decay"));
        const std::string mode = d.string("mode", "None");
        c.decay = named(d.key("mode"), [&] { return weight_decay_mode_from_name(mode); });
        c.lambda = d.number("lambda", 0.0);
        d.finish();
    }
    s.finish();
    return c;
}

Cadence cadence_from_json(const json& j, const std::string& key) {
    Cadence c;
    if (j.is_string()) {
        const auto v = j.get<std::string>();
        if (v == "epoch") {
            c.kind = Cadence::Kind::Epoch;
        } else if (v == "never") {
            c.kind = Cadence::Kind::Never;
        } else {
            throw ConfigError(key, "expected \"epoch\", \"never\" or a step count, got \"" + v + "\"");
        }
        return c;
    }
    const std::int64_t n = Section::as_integer(j, key);
    if (n < 0) {
        throw ConfigError(key, "step count must be >= 0");
    }
    c.kind = n == 0 ? Cadence::Kind::Never : Cadence::Kind::Steps;
    c.every = n == 0 ? 1 : n;
    return c;
}

ordered_json cadence_to_json(const Cadence& c) {
    switch (c.kind) {
    case Cadence::Kind::Never:
        return "never";
    case Cadence::Kind::Epoch:
        return "epoch";
    case Cadence::Kind::Steps:
        return c.every;
    }
    return "epoch";
}

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte) {
    std::size_t line = 1;
    std::size_t column = 1;
    const std::size_t end = std::min(text.size(), byte > 0 ? byte - 1 : 0);
    for (std::size_t i = 0; i < end; ++i) {
        if (text[i] == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
    }
    return {line, column};
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ParseError("cannot read config file '" + path.string() + "'", 0, 0);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

Override parse_override(std::string_view text) {
    const auto eq = text.find('=');
    if (eq == std::string_view::npos || eq == 0) {
        throw ConfigError(std::string(text), "override must look like key=value");
    }
    return Override{std::string(text.substr(0, eq)), std::string(text.substr(eq + 1))};
}

json parse_document(std::string_view text) {
    try {
        return json::parse(text.begin(), text.end(), nullptr, true, true);
    } catch (const json::parse_error& e) {
        const auto [line, column] = line_column(text, e.byte);
        std::string what = e.what();
        // Drop nlohmann's "[json.exception.parse_error.N] parse error at ...: " prefix.
        if (const auto pos = what.find("] "); pos != std::string::npos) {
            what = what.substr(pos + 2);
        }
        if (what.starts_with("parse error")) {
            if (const auto pos = what.find(": "); pos != std::string::npos) {
                what = what.substr(pos + 2);
            }
        }
        throw ParseError("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what, line,
                         column);
    }
}

void apply_overrides(json& doc, std::span<const Override> overrides) {
    for (const auto& o : overrides) {
        if (!doc.is_object()) {
            throw ConfigError(o.key, "cannot override a field of a non-object document");
        }
        json value;
        try {
            value = json::parse(o.value);
        } catch (const json::parse_error&) {
            value = o.value;
        }
        json* node = &doc;
        std::string_view rest = o.key;
        while (true) {
            const auto dot = rest.find('.');
            const std::string part(rest.substr(0, dot));
            if (part.empty()) {
                throw ConfigError(o.key, "empty path segment in override key");
            }
            if (dot == std::string_view::npos) {
                (*node)[part] = value;
                break;
            }
            json& child = (*node)[part];
            if (child.is_null()) {
                child = json::object();
            } else if (child.is_string() && part == "problem") {
                child = json{{"kind", child}};
            } else if (child.is_string() && part.ends_with("_schedule")) {
                child = json{{"preset", child}};
            }
            if (!child.is_object()) {
                throw ConfigError(o.key, "'" + part + "' is not a section and has no fields to override");
            }
            node = &child;
            rest = rest.substr(dot + 1);
        }
    }
}

ScheduleSpec schedule_from_json(const json& j, const std::string& key) {
    if (j.is_string()) {
        return named(key, [&] { return preset(j.get<std::string>()); });
    }
    Section s(j, key);
    ScheduleSpec spec;
    if (s.has("preset")) {
        if (s.has("kind")) {
            throw ConfigError(s.key("preset"), "give either preset or kind, not both");
        }
        const std::string name = s.string("preset", "");
        spec = named(s.key("preset"), [&] { return preset(name); });
    } else {
        const std::string kind_str = s.string("kind", "Constant");
        const ScheduleKind kind = named(s.key("kind"), [&] { return kind_from_name(kind_str); });
        switch (kind) {
        case ScheduleKind::Constant:
            spec.params = schedule::Constant{s.number("value", 1.0)};
            break;
        case ScheduleKind::LinearDecrease: {
            schedule::LinearDecrease p;
            p.w_start = s.number("w_start", p.w_start);
            p.w_end = s.number("w_end", p.w_end);
            spec.params = p;
            break;
        }
        case ScheduleKind::PiecewiseLinear: {
            schedule::PiecewiseLinear p;
            if (s.has("knots")) {
                const json& knots = s.raw("knots");
                if (!knots.is_array()) {
                    throw ConfigError(s.key("knots"), "expected an array of [fraction, weight] pairs");
                }
                for (std::size_t i = 0; i < knots.size(); ++i) {
                    const json& k = knots[i];
                    if (!k.is_array() || k.size() != 2 || !k[0].is_number() || !k[1].is_number()) {
                        throw ConfigError(s.key("knots") + "[" + std::to_string(i) + "]",
                                          "expected a [fraction, weight] pair");
                    }
                    p.knots.push_back({k[0].get<double>(), k[1].get<double>()});
                }
            }
            spec.params = p;
            break;
        }
        case ScheduleKind::PiecewiseConstant: {
            schedule::PiecewiseConstant p;
            for (const char* field : {"milestones", "factors"}) {
                if (!s.has(field)) {
                    continue;
                }
                const json& arr = s.raw(field);
                if (!arr.is_array()) {
                    throw ConfigError(s.key(field), "expected an array of numbers");
                }
                auto& dest = std::string_view(field) == "milestones" ? p.milestones : p.factors;
                for (const auto& x : arr) {
                    if (!x.is_number()) {
                        throw ConfigError(s.key(field), "expected an array of numbers");
                    }
                    dest.push_back(x.get<double>());
                }
            }
            spec.params = p;
            break;
        }
        case ScheduleKind::PolyDecay:
            spec.params = schedule::PolyDecay{s.number("power", 0.9)};
            break;
        case ScheduleKind::RandomUniform: {
            schedule::RandomUniform p;
            p.lo = s.number("lo", p.lo);
            p.hi = s.number("hi", p.hi);
            spec.params = p;
            break;
        }
        }
    }
    if (s.has("granularity")) {
        const std::string g = s.string("granularity", "");
        spec.granularity = named(s.key("granularity"), [&] { return granularity_from_name(g); });
    }
    s.finish();
    try {
        spec.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(key, e.what());
    }
    return spec;
}

ExperimentConfig config_from_json(const json& doc, const std::string& key_prefix) {
    Section s(doc, key_prefix);
    ExperimentConfig c;
    c.id = s.string("id", c.id);
    if (s.has("problem")) {
        c.problem = problem_from_json(s.raw("problem"), s.key("problem"));
    }
    if (s.has("dataset")) {
        c.dataset = dataset_from_json(s.raw("dataset"), s.key("dataset"));
    } else if (problem_kind(c.problem) != ProblemKind::QuadraticBowl) {
        c.dataset = DatasetSpec{};
    }
    if (s.has("optimizer")) {
        c.optimizer = optimizer_from_json(s.raw("optimizer"), s.key("optimizer"));
    }
    if (s.has("weight_schedule")) {
        c.weight_schedule = schedule_from_json(s.raw("weight_schedule"), s.key("weight_schedule"));
    }
    if (s.has("lr_schedule")) {
        c.lr_schedule = schedule_from_json(s.raw("lr_schedule"), s.key("lr_schedule"));
    }
    c.epochs = s.small_integer("epochs", c.epochs);
    c.batch_size = s.small_integer("batch_size", c.batch_size);
    c.steps_per_epoch = s.small_integer("steps_per_epoch", c.steps_per_epoch);
    c.seed = s.unsigned_integer("seed", c.seed);
    if (s.has("probe_every")) {
        c.probe_every = cadence_from_json(s.raw("probe_every"), s.key("probe_every"));
    }
    if (s.has("eval_every")) {
        c.eval_every = cadence_from_json(s.raw("eval_every"), s.key("eval_every"));
    }
    c.output_path = s.string("output_path", c.output_path);
    if (s.has("plateau")) {
        Section p(s.raw("plateau"), s.key("plateau"));
        if (p.has("tol") && !p.raw("tol").is_null()) {
            c.plateau.tol = p.number("tol", 0.0);
        }
        c.plateau.window = p.small_integer("window", c.plateau.window);
        p.finish();
    }
    s.finish();

    try {
        c.validate();
    } catch (const ConfigError& e) {
        if (key_prefix.empty()) {
            throw;
        }
        throw ConfigError(join_key(key_prefix, e.key()), std::string(e.what()).substr(e.key().size() + 2));
    }
    if (c.output_path.empty()) {
        throw ConfigError(s.key("output_path"), "must not be empty");
    }
    return c;
}

std::vector<ExperimentConfig> sweep_from_json(const json& doc, std::span<const Override> overrides) {
    json defaults = json::object();
    const json* runs = &doc;
    if (doc.is_object()) {
        Section s(doc, "");
        if (s.has("defaults")) {
            defaults = s.raw("defaults");
            if (!defaults.is_object()) {
                throw ConfigError("defaults", "expected an object");
            }
        }
        if (!s.has("runs")) {
            throw ConfigError("runs", "missing list of runs");
        }
        runs = &s.raw("runs");
        s.finish();
    }
    if (!runs->is_array()) {
        throw ConfigError("runs", "expected an array of run configs");
    }
    if (runs->empty()) {
        throw ConfigError("runs", "must contain at least one run");
    }
    std::vector<ExperimentConfig> out;
    out.reserve(runs->size());
    for (std::size_t i = 0; i < runs->size(); ++i) {
        const std::string prefix = "runs[" + std::to_string(i) + "]";
        const json& entry = (*runs)[i];
        if (!entry.is_object()) {
            throw ConfigError(prefix, "expected an object");
        }
        json merged = defaults;
        merged.merge_patch(entry);
        if (!merged.contains("id")) {
            merged["id"] = "run-" + std::to_string(i);
        }
        if (!merged.contains("output_path") && merged["id"].is_string()) {
            merged["output_path"] = merged["id"].get<std::string>() + ".csv";
        }
        apply_overrides(merged, overrides);
        out.push_back(config_from_json(merged, prefix));
    }
    return out;
}

ExperimentConfig parse_config_text(std::string_view text, std::span<const Override> overrides) {
    json doc = parse_document(text);
    apply_overrides(doc, overrides);
    return config_from_json(doc);
}

ExperimentConfig parse_config_file(const std::filesystem::path& path, std::span<const Override> overrides) {
    return parse_config_text(read_file(path), overrides);
}

std::vector<ExperimentConfig> parse_sweep_text(std::string_view text, std::span<const Override> overrides) {
    return sweep_from_json(parse_document(text), overrides);
}

std::vector<ExperimentConfig> parse_sweep_file(const std::filesystem::path& path,
                                               std::span<const Override> overrides) {
    return parse_sweep_text(read_file(path), overrides);
}

ordered_json to_json(const ScheduleSpec& spec) {
    ordered_json j;
    j["kind"] = std::string(kind_name(spec.kind()));
    std::visit(
        [&j](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, schedule::Constant>) {
                j["value"] = p.value;
            } else if constexpr (std::is_same_v<T, schedule::LinearDecrease>) {
                j["w_start"] = p.w_start;
                j["w_end"] = p.w_end;
            } else if constexpr (std::is_same_v<T, schedule::PiecewiseLinear>) {
                ordered_json knots = ordered_json::array();
                for (const auto& k : p.knots) {
                    knots.push_back({k.fraction, k.weight});
                }
                j["knots"] = knots;
            } else if constexpr (std::is_same_v<T, schedule::PiecewiseConstant>) {
                j["milestones"] = p.milestones;
                j["factors"] = p.factors;
            } else if constexpr (std::is_same_v<T, schedule::PolyDecay>) {
                j["power"] = p.power;
            } else {
                j["lo"] = p.lo;
                j["hi"] = p.hi;
            }
        },
        spec.params);
    j["granularity"] = std::string(granularity_name(spec.granularity));
    return j;
}

ordered_json to_json(const ExperimentConfig& c) {
    ordered_json j;
    j["id"] = c.id;
    ordered_json problem;
    problem["kind"] = std::string(problem_kind_name(problem_kind(c.problem)));
    std::visit(
        [&problem](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, QuadraticBowlSpec>) {
                problem["dimension"] = p.dimension;
                problem["condition_number"] = p.condition_number;
                problem["noise_sigma"] = p.noise_sigma;
            } else if constexpr (std::is_same_v<T, LogisticRegressionSpec>) {
                problem["n_features"] = p.n_features;
                problem["l2"] = p.l2;
            } else {
                problem["depth"] = p.depth;
                problem["width"] = p.width;
                problem["activation"] = std::string(activation_name(p.activation));
                problem["init_gain"] = p.init_gain;
                problem["init_bias_std"] = p.init_bias_std;
                problem["l2"] = p.l2;
            }
        },
        c.problem);
    j["problem"] = problem;
    if (c.dataset) {
        const auto& d = *c.dataset;
        j["dataset"] = {{"kind", std::string(dataset_kind_name(d.kind))},
                        {"n_samples", d.n_samples},
                        {"n_classes", d.n_classes},
                        {"n_features", d.n_features},
                        {"noise", d.noise},
                        {"seed", d.seed}};
    }
    const auto& o = c.optimizer;
    j["optimizer"] = {{"rule", std::string(update_rule_name(o.rule))},
                      {"eta", o.eta},
                      {"momentum", o.mu},
                      {"beta1", o.beta1},
                      {"beta2", o.beta2},
                      {"eps", o.eps_hat},
                      {"scaling", std::string(scaling_mode_name(o.scaling))},
                      {"weight_decay", {{"mode", std::string(weight_decay_mode_name(o.decay))}, {"lambda", o.lambda}}}};
    j["weight_schedule"] = to_json(c.weight_schedule);
    j["lr_schedule"] = to_json(c.lr_schedule);
    j["epochs"] = c.epochs;
    j["batch_size"] = c.batch_size;
    j["steps_per_epoch"] = c.steps_per_epoch;
    j["seed"] = c.seed;
    j["probe_every"] = cadence_to_json(c.probe_every);
    j["eval_every"] = cadence_to_json(c.eval_every);
    j["output_path"] = c.output_path;
    ordered_json plateau;
    plateau["tol"] = c.plateau.tol ? ordered_json(*c.plateau.tol) : ordered_json(nullptr);
    plateau["window"] = c.plateau.window;
    j["plateau"] = plateau;
    return j;
}

} // namespace lossdecay
