#include "paynet/config.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace paynet {

using Json = nlohmann::ordered_json;

namespace {

void allow_keys(const Json& j, const std::string& where, std::initializer_list<const char*> keys) {
    if (!j.is_object()) throw ConfigError("config: '" + where + "' must be an object");
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [k, v] : j.items())
        if (!allowed.count(k)) throw ConfigError("config: unknown key '" + where + "." + k + "'");
}

template <typename T>
void read(const Json& j, const char* key, T& out, const std::string& where) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError("config: bad value for '" + where + "." + key + "'");
    }
}

template <typename T>
void read_optional(const Json& j, const char* key, std::optional<T>& out, const std::string& where) {
    if (!j.contains(key)) return;
    if (j.at(key).is_null()) {
        out.reset();
        return;
    }
    T v{};
    read(j, key, v, where);
    out = v;
}

void read_quarter(const Json& j, const char* key, Quarter& out, const std::string& where) {
    if (!j.contains(key)) return;
    if (!j.at(key).is_string()) throw ConfigError("config: '" + where + "." + key + "' must be a string like 2017Q1");
    out = Quarter::parse(j.at(key).get<std::string>());
}

void read_optional_quarter(const Json& j, const char* key, std::optional<Quarter>& out, const std::string& where) {
    if (!j.contains(key)) return;
    if (j.at(key).is_null()) {
        out.reset();
        return;
    }
    Quarter q;
    read_quarter(j, key, q, where);
    out = q;
}

Json tree_json(const TreeParams& p) {
    return Json{{"max_depth", p.max_depth},
                {"min_leaf", p.min_leaf},
                {"feature_subsample", p.feature_subsample},
                {"max_bins", p.max_bins}};
}

void read_tree(const Json& j, TreeParams& p, const std::string& where) {
    read(j, "max_depth", p.max_depth, where);
    read(j, "min_leaf", p.min_leaf, where);
    read(j, "feature_subsample", p.feature_subsample, where);
    read(j, "max_bins", p.max_bins, where);
}

Json optional_json(const std::optional<std::string>& v) { return v ? Json(*v) : Json(nullptr); }

}  // namespace

std::string RunConfig::to_json_text() const {
    Json j;
    j["input"] = optional_json(input);
    j["roster"] = optional_json(roster);
    j["output"] = output;
    j["seed"] = seed;
    j["jobs"] = jobs;
    j["sample"] = {{"first", first ? Json(first->str()) : Json(nullptr)},
                   {"last", last ? Json(last->str()) : Json(nullptr)}};
    j["ingest"] = {{"keep_self_flows", keep_self_flows}};
    j["growth"] = {{"clip", clip ? Json(*clip) : Json(nullptr)}};
    j["features"] = {
        {"weighted_betweenness", snapshot.features.weighted_betweenness},
        {"eigen_direction", snapshot.features.eigen_direction == EigenDirection::left ? "left" : "right"},
        {"two_hop_normalized", snapshot.two_hop_normalized},
    };
    j["dataset"] = {
        {"drop_missing_lag2", dataset.drop_missing_lag2},
        {"fixed_effects", dataset.fixed_effects == FixedEffects::categorical ? "categorical" : "one_hot"},
        {"network_columns", dataset.network_columns},
    };
    Json forest = tree_json(model.forest.tree);
    forest["n_trees"] = model.forest.n_trees;
    forest["bootstrap"] = model.forest.bootstrap;
    Json boost = tree_json(model.boost.tree);
    boost["n_rounds"] = model.boost.n_rounds;
    boost["learning_rate"] = model.boost.learning_rate;
    boost["patience"] = model.boost.patience;
    boost["validation_fraction"] = model.boost.validation_fraction;
    j["model"] = {{"kind", model.kind == ModelKind::forest ? "forest" : "boosted"},
                  {"forest", forest},
                  {"boost", boost}};
    j["windows"] = {{"min_train", min_train}, {"min_test_rows", min_test_rows}};
    j["dm"] = {{"hac_lag", dm_hac_lag ? Json(*dm_hac_lag) : Json(nullptr)}};
    Json ps = Json::array();
    for (const auto& p : periods) ps.push_back({{"name", p.name}, {"first", p.first.str()}, {"last", p.last.str()}});
    j["periods"] = ps;
    j["report"] = {{"top_industries", top_industries}};
    j["synth"] = {
        {"sectors", synth.sectors},
        {"first", synth.first.str()},
        {"last", synth.last.str()},
        {"density", synth.density},
        {"shock_first", synth.shock_first.str()},
        {"shock_last", synth.shock_last.str()},
        {"shock_density_drop", synth.shock_density_drop},
        {"signal", synth.signal},
        {"clustering_weight", synth.clustering_weight},
        {"persistence", synth.persistence},
        {"shock_persistence", synth.shock_persistence},
        {"growth_noise", synth.growth_noise},
        {"level_shock", synth.level_shock},
        {"seasonal_amplitude", synth.seasonal_amplitude},
        {"size_sigma", synth.size_sigma},
        {"pair_sigma", synth.pair_sigma},
        {"activity", synth.activity},
        {"edge_noise", synth.edge_noise},
        {"base_flow_gbp", synth.base_flow_gbp},
    };
    return j.dump(2) + "\n";
}

RunConfig RunConfig::from_json_text(const std::string& text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    RunConfig c;
    allow_keys(j, "config",
               {"input", "roster", "output", "seed", "jobs", "sample", "ingest", "growth", "features", "dataset", "model",
                "windows", "dm", "periods", "report", "synth"});
    read_optional(j, "input", c.input, "config");
    read_optional(j, "roster", c.roster, "config");
    read(j, "output", c.output, "config");
    read(j, "seed", c.seed, "config");
    read(j, "jobs", c.jobs, "config");
    if (j.contains("sample")) {
        const auto& s = j["sample"];
        allow_keys(s, "sample", {"first", "last"});
        read_optional_quarter(s, "first", c.first, "sample");
        read_optional_quarter(s, "last", c.last, "sample");
    }
    if (j.contains("ingest")) {
        allow_keys(j["ingest"], "ingest", {"keep_self_flows"});
        read(j["ingest"], "keep_self_flows", c.keep_self_flows, "ingest");
    }
    if (j.contains("growth")) {
        allow_keys(j["growth"], "growth", {"clip"});
        read_optional(j["growth"], "clip", c.clip, "growth");
    }
    if (j.contains("features")) {
        const auto& f = j["features"];
        allow_keys(f, "features", {"weighted_betweenness", "eigen_direction", "two_hop_normalized"});
        read(f, "weighted_betweenness", c.snapshot.features.weighted_betweenness, "features");
        read(f, "two_hop_normalized", c.snapshot.two_hop_normalized, "features");
        std::string dir = "left";
        read(f, "eigen_direction", dir, "features");
        if (dir == "left")
            c.snapshot.features.eigen_direction = EigenDirection::left;
        else if (dir == "right")
            c.snapshot.features.eigen_direction = EigenDirection::right;
        else
            throw ConfigError("config: features.eigen_direction must be 'left' or 'right'");
    }
    if (j.contains("dataset")) {
        const auto& d = j["dataset"];
        allow_keys(d, "dataset", {"drop_missing_lag2", "fixed_effects", "network_columns"});
        read(d, "drop_missing_lag2", c.dataset.drop_missing_lag2, "dataset");
        read(d, "network_columns", c.dataset.network_columns, "dataset");
        std::string fe = "categorical";
        read(d, "fixed_effects", fe, "dataset");
        if (fe == "categorical")
            c.dataset.fixed_effects = FixedEffects::categorical;
        else if (fe == "one_hot")
            c.dataset.fixed_effects = FixedEffects::one_hot;
        else
            throw ConfigError("config: dataset.fixed_effects must be 'categorical' or 'one_hot'");
    }
    if (j.contains("model")) {
        const auto& m = j["model"];
        allow_keys(m, "model", {"kind", "forest", "boost"});
        std::string kind = "forest";
        read(m, "kind", kind, "model");
        if (kind == "forest")
            c.model.kind = ModelKind::forest;
        else if (kind == "boosted")
            c.model.kind = ModelKind::boosted;
        else
            throw ConfigError("config: model.kind must be 'forest' or 'boosted'");
        if (m.contains("forest")) {
            const auto& f = m["forest"];
            allow_keys(f, "model.forest",
                       {"n_trees", "bootstrap", "max_depth", "min_leaf", "feature_subsample", "max_bins"});
            read(f, "n_trees", c.model.forest.n_trees, "model.forest");
            read(f, "bootstrap", c.model.forest.bootstrap, "model.forest");
            read_tree(f, c.model.forest.tree, "model.forest");
        }
        if (m.contains("boost")) {
            const auto& b = m["boost"];
            allow_keys(b, "model.boost",
                       {"n_rounds", "learning_rate", "patience", "validation_fraction", "max_depth", "min_leaf",
                        "feature_subsample", "max_bins"});
            read(b, "n_rounds", c.model.boost.n_rounds, "model.boost");
            read(b, "learning_rate", c.model.boost.learning_rate, "model.boost");
            read(b, "patience", c.model.boost.patience, "model.boost");
            read(b, "validation_fraction", c.model.boost.validation_fraction, "model.boost");
            read_tree(b, c.model.boost.tree, "model.boost");
        }
    }
    if (j.contains("windows")) {
        allow_keys(j["windows"], "windows", {"min_train", "min_test_rows"});
        read(j["windows"], "min_train", c.min_train, "windows");
        read(j["windows"], "min_test_rows", c.min_test_rows, "windows");
    }
    if (j.contains("dm")) {
        allow_keys(j["dm"], "dm", {"hac_lag"});
        read_optional(j["dm"], "hac_lag", c.dm_hac_lag, "dm");
    }
    if (j.contains("periods")) {
        if (!j["periods"].is_array()) throw ConfigError("config: 'periods' must be an array");
        c.periods.clear();
        for (const auto& p : j["periods"]) {
            allow_keys(p, "periods[]", {"name", "first", "last"});
            Period period;
            read(p, "name", period.name, "periods[]");
            if (!p.contains("first") || !p.contains("last"))
                throw ConfigError("config: each period needs 'first' and 'last'");
            read_quarter(p, "first", period.first, "periods[]");
            read_quarter(p, "last", period.last, "periods[]");
            c.periods.push_back(period);
        }
    }
    if (j.contains("report")) {
        allow_keys(j["report"], "report", {"top_industries"});
        read(j["report"], "top_industries", c.top_industries, "report");
    }
    if (j.contains("synth")) {
        const auto& s = j["synth"];
        allow_keys(s, "synth",
                   {"sectors", "first", "last", "density", "shock_first", "shock_last", "shock_density_drop", "signal",
                    "clustering_weight", "persistence", "shock_persistence", "growth_noise", "level_shock",
                    "seasonal_amplitude", "size_sigma", "pair_sigma", "activity", "edge_noise", "base_flow_gbp"});
        auto& y = c.synth;
        read(s, "sectors", y.sectors, "synth");
        read_quarter(s, "first", y.first, "synth");
        read_quarter(s, "last", y.last, "synth");
        read(s, "density", y.density, "synth");
        read_quarter(s, "shock_first", y.shock_first, "synth");
        read_quarter(s, "shock_last", y.shock_last, "synth");
        read(s, "shock_density_drop", y.shock_density_drop, "synth");
        read(s, "signal", y.signal, "synth");
        read(s, "clustering_weight", y.clustering_weight, "synth");
        read(s, "persistence", y.persistence, "synth");
        read(s, "shock_persistence", y.shock_persistence, "synth");
        read(s, "growth_noise", y.growth_noise, "synth");
        read(s, "level_shock", y.level_shock, "synth");
        read(s, "seasonal_amplitude", y.seasonal_amplitude, "synth");
        read(s, "size_sigma", y.size_sigma, "synth");
        read(s, "pair_sigma", y.pair_sigma, "synth");
        read(s, "activity", y.activity, "synth");
        read(s, "edge_noise", y.edge_noise, "synth");
        read(s, "base_flow_gbp", y.base_flow_gbp, "synth");
    }
    c.validate();
    return c;
}

RunConfig RunConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str());
}

std::uint64_t RunConfig::hash() const {
    RunConfig c = *this;
    c.input.reset();
    c.roster.reset();
    c.output.clear();
    c.seed = 0;
    c.jobs = 0;
    return fnv1a(c.to_json_text());
}

void RunConfig::validate() const {
    if (clip && !(*clip > 0.0)) throw ConfigError("config: growth.clip must be > 0");
    if (first && last && *last < *first) throw ConfigError("config: sample.last precedes sample.first");
    if (min_train < 2) throw ConfigError("config: windows.min_train must be >= 2");
    if (model.forest.n_trees < 1) throw ConfigError("config: model.forest.n_trees must be >= 1");
    if (!(model.boost.learning_rate > 0.0 && model.boost.learning_rate <= 1.0))
        throw ConfigError("config: model.boost.learning_rate must lie in (0, 1]");
    for (const TreeParams* t : {&model.forest.tree, &model.boost.tree}) {
        if (t->min_leaf < 1) throw ConfigError("config: min_leaf must be >= 1");
        if (!(t->feature_subsample > 0.0 && t->feature_subsample <= 1.0))
            throw ConfigError("config: feature_subsample must lie in (0, 1]");
        if (t->max_bins < 2 || t->max_bins > 65536) throw ConfigError("config: max_bins must lie in [2, 65536]");
    }
    for (const auto& name : dataset.network_columns) {
        const auto& all = network_column_names();
        if (std::find(all.begin(), all.end(), name) == all.end())
            throw ConfigError("config: unknown network column '" + name + "'");
    }
    if (periods.empty()) throw ConfigError("config: at least one period is required");
    for (std::size_t a = 0; a < periods.size(); ++a) {
        if (periods[a].last < periods[a].first) throw ConfigError("config: period '" + periods[a].name + "' is empty");
        for (std::size_t b = a + 1; b < periods.size(); ++b)
            if (!(periods[a].last < periods[b].first || periods[b].last < periods[a].first))
                throw ConfigError("config: periods '" + periods[a].name + "' and '" + periods[b].name + "' overlap");
    }
    synth.validate();
}

}  // namespace paynet
