#include "kgrec/filter/filter_spec.hpp"

#include <fstream>

#include "json.hpp"
#include "kgrec/common/error.hpp"
#include "kgrec/rdf/vocabulary.hpp"

namespace kgrec::filter {

using rdf::vocab::crm;

std::string_view to_string(FilterKind kind) {
    switch (kind) {
        case FilterKind::SharedValue: return "SharedValue";
        case FilterKind::TemporalProximity: return "TemporalProximity";
        case FilterKind::SharedPathValue: return "SharedPathValue";
    }
    return "?";
}

FilterKind parse_filter_kind(std::string_view name) {
    for (auto k : {FilterKind::SharedValue, FilterKind::TemporalProximity, FilterKind::SharedPathValue}) {
        if (name == to_string(k)) return k;
    }
    throw ConfigError("unknown filter kind '" + std::string(name) + "'");
}

PropertyPath parse_path(std::string_view text) {
    PropertyPath path;
    std::size_t i = 0;
    while (i <= text.size()) {
        PathStep step;
        if (i < text.size() && text[i] == '^') {
            step.direction = Direction::Inverse;
            ++i;
        }
        std::size_t end;
        if (i < text.size() && text[i] == '<') {
            end = text.find('>', i);
            if (end == std::string_view::npos) throw ConfigError("unterminated IRI in path '" + std::string(text) + "'");
            ++end;
        } else {
            end = text.find('/', i);
            if (end == std::string_view::npos) end = text.size();
        }
        const auto token = text.substr(i, end - i);
        if (token.empty()) throw ConfigError("empty step in path '" + std::string(text) + "'");
        step.predicate = rdf::vocab::expand_curie(token);
        path.steps.push_back(std::move(step));
        if (end == text.size()) break;
        if (text[end] != '/') throw ConfigError("expected '/' in path '" + std::string(text) + "'");
        i = end + 1;
    }
    if (path.steps.empty() || path.steps.size() > 3) {
        throw ConfigError("path '" + std::string(text) + "' must have 1 to 3 steps");
    }
    return path;
}

std::string to_string(const PropertyPath& path) {
    std::string out;
    for (const auto& step : path.steps) {
        if (!out.empty()) out += '/';
        if (step.direction == Direction::Inverse) out += '^';
        out += rdf::vocab::compact_iri(step.predicate);
    }
    return out;
}

void FilterSpec::validate() const {
    if (name.empty()) throw ConfigError("filter without a name");
    if (properties.empty()) throw ConfigError("filter '" + name + "' has no property paths");
    for (const auto& p : properties) {
        if (p.steps.empty() || p.steps.size() > 3) throw ConfigError("filter '" + name + "': path length must be 1..3");
        if (kind == FilterKind::SharedValue && (p.steps.size() != 1 || p.steps[0].direction != Direction::Forward)) {
            throw ConfigError("filter '" + name + "': SharedValue paths are single forward predicates");
        }
    }
    if (kind == FilterKind::TemporalProximity && threshold_years <= 0) {
        throw ConfigError("filter '" + name + "': threshold_years must be positive");
    }
}

std::vector<FilterSpec> builtin_filters() {
    auto paths = [](std::initializer_list<std::string_view> texts) {
        std::vector<PropertyPath> out;
        for (auto t : texts) out.push_back(parse_path(t));
        return out;
    };
    return {
        {"same_objects_connection", FilterKind::SharedPathValue, paths({"crm:P12i_was_present_at/^crm:P67_refers_to"}),
         crm("E22_Man-Made_Object"), 10},
        {"same_location", FilterKind::SharedValue, paths({"crm:P74_has_current_or_former_residence"}), {}, 10},
        {"same_events", FilterKind::SharedValue,
         paths({"crm:P11i_participated_in", "crm:P12i_was_present_at", "crm:P14i_performed"}), {}, 10},
        {"same_identification", FilterKind::SharedValue, paths({"crm:P1_is_identified_by"}), {}, 10},
        {"same_production", FilterKind::SharedPathValue, paths({"^crm:P14_carried_out_by"}), crm("E12_Production"), 10},
        {"same_occurs_in", FilterKind::SharedPathValue, paths({"^crm:P67_refers_to"}), {}, 10},
        {"close_birth_dates", FilterKind::TemporalProximity,
         paths({"crm:P98i_was_born/crm:P4_has_time-span/crm:P82a_begin_of_the_begin"}), {}, 10},
        {"close_death_dates", FilterKind::TemporalProximity,
         paths({"crm:P100i_died_in/crm:P4_has_time-span/crm:P82b_end_of_the_end"}), {}, 10},
        {"same_place_of_birth", FilterKind::SharedPathValue, paths({"crm:P98i_was_born/crm:P7_took_place_at"}), {}, 10},
    };
}

std::vector<std::string> default_allowed_classes() { return {crm("E39_Actor"), crm("E21_Person")}; }

namespace {

FilterSpec spec_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("filter spec must be a JSON object");
    for (const auto& [key, _] : j.items()) {
        if (key != "name" && key != "kind" && key != "paths" && key != "value_type" && key != "threshold_years") {
            throw ConfigError("unknown filter spec key '" + key + "'");
        }
    }
    FilterSpec spec;
    try {
        spec.name = j.at("name").get<std::string>();
        spec.kind = parse_filter_kind(j.at("kind").get<std::string>());
        for (const auto& p : j.at("paths")) spec.properties.push_back(parse_path(p.get<std::string>()));
        if (j.contains("value_type")) spec.value_type = rdf::vocab::expand_curie(j["value_type"].get<std::string>());
        if (j.contains("threshold_years")) spec.threshold_years = j["threshold_years"].get<std::int64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad filter spec: ") + e.what());
    }
    spec.validate();
    return spec;
}

}  // namespace

FilterConfig parse_filter_config(std::istream& in) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("filter config is not valid JSON: ") + e.what());
    }
    FilterConfig config;
    config.allowed_classes = default_allowed_classes();
    const nlohmann::json* specs = &doc;
    if (doc.is_object()) {
        if (!doc.contains("filters")) throw ConfigError("filter config object needs a 'filters' array");
        specs = &doc["filters"];
        if (doc.contains("allowed_classes")) {
            config.allowed_classes.clear();
            for (const auto& c : doc["allowed_classes"]) {
                if (!c.is_string()) throw ConfigError("allowed_classes entries must be strings");
                config.allowed_classes.push_back(rdf::vocab::expand_curie(c.get<std::string>()));
            }
        }
    }
    if (!specs->is_array() || specs->empty()) throw ConfigError("filter config needs a non-empty list of filters");
    for (const auto& j : *specs) config.specs.push_back(spec_from_json(j));
    return config;
}

FilterConfig load_filter_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open filter config " + path.string());
    return parse_filter_config(in);
}

FilterConfig resolve_filter_config(std::string_view source) {
    if (source.empty() || source == "builtin") return {builtin_filters(), default_allowed_classes()};
    return load_filter_config(std::filesystem::path(source));
}

}  // namespace kgrec::filter
