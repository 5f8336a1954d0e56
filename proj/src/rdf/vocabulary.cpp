#include "kgrec/rdf/vocabulary.hpp"

#include <array>
#include <utility>

namespace kgrec::rdf::vocab {

namespace {
constexpr std::array<std::pair<std::string_view, std::string_view>, 4> kPrefixes{{
    {"crm:", kCrm},
    {"rdf:", kRdf},
    {"rdfs:", kRdfs},
    {"xsd:", kXsd},
}};
}  // namespace

std::string expand_curie(std::string_view name) {
    if (name.size() >= 2 && name.front() == '<' && name.back() == '>') {
        return std::string(name.substr(1, name.size() - 2));
    }
    for (const auto& [prefix, ns] : kPrefixes) {
        if (name.starts_with(prefix)) return std::string(ns) + std::string(name.substr(prefix.size()));
    }
    return std::string(name);
}

std::string compact_iri(std::string_view iri) {
    for (const auto& [prefix, ns] : kPrefixes) {
        if (iri.starts_with(ns) && iri.size() > ns.size() &&
            iri.substr(ns.size()).find_first_of("/#") == std::string_view::npos) {
            return std::string(prefix) + std::string(iri.substr(ns.size()));
        }
    }
    return "<" + std::string(iri) + ">";
}

}  // namespace kgrec::rdf::vocab
