#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kgrec/filter/filter_spec.hpp"
#include "kgrec/rdf/triple_store.hpp"

namespace kgrec::filter {

using rdf::TermId;
using rdf::Triple;

struct TemporalMatch {
    TermId target_date = 0;
    TermId candidate_date = 0;
    std::int64_t target_year = 0;
    std::int64_t candidate_year = 0;
    std::int64_t delta_years = 0;

    friend bool operator==(const TemporalMatch&, const TemporalMatch&) = default;
};

struct Evidence {
    std::string filter_name;
    PropertyPath path;
    /// Shared terminal value (SharedValue, SharedPathValue).
    std::optional<TermId> shared_value;
    /// Date pair (TemporalProximity).
    std::optional<TemporalMatch> temporal;
    /// Target-side chains first, then candidate-side chains.
    std::vector<Triple> witnesses;

    friend bool operator==(const Evidence&, const Evidence&) = default;
};

using EvidenceMap = std::map<TermId, std::vector<Evidence>>;

struct Candidate {
    TermId id = 0;
    double similarity = 0.0;
};

struct Recommendation {
    TermId candidate = 0;
    double similarity = 0.0;
    std::vector<Evidence> evidence;
    std::size_t rank = 0;
};

struct FilterDiagnostics {
    std::size_t unparseable_dates = 0;
    std::vector<std::string> messages;  // capped

    void note_unparseable(const std::string& lexical);
};

/// Leading year of an xsd date-like lexical form: optional '-', digits,
/// then end, '-' or 'T'. nullopt when it does not fit.
std::optional<std::int64_t> parse_year(std::string_view lexical);

/// Keeps candidates with an asserted rdf:type in `allowed_classes` (IRIs);
/// order is preserved.
std::vector<Candidate> type_gate(const rdf::TripleStore& store, std::span<const Candidate> candidates,
                                 std::span<const std::string> allowed_classes);

/// Target and candidate assert the same object for one of `properties`.
/// Per candidate, evidence is ordered by (property, value) in SPARQL term order.
EvidenceMap shared_value_test(const rdf::TripleStore& store, TermId target, std::span<const TermId> candidates,
                              std::span<const std::string> properties, const std::string& filter_name = {},
                              const std::optional<std::string>& value_type = {});

/// Target and candidate reach a common terminal value along `path`. One
/// evidence item per shared value, ordered by SPARQL term order.
EvidenceMap path_value_test(const rdf::TripleStore& store, TermId target, std::span<const TermId> candidates,
                            const PropertyPath& path, const std::string& filter_name = {},
                            const std::optional<std::string>& value_type = {});

/// Years reached via each path differ by at most threshold_years. One
/// evidence item per path: the closest pair.
EvidenceMap temporal_proximity_test(const rdf::TripleStore& store, TermId target, std::span<const TermId> candidates,
                                    const FilterSpec& spec, FilterDiagnostics* diagnostics = nullptr);

/// Dispatches on spec.kind.
EvidenceMap run_filter(const rdf::TripleStore& store, TermId target, std::span<const TermId> candidates,
                       const FilterSpec& spec, FilterDiagnostics* diagnostics = nullptr);

/// Type gate, every spec, merge, drop candidates without evidence, rank by
/// similarity desc, evidence count desc, id asc. Throws DataError when the
/// target has no triples in the store.
std::vector<Recommendation> filter_candidates(const rdf::TripleStore& store, TermId target,
                                              std::span<const Candidate> candidates,
                                              std::span<const FilterSpec> specs,
                                              std::span<const std::string> allowed_classes,
                                              FilterDiagnostics* diagnostics = nullptr);

}  // namespace kgrec::filter
