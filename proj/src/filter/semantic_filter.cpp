#include "kgrec/filter/semantic_filter.hpp"

#include <algorithm>
#include <charconv>
#include <limits>
#include <set>

#include "kgrec/common/error.hpp"

namespace kgrec::filter {

void FilterDiagnostics::note_unparseable(const std::string& lexical) {
    ++unparseable_dates;
    if (messages.size() < 100) messages.push_back("unparseable date '" + lexical + "'");
}

std::optional<std::int64_t> parse_year(std::string_view lexical) {
    std::size_t i = 0;
    bool negative = false;
    if (i < lexical.size() && lexical[i] == '-') {
        negative = true;
        ++i;
    }
    const std::size_t digits_begin = i;
    while (i < lexical.size() && lexical[i] >= '0' && lexical[i] <= '9') ++i;
    if (i == digits_begin) return std::nullopt;
    if (i < lexical.size() && lexical[i] != '-' && lexical[i] != 'T') return std::nullopt;
    std::int64_t year = 0;
    auto [ptr, ec] = std::from_chars(lexical.data() + digits_begin, lexical.data() + i, year);
    if (ec != std::errc{} || ptr != lexical.data() + i) return std::nullopt;
    return negative ? -year : year;
}

namespace {

struct Chain {
    TermId end;
    std::vector<Triple> triples;
};

struct ResolvedStep {
    std::optional<TermId> predicate;
    Direction direction;
};

std::vector<ResolvedStep> resolve(const rdf::TripleStore& store, const PropertyPath& path) {
    std::vector<ResolvedStep> out;
    for (const auto& step : path.steps) out.push_back({store.lookup_iri(step.predicate), step.direction});
    return out;
}

std::vector<Chain> walk(const rdf::TripleStore& store, TermId start, const std::vector<ResolvedStep>& steps) {
    std::vector<Chain> chains{{start, {}}};
    for (const auto& step : steps) {
        if (!step.predicate) return {};
        std::vector<Chain> next;
        for (const auto& chain : chains) {
            const bool forward = step.direction == Direction::Forward;
            auto hits = forward ? store.match(chain.end, *step.predicate, std::nullopt)
                                : store.match(std::nullopt, *step.predicate, chain.end);
            for (const Triple& t : hits) {
                Chain extended{forward ? t.o : t.s, chain.triples};
                extended.triples.push_back(t);
                next.push_back(std::move(extended));
            }
        }
        chains = std::move(next);
    }
    return chains;
}

std::map<TermId, std::vector<const Chain*>> by_end(const std::vector<Chain>& chains) {
    std::map<TermId, std::vector<const Chain*>> out;
    for (const auto& c : chains) out[c.end].push_back(&c);
    return out;
}

void append_unique(std::vector<Triple>& out, const std::vector<const Chain*>& chains) {
    for (const Chain* c : chains) {
        for (const Triple& t : c->triples) {
            if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
        }
    }
}

bool term_less(const rdf::TripleStore& store, TermId a, TermId b) {
    return rdf::compare_terms(store.resolve(a), store.resolve(b)) < 0;
}

// nullopt means "no restriction"; an absent class id means nothing matches.
struct TypeCheck {
    bool restricted = false;
    std::optional<TermId> cls;

    bool ok(const rdf::TripleStore& store, TermId value) const {
        if (!restricted) return true;
        if (!cls) return false;
        const TermId c = *cls;
        return store.has_type(value, std::span<const TermId>(&c, 1));
    }
};

TypeCheck type_check(const rdf::TripleStore& store, const std::optional<std::string>& value_type) {
    if (!value_type) return {};
    return {true, store.lookup_iri(*value_type)};
}

std::vector<TermId> unique_candidates(TermId target, std::span<const TermId> candidates) {
    std::vector<TermId> out;
    for (TermId c : candidates) {
        if (c != target && std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
    }
    return out;
}

}  // namespace

std::vector<Candidate> type_gate(const rdf::TripleStore& store, std::span<const Candidate> candidates,
                                 std::span<const std::string> allowed_classes) {
    std::vector<TermId> classes;
    for (const auto& iri : allowed_classes) {
        if (auto id = store.lookup_iri(iri)) classes.push_back(*id);
    }
    std::vector<Candidate> out;
    for (const auto& c : candidates) {
        if (store.has_type(c.id, classes)) out.push_back(c);
    }
    return out;
}

EvidenceMap shared_value_test(const rdf::TripleStore& store, TermId target, std::span<const TermId> candidates,
                              std::span<const std::string> properties, const std::string& filter_name,
                              const std::optional<std::string>& value_type) {
    std::vector<std::pair<std::string, TermId>> props;
    for (const auto& iri : properties) {
        auto id = store.lookup_iri(iri);
        if (!id) continue;
        if (std::find_if(props.begin(), props.end(), [&](const auto& p) { return p.second == *id; }) == props.end()) {
            props.emplace_back(iri, *id);
        }
    }
    // SPARQL ORDER BY ?prop compares IRIs lexically.
    std::sort(props.begin(), props.end());
    const auto check = type_check(store, value_type);

    EvidenceMap out;
    for (TermId c : unique_candidates(target, candidates)) {
        std::vector<Evidence> found;
        for (const auto& [iri, p] : props) {
            std::vector<TermId> target_values;
            for (const Triple& t : store.match(target, p, std::nullopt)) target_values.push_back(t.o);
            std::vector<Evidence> per_prop;
            for (const Triple& t : store.match(c, p, std::nullopt)) {
                if (!std::binary_search(target_values.begin(), target_values.end(), t.o)) continue;
                if (!check.ok(store, t.o)) continue;
                Evidence e;
                e.filter_name = filter_name;
                e.path.steps.push_back({iri, Direction::Forward});
                e.shared_value = t.o;
                e.witnesses = {Triple{target, p, t.o}, t};
                per_prop.push_back(std::move(e));
            }
            std::sort(per_prop.begin(), per_prop.end(), [&](const Evidence& a, const Evidence& b) {
                return term_less(store, *a.shared_value, *b.shared_value);
            });
            for (auto& e : per_prop) found.push_back(std::move(e));
        }
        if (!found.empty()) out.emplace(c, std::move(found));
    }
    return out;
}

EvidenceMap path_value_test(const rdf::TripleStore& store, TermId target, std::span<const TermId> candidates,
                            const PropertyPath& path, const std::string& filter_name,
                            const std::optional<std::string>& value_type) {
    EvidenceMap out;
    const auto steps = resolve(store, path);
    const auto target_chains = walk(store, target, steps);
    if (target_chains.empty()) return out;
    const auto target_ends = by_end(target_chains);
    const auto check = type_check(store, value_type);

    for (TermId c : unique_candidates(target, candidates)) {
        const auto chains = walk(store, c, steps);
        std::vector<Evidence> found;
        for (const auto& [value, mine] : by_end(chains)) {
            auto it = target_ends.find(value);
            if (it == target_ends.end() || !check.ok(store, value)) continue;
            Evidence e;
            e.filter_name = filter_name;
            e.path = path;
            e.shared_value = value;
            append_unique(e.witnesses, it->second);
            append_unique(e.witnesses, mine);
            found.push_back(std::move(e));
        }
        std::sort(found.begin(), found.end(), [&](const Evidence& a, const Evidence& b) {
            return term_less(store, *a.shared_value, *b.shared_value);
        });
        if (!found.empty()) out.emplace(c, std::move(found));
    }
    return out;
}

namespace {

struct DatedChain {
    const Chain* chain;
    std::int64_t year;
};

std::vector<DatedChain> dated(const rdf::TripleStore& store, const std::vector<Chain>& chains,
                              FilterDiagnostics* diagnostics) {
    std::vector<DatedChain> out;
    std::set<TermId> reported;
    for (const auto& c : chains) {
        const auto& term = store.resolve(c.end);
        std::optional<std::int64_t> year;
        if (term.is_literal()) year = parse_year(term.lexical);
        if (year) {
            out.push_back({&c, *year});
        } else if (diagnostics != nullptr && reported.insert(c.end).second) {
            diagnostics->note_unparseable(term.lexical);
        }
    }
    return out;
}

}  // namespace

EvidenceMap temporal_proximity_test(const rdf::TripleStore& store, TermId target, std::span<const TermId> candidates,
                                    const FilterSpec& spec, FilterDiagnostics* diagnostics) {
    if (spec.kind != FilterKind::TemporalProximity) throw ConfigError("filter '" + spec.name + "' is not temporal");
    EvidenceMap out;
    const auto ids = unique_candidates(target, candidates);
    for (const auto& path : spec.properties) {
        const auto steps = resolve(store, path);
        const auto target_chains = walk(store, target, steps);
        const auto target_dates = dated(store, target_chains, diagnostics);
        if (target_dates.empty()) continue;
        for (TermId c : ids) {
            const auto chains = walk(store, c, steps);
            const auto mine = dated(store, chains, diagnostics);
            const DatedChain* best_t = nullptr;
            const DatedChain* best_c = nullptr;
            std::int64_t best = std::numeric_limits<std::int64_t>::max();
            for (const auto& t : target_dates) {
                for (const auto& d : mine) {
                    const std::int64_t delta = t.year > d.year ? t.year - d.year : d.year - t.year;
                    if (delta < best) {
                        best = delta;
                        best_t = &t;
                        best_c = &d;
                    }
                }
            }
            if (best_t == nullptr || best > spec.threshold_years) continue;
            Evidence e;
            e.filter_name = spec.name;
            e.path = path;
            e.temporal = TemporalMatch{best_t->chain->end, best_c->chain->end, best_t->year, best_c->year, best};
            append_unique(e.witnesses, {best_t->chain});
            append_unique(e.witnesses, {best_c->chain});
            out[c].push_back(std::move(e));
        }
    }
    return out;
}

EvidenceMap run_filter(const rdf::TripleStore& store, TermId target, std::span<const TermId> candidates,
                       const FilterSpec& spec, FilterDiagnostics* diagnostics) {
    spec.validate();
    switch (spec.kind) {
        case FilterKind::SharedValue: {
            std::vector<std::string> props;
            for (const auto& p : spec.properties) props.push_back(p.steps.front().predicate);
            return shared_value_test(store, target, candidates, props, spec.name, spec.value_type);
        }
        case FilterKind::SharedPathValue: {
            EvidenceMap out;
            for (const auto& path : spec.properties) {
                for (auto& [c, items] : path_value_test(store, target, candidates, path, spec.name, spec.value_type)) {
                    auto& dst = out[c];
                    for (auto& e : items) dst.push_back(std::move(e));
                }
            }
            return out;
        }
        case FilterKind::TemporalProximity: return temporal_proximity_test(store, target, candidates, spec, diagnostics);
    }
    return {};
}

std::vector<Recommendation> filter_candidates(const rdf::TripleStore& store, TermId target,
                                              std::span<const Candidate> candidates,
                                              std::span<const FilterSpec> specs,
                                              std::span<const std::string> allowed_classes,
                                              FilterDiagnostics* diagnostics) {
    if (target >= store.dictionary().size() || store.match(target, std::nullopt, std::nullopt).empty()) {
        throw DataError("target is not a subject in the graph");
    }
    std::vector<Candidate> gated;
    for (const auto& c : type_gate(store, candidates, allowed_classes)) {
        if (c.id == target) continue;
        if (std::none_of(gated.begin(), gated.end(), [&](const Candidate& g) { return g.id == c.id; })) {
            gated.push_back(c);
        }
    }
    std::vector<TermId> ids;
    for (const auto& c : gated) ids.push_back(c.id);

    std::map<TermId, std::vector<Evidence>> merged;
    for (const auto& spec : specs) {
        for (auto& [c, items] : run_filter(store, target, ids, spec, diagnostics)) {
            auto& dst = merged[c];
            for (auto& e : items) dst.push_back(std::move(e));
        }
    }

    std::vector<Recommendation> out;
    for (const auto& c : gated) {
        auto it = merged.find(c.id);
        if (it == merged.end() || it->second.empty()) continue;
        out.push_back({c.id, c.similarity, std::move(it->second), 0});
    }
    std::sort(out.begin(), out.end(), [](const Recommendation& a, const Recommendation& b) {
        if (a.similarity != b.similarity) return a.similarity > b.similarity;
        if (a.evidence.size() != b.evidence.size()) return a.evidence.size() > b.evidence.size();
        return a.candidate < b.candidate;
    });
    for (std::size_t i = 0; i < out.size(); ++i) out[i].rank = i + 1;
    return out;
}

}  // namespace kgrec::filter
