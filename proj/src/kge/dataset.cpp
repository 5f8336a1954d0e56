#include "kgrec/kge/dataset.hpp"

#include <algorithm>

#include "kgrec/common/error.hpp"

namespace kgrec::kge {

std::vector<rdf::Triple> relational_triples(const rdf::TripleStore& store, std::span<const rdf::Triple> triples) {
    std::vector<rdf::Triple> out;
    out.reserve(triples.size());
    for (const auto& t : triples) {
        if (store.resolve(t.o).is_resource()) out.push_back(t);
    }
    return out;
}

Vocabulary collect_vocabulary(std::span<const rdf::Triple> triples) {
    Vocabulary v;
    for (const auto& t : triples) {
        v.entities.push_back(t.s);
        v.entities.push_back(t.o);
        v.relations.push_back(t.p);
    }
    auto uniq = [](std::vector<TermId>& ids) {
        std::sort(ids.begin(), ids.end());
        ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    };
    uniq(v.entities);
    uniq(v.relations);
    return v;
}

std::vector<IndexedTriple> index_triples(const EmbeddingModel& model, std::span<const rdf::Triple> triples) {
    std::vector<IndexedTriple> out;
    out.reserve(triples.size());
    for (const auto& t : triples) {
        auto it = model.index(t);
        if (!it) {
            throw DataError("triple references a term unknown to the model (s=" + std::to_string(t.s) +
                            " p=" + std::to_string(t.p) + " o=" + std::to_string(t.o) + ")");
        }
        out.push_back(*it);
    }
    return out;
}

}  // namespace kgrec::kge
