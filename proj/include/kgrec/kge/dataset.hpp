#pragma once

#include <span>
#include <vector>

#include "kgrec/kge/model.hpp"
#include "kgrec/rdf/triple_store.hpp"

namespace kgrec::kge {

/// Triples whose object is a graph node (IRI or blank node). Literal-valued
/// statements carry no entity to embed and are left to the semantic filters.
std::vector<rdf::Triple> relational_triples(const rdf::TripleStore& store, std::span<const rdf::Triple> triples);

inline std::vector<rdf::Triple> relational_triples(const rdf::TripleStore& store) {
    return relational_triples(store, store.triples());
}

struct Vocabulary {
    std::vector<TermId> entities;   // subjects and objects, ascending
    std::vector<TermId> relations;  // predicates, ascending
};

Vocabulary collect_vocabulary(std::span<const rdf::Triple> triples);

/// Throws DataError if a triple mentions a term the model does not know.
std::vector<IndexedTriple> index_triples(const EmbeddingModel& model, std::span<const rdf::Triple> triples);

}  // namespace kgrec::kge
