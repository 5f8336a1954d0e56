#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace kgrec::rdf {

enum class TermKind : std::uint8_t { Iri = 0, Literal = 1, BlankNode = 2 };

std::string_view to_string(TermKind kind);

/// An RDF term. Literals carry at most one of datatype/language.
struct Term {
    TermKind kind = TermKind::Iri;
    std::string lexical;
    std::optional<std::string> datatype;
    std::optional<std::string> language;

    static Term iri(std::string value) { return {TermKind::Iri, std::move(value), {}, {}}; }
    static Term blank(std::string label) { return {TermKind::BlankNode, std::move(label), {}, {}}; }
    static Term literal(std::string value) { return {TermKind::Literal, std::move(value), {}, {}}; }
    static Term typed_literal(std::string value, std::string datatype) {
        return {TermKind::Literal, std::move(value), std::move(datatype), {}};
    }
    static Term lang_literal(std::string value, std::string lang) {
        return {TermKind::Literal, std::move(value), {}, std::move(lang)};
    }

    [[nodiscard]] bool is_iri() const noexcept { return kind == TermKind::Iri; }
    [[nodiscard]] bool is_literal() const noexcept { return kind == TermKind::Literal; }
    [[nodiscard]] bool is_blank() const noexcept { return kind == TermKind::BlankNode; }
    /// IRIs and blank nodes: things that can be graph nodes in the subject slot.
    [[nodiscard]] bool is_resource() const noexcept { return kind != TermKind::Literal; }

    friend bool operator==(const Term&, const Term&) = default;
};

/// SPARQL-style ordering: blank nodes, then IRIs, then literals; lexical
/// form next, then datatype and language.
std::strong_ordering compare_terms(const Term& a, const Term& b);

struct TermHash {
    std::size_t operator()(const Term& t) const noexcept;
};

/// N-Triples surface form: `<iri>`, `_:label`, `"lex"^^<dt>`, `"lex"@lang`.
std::string to_ntriples(const Term& term);

/// Escapes a literal lexical form for a quoted N-Triples string.
std::string escape_literal(std::string_view lexical);

}  // namespace kgrec::rdf
