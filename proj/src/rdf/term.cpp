#include "kgrec/rdf/term.hpp"

#include <cstdio>

namespace kgrec::rdf {

std::string_view to_string(TermKind kind) {
    switch (kind) {
        case TermKind::Iri: return "iri";
        case TermKind::Literal: return "literal";
        case TermKind::BlankNode: return "blank";
    }
    return "unknown";
}

std::strong_ordering compare_terms(const Term& a, const Term& b) {
    auto rank = [](TermKind k) {
        switch (k) {
            case TermKind::BlankNode: return 0;
            case TermKind::Iri: return 1;
            case TermKind::Literal: return 2;
        }
        return 3;
    };
    if (auto c = rank(a.kind) <=> rank(b.kind); c != 0) return c;
    if (auto c = a.lexical.compare(b.lexical); c != 0) return c <=> 0;
    if (auto c = a.datatype <=> b.datatype; c != 0) return c;
    return a.language <=> b.language;
}

std::size_t TermHash::operator()(const Term& t) const noexcept {
    std::size_t h = std::hash<std::string>{}(t.lexical);
    auto mix = [&h](std::size_t v) { h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2); };
    mix(static_cast<std::size_t>(t.kind));
    if (t.datatype) mix(std::hash<std::string>{}(*t.datatype));
    if (t.language) mix(std::hash<std::string>{}(*t.language) ^ 0x5bd1e995);
    return h;
}

std::string escape_literal(std::string_view lexical) {
    std::string out;
    out.reserve(lexical.size() + 2);
    for (unsigned char c : lexical) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            case '\b': out += "\\b"; break;
            case '\f': out += "\\f"; break;
            default:
                if (c < 0x20 || c == 0x7F) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\u%04X", c);
                    out += buf;
                } else {
                    out.push_back(static_cast<char>(c));
                }
        }
    }
    return out;
}

namespace {
std::string escape_iri(std::string_view iri) {
    std::string out;
    out.reserve(iri.size());
    for (unsigned char c : iri) {
        // Characters not allowed raw inside <...> go out as UCHAR escapes.
        if (c <= 0x20 || c == '<' || c == '>' || c == '"' || c == '{' || c == '}' || c == '|' ||
            c == '^' || c == '`' || c == '\\') {
            char buf[8];
            std::snprintf(buf, sizeof buf, "\\u%04X", c);
            out += buf;
        } else {
            out.push_back(static_cast<char>(c));
        }
    }
    return out;
}
}  // namespace

std::string to_ntriples(const Term& term) {
    switch (term.kind) {
        case TermKind::Iri: return "<" + escape_iri(term.lexical) + ">";
        case TermKind::BlankNode: return "_:" + term.lexical;
        case TermKind::Literal: {
            std::string out = "\"" + escape_literal(term.lexical) + "\"";
            if (term.datatype) {
                out += "^^<" + escape_iri(*term.datatype) + ">";
            } else if (term.language) {
                out += "@" + *term.language;
            }
            return out;
        }
    }
    return {};
}

}  // namespace kgrec::rdf
