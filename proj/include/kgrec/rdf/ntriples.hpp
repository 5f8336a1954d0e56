#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kgrec/rdf/term.hpp"

namespace kgrec::rdf {

struct TermTriple {
    Term subject;
    Term predicate;
    Term object;

    friend bool operator==(const TermTriple&, const TermTriple&) = default;
};

enum class ParseMode { Strict, Lenient };

struct ParseDiagnostic {
    std::size_t line = 0;
    std::string message;
};

struct ParseStats {
    std::size_t lines = 0;
    std::size_t triples = 0;
    /// Malformed lines skipped in lenient mode.
    std::size_t skipped = 0;
    /// Filled in by the store loader; the parser itself does not dedupe.
    std::size_t duplicates = 0;
    /// First few diagnostics in lenient mode (capped at kMaxDiagnostics).
    std::vector<ParseDiagnostic> diagnostics;

    static constexpr std::size_t kMaxDiagnostics = 100;
};

/// Parses one N-Triples line. Blank and comment lines yield nullopt.
/// Throws ParseError tagged with `line_no` on malformed input.
std::optional<TermTriple> parse_ntriples_line(std::string_view line, std::size_t line_no);

/// Streams statements from `in` into `sink`. Strict mode throws on the first
/// malformed line; lenient mode skips it and records a diagnostic.
ParseStats parse_ntriples(std::istream& in, ParseMode mode,
                          const std::function<void(TermTriple&&)>& sink);

std::vector<TermTriple> parse_ntriples(std::string_view text, ParseMode mode = ParseMode::Strict,
                                       ParseStats* stats = nullptr);

void write_ntriples_line(std::ostream& out, const Term& s, const Term& p, const Term& o);

}  // namespace kgrec::rdf
