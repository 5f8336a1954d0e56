#include "kgrec/rdf/ntriples.hpp"

#include <cctype>
#include <istream>
#include <ostream>
#include <sstream>

#include "kgrec/common/error.hpp"

namespace kgrec::rdf {
namespace {

void append_utf8(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

bool is_ws(char c) { return c == ' ' || c == '\t'; }

class LineParser {
public:
    LineParser(std::string_view text, std::size_t line_no) : text_(text), line_(line_no) {}

    std::optional<TermTriple> parse() {
        skip_ws();
        if (done() || peek() == '#') return std::nullopt;

        TermTriple t;
        t.subject = parse_subject();
        require_ws("after subject");
        t.predicate = parse_iri("predicate");
        require_ws("after predicate");
        if (!done() && peek() == '.') fail("missing object");
        t.object = parse_object();
        skip_ws();
        if (done() || peek() != '.') fail("expected '.' at end of statement");
        ++pos_;
        skip_ws();
        if (!done() && peek() != '#') fail("unexpected trailing content");
        return t;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError(line_, msg + " (column " + std::to_string(pos_ + 1) + ")");
    }

    [[nodiscard]] bool done() const { return pos_ >= text_.size(); }
    [[nodiscard]] char peek() const { return text_[pos_]; }

    void skip_ws() {
        while (!done() && is_ws(peek())) ++pos_;
    }

    void require_ws(const char* where) {
        if (done()) fail(std::string("unexpected end of line ") + where);
        if (!is_ws(peek())) {
            // Grammar allows "<a><b><c>." without spaces; only require that the
            // next token starts cleanly.
            if (peek() != '<' && peek() != '"' && peek() != '_') {
                fail(std::string("expected whitespace ") + where);
            }
        }
        skip_ws();
        if (done()) fail(std::string("unexpected end of line ") + where);
    }

    char32_t parse_hex(std::size_t digits) {
        if (pos_ + digits > text_.size()) fail("truncated unicode escape");
        char32_t cp = 0;
        for (std::size_t i = 0; i < digits; ++i) {
            char c = text_[pos_++];
            cp <<= 4;
            if (c >= '0' && c <= '9') {
                cp |= static_cast<char32_t>(c - '0');
            } else if (c >= 'a' && c <= 'f') {
                cp |= static_cast<char32_t>(c - 'a' + 10);
            } else if (c >= 'A' && c <= 'F') {
                cp |= static_cast<char32_t>(c - 'A' + 10);
            } else {
                fail("invalid hex digit in unicode escape");
            }
        }
        if (cp > 0x10FFFF) fail("code point out of range");
        return cp;
    }

    std::string parse_iri_body() {
        // pos_ at '<'
        ++pos_;
        std::string out;
        while (true) {
            if (done()) fail("unterminated IRI");
            char c = text_[pos_++];
            if (c == '>') break;
            if (c == '\\') {
                if (done()) fail("dangling escape in IRI");
                char e = text_[pos_++];
                if (e == 'u') {
                    append_utf8(out, parse_hex(4));
                } else if (e == 'U') {
                    append_utf8(out, parse_hex(8));
                } else {
                    fail("invalid escape in IRI");
                }
                continue;
            }
            if (static_cast<unsigned char>(c) <= 0x20 || c == '<' || c == '"' || c == '{' ||
                c == '}' || c == '|' || c == '^' || c == '`') {
                fail("invalid character in IRI");
            }
            out.push_back(c);
        }
        if (out.empty()) fail("empty IRI");
        return out;
    }

    Term parse_iri(const char* role) {
        if (done() || peek() != '<') fail(std::string("expected IRI for ") + role);
        return Term::iri(parse_iri_body());
    }

    Term parse_blank() {
        // pos_ at '_'
        if (pos_ + 1 >= text_.size() || text_[pos_ + 1] != ':') fail("expected '_:' blank node");
        pos_ += 2;
        std::size_t start = pos_;
        while (!done()) {
            unsigned char c = static_cast<unsigned char>(peek());
            if (std::isalnum(c) || c == '_' || c == '-' || c == '.' || c >= 0x80) {
                ++pos_;
            } else {
                break;
            }
        }
        // A label cannot end with '.', which belongs to the statement terminator.
        while (pos_ > start && text_[pos_ - 1] == '.') --pos_;
        if (pos_ == start) fail("empty blank node label");
        return Term::blank(std::string(text_.substr(start, pos_ - start)));
    }

    Term parse_subject() {
        if (peek() == '<') return Term::iri(parse_iri_body());
        if (peek() == '_') return parse_blank();
        fail("expected IRI or blank node as subject");
    }

    Term parse_literal() {
        ++pos_;  // opening quote
        std::string lex;
        while (true) {
            if (done()) fail("unterminated literal");
            char c = text_[pos_++];
            if (c == '"') break;
            if (c == '\n' || c == '\r') fail("raw newline in literal");
            if (c != '\\') {
                lex.push_back(c);
                continue;
            }
            if (done()) fail("dangling escape in literal");
            char e = text_[pos_++];
            switch (e) {
                case 't': lex.push_back('\t'); break;
                case 'b': lex.push_back('\b'); break;
                case 'n': lex.push_back('\n'); break;
                case 'r': lex.push_back('\r'); break;
                case 'f': lex.push_back('\f'); break;
                case '"': lex.push_back('"'); break;
                case '\'': lex.push_back('\''); break;
                case '\\': lex.push_back('\\'); break;
                case 'u': append_utf8(lex, parse_hex(4)); break;
                case 'U': append_utf8(lex, parse_hex(8)); break;
                default: fail("invalid escape in literal");
            }
        }
        if (!done() && peek() == '^') {
            if (pos_ + 1 >= text_.size() || text_[pos_ + 1] != '^') fail("expected '^^'");
            pos_ += 2;
            if (done() || peek() != '<') fail("expected datatype IRI");
            return Term::typed_literal(std::move(lex), parse_iri_body());
        }
        if (!done() && peek() == '@') {
            ++pos_;
            std::size_t start = pos_;
            while (!done() && std::isalpha(static_cast<unsigned char>(peek()))) ++pos_;
            if (pos_ == start) fail("empty language tag");
            while (!done() && peek() == '-') {
                ++pos_;
                std::size_t sub = pos_;
                while (!done() && std::isalnum(static_cast<unsigned char>(peek()))) ++pos_;
                if (pos_ == sub) fail("malformed language tag");
            }
            return Term::lang_literal(std::move(lex), std::string(text_.substr(start, pos_ - start)));
        }
        return Term::literal(std::move(lex));
    }

    Term parse_object() {
        switch (peek()) {
            case '<': return Term::iri(parse_iri_body());
            case '_': return parse_blank();
            case '"': return parse_literal();
            default: fail("expected IRI, blank node or literal as object");
        }
    }

    std::string_view text_;
    std::size_t line_;
    std::size_t pos_ = 0;
};

}  // namespace

std::optional<TermTriple> parse_ntriples_line(std::string_view line, std::size_t line_no) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return LineParser(line, line_no).parse();
}

ParseStats parse_ntriples(std::istream& in, ParseMode mode,
                          const std::function<void(TermTriple&&)>& sink) {
    ParseStats stats;
    std::string line;
    while (std::getline(in, line)) {
        ++stats.lines;
        try {
            if (auto t = parse_ntriples_line(line, stats.lines)) {
                ++stats.triples;
                sink(std::move(*t));
            }
        } catch (const ParseError& e) {
            if (mode == ParseMode::Strict) throw;
            ++stats.skipped;
            if (stats.diagnostics.size() < ParseStats::kMaxDiagnostics) {
                stats.diagnostics.push_back({e.line(), e.diagnostic()});
            }
        }
    }
    return stats;
}

std::vector<TermTriple> parse_ntriples(std::string_view text, ParseMode mode, ParseStats* stats) {
    std::istringstream in{std::string(text)};
    std::vector<TermTriple> out;
    auto s = parse_ntriples(in, mode, [&out](TermTriple&& t) { out.push_back(std::move(t)); });
    if (stats != nullptr) *stats = std::move(s);
    return out;
}

void write_ntriples_line(std::ostream& out, const Term& s, const Term& p, const Term& o) {
    out << to_ntriples(s) << ' ' << to_ntriples(p) << ' ' << to_ntriples(o) << " .\n";
}

}  // namespace kgrec::rdf
