#include "kgrec/pipeline/synthetic.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "kgrec/common/error.hpp"
#include "kgrec/common/random.hpp"
#include "kgrec/rdf/vocabulary.hpp"

namespace kgrec::pipeline {
namespace {

using rdf::Term;
namespace vocab = rdf::vocab;

std::string node(std::string_view kind, std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%05zu", i);
    return std::string(kSyntheticBase) + std::string(kind) + "/" + buf;
}

std::string date(int year, int month, int day) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
    return buf;
}

class GraphWriter {
public:
    void link(const std::string& s, std::string_view p, const std::string& o) {
        builder_.add(Term::iri(s), Term::iri(std::string(p)), Term::iri(o));
    }
    void crm(const std::string& s, std::string_view local, const std::string& o) { link(s, vocab::crm(local), o); }
    void type(const std::string& s, std::string_view cls) { link(s, vocab::kRdfType, vocab::crm(cls)); }
    void label(const std::string& s, const std::string& text) {
        builder_.add(Term::iri(s), Term::iri(std::string(vocab::kRdfsLabel)), Term::literal(text));
    }
    void date_value(const std::string& s, std::string_view local, const std::string& value) {
        builder_.add(Term::iri(s), Term::iri(vocab::crm(local)), Term::typed_literal(value, vocab::xsd("date")));
    }
    rdf::TripleStore build() && { return std::move(builder_).build(); }

private:
    rdf::TripleStore::Builder builder_;
};

constexpr std::string_view kParticipation[] = {"P11i_participated_in", "P12i_was_present_at",
                                               "P14i_performed"};

}  // namespace

SyntheticGraph generate_synthetic_graph(const SyntheticSpec& spec) {
    if (spec.community_size == 0) throw ConfigError("synth.community_size must be positive");
    Rng rng(spec.seed);
    GraphWriter g;
    SyntheticGraph out;

    std::vector<std::string> places;
    for (std::size_t i = 0; i < spec.places; ++i) {
        places.push_back(node("place", i));
        g.type(places.back(), "E53_Place");
        g.label(places.back(), "Place " + std::to_string(i));
    }
    auto random_place = [&]() -> const std::string& { return places[rng.index(places.size())]; };

    const std::size_t n_communities = spec.n_persons / spec.community_size;
    std::vector<int> community_year(n_communities);
    std::vector<std::string> community_home(n_communities);
    for (std::size_t c = 0; c < n_communities; ++c) {
        community_year[c] = 1600 + static_cast<int>(rng.index(300));
        if (!places.empty()) community_home[c] = random_place();
    }

    std::size_t time_spans = 0;
    auto time_span = [&](const std::string& owner, std::string_view bound, const std::string& value) {
        const auto ts = node("timespan", time_spans++);
        g.type(ts, "E52_Time-Span");
        g.crm(owner, "P4_has_time-span", ts);
        g.date_value(ts, bound, value);
    };

    for (std::size_t i = 0; i < spec.n_persons; ++i) {
        const auto person = node("person", i);
        out.persons.push_back(person);
        const std::size_t c = i / spec.community_size;
        const bool planted = c < n_communities;
        g.type(person, "E21_Person");
        g.label(person, "Person " + std::to_string(i));

        const auto id = node("identifier", i);
        g.crm(person, "P1_is_identified_by", id);
        g.type(id, "E42_Identifier");
        g.label(id, "ID-" + std::to_string(100000 + i));

        const int year = planted ? community_year[c] + static_cast<int>(rng.index(17)) - 8
                                 : 1600 + static_cast<int>(rng.index(300));
        const auto birth = node("birth", i);
        g.crm(person, "P98i_was_born", birth);
        g.type(birth, "E67_Birth");
        time_span(birth, "P82a_begin_of_the_begin",
                  date(year, 1 + static_cast<int>(rng.index(12)), 1 + static_cast<int>(rng.index(28))));
        const auto death = node("death", i);
        g.crm(person, "P100i_died_in", death);
        g.type(death, "E69_Death");
        time_span(death, "P82b_end_of_the_end",
                  date(year + 40 + static_cast<int>(rng.index(40)), 1 + static_cast<int>(rng.index(12)),
                       1 + static_cast<int>(rng.index(28))));
        if (!places.empty()) {
            g.crm(birth, "P7_took_place_at", random_place());
            g.crm(death, "P7_took_place_at", random_place());
            const bool at_home = planted && rng.coin();
            g.crm(person, "P74_has_current_or_former_residence", at_home ? community_home[c] : random_place());
        }
    }

    std::size_t events = 0;
    auto new_event = [&]() {
        const auto e = node("event", events++);
        g.type(e, "E5_Event");
        g.label(e, "Event " + std::to_string(events - 1));
        if (!places.empty()) g.crm(e, "P7_took_place_at", random_place());
        return e;
    };

    for (std::size_t c = 0; c < n_communities; ++c) {
        std::vector<std::string> members(out.persons.begin() + static_cast<std::ptrdiff_t>(c * spec.community_size),
                                         out.persons.begin() +
                                             static_cast<std::ptrdiff_t>((c + 1) * spec.community_size));
        std::string first_event;
        for (std::size_t k = 0; k < spec.events_per_community; ++k) {
            const auto e = new_event();
            if (k == 0) first_event = e;
            const auto prop = kParticipation[rng.index(std::size(kParticipation))];
            for (const auto& p : members) g.crm(p, prop, e);
        }
        if (members.size() >= 2) {
            const auto prod = node("production", c);
            g.type(prod, "E12_Production");
            g.crm(prod, "P14_carried_out_by", members[0]);
            g.crm(prod, "P14_carried_out_by", members[1]);
            const auto object = node("object", c);
            g.type(object, "E22_Man-Made_Object");
            g.crm(prod, "P108_has_produced", object);
        }
        if (!first_event.empty()) {
            const auto doc = node("document", c);
            g.type(doc, "E22_Man-Made_Object");
            g.crm(doc, "P67_refers_to", first_event);
            const std::size_t a = rng.index(members.size());
            g.crm(doc, "P67_refers_to", members[a]);
            if (members.size() >= 2) {
                const std::size_t b = (a + 1 + rng.index(members.size() - 1)) % members.size();
                g.crm(doc, "P67_refers_to", members[b]);
            }
            for (const auto& p : members) g.crm(p, "P12i_was_present_at", first_event);
        }
        out.communities.push_back(std::move(members));
    }

    for (std::size_t b = 0; b < spec.background_events && !out.persons.empty(); ++b) {
        const auto e = new_event();
        const std::size_t n = 2 + rng.index(3);
        for (std::size_t k = 0; k < n; ++k) {
            g.crm(out.persons[rng.index(out.persons.size())], kParticipation[rng.index(std::size(kParticipation))], e);
        }
    }

    std::vector<std::string> pool;
    for (const auto& members : out.communities) pool.insert(pool.end(), members.begin(), members.end());
    rng.shuffle(pool.begin(), pool.end());
    pool.resize(std::min(pool.size(), spec.n_targets));
    out.targets = std::move(pool);

    out.store = std::move(g).build();
    return out;
}

void write_synthetic_graph(const SyntheticGraph& graph, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    auto open = [&](const char* name) {
        std::ofstream f(dir / name, std::ios::binary);
        if (!f) throw ConfigError("cannot write " + (dir / name).string());
        return f;
    };
    {
        auto f = open("graph.nt");
        graph.store.write_ntriples(f);
    }
    {
        auto f = open("communities.tsv");
        for (std::size_t c = 0; c < graph.communities.size(); ++c) {
            for (const auto& p : graph.communities[c]) f << p << '\t' << c << '\n';
        }
    }
    auto f = open("targets.txt");
    for (const auto& t : graph.targets) f << t << '\n';
}

std::vector<std::pair<std::string, std::size_t>> read_communities(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    std::vector<std::pair<std::string, std::size_t>> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string person;
        std::size_t community = 0;
        if (!(row >> person >> community)) throw DataError("malformed line in " + path.string() + ": " + line);
        out.emplace_back(person, community);
    }
    return out;
}

}  // namespace kgrec::pipeline
