#include "kgrec/ann/hnsw.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <queue>
#include <string>

#include "kgrec/common/binary_io.hpp"
#include "kgrec/common/error.hpp"
#include "kgrec/common/random.hpp"

namespace kgrec::ann {

void HnswParams::validate() const {
    if (m < 2) throw ConfigError("hnsw M must be at least 2");
    if (ef_construction < m) throw ConfigError("hnsw efConstruction must be >= M");
    if (ef_search < 1) throw ConfigError("hnsw efSearch must be positive");
}

double dot(std::span<const double> a, std::span<const double> b) noexcept {
    // Four lanes keep the loop vectorizable without reassociation flags.
    double s0 = 0, s1 = 0, s2 = 0, s3 = 0;
    const std::size_t n = a.size();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        s0 += a[i] * b[i];
        s1 += a[i + 1] * b[i + 1];
        s2 += a[i + 2] * b[i + 2];
        s3 += a[i + 3] * b[i + 3];
    }
    for (; i < n; ++i) s0 += a[i] * b[i];
    return (s0 + s1) + (s2 + s3);
}

std::vector<double> normalize(std::span<const double> v) {
    double sq = 0;
    for (double x : v) sq += x * x;
    if (!(sq > 0) || !std::isfinite(sq)) throw DataError("cannot normalize a zero or non-finite vector");
    const double inv = 1.0 / std::sqrt(sq);
    std::vector<double> out(v.begin(), v.end());
    for (double& x : out) x *= inv;
    return out;
}

namespace {

double clamp_sim(double s) { return std::clamp(s, -1.0, 1.0); }

void sort_neighbors(std::vector<Neighbor>& out) {
    std::sort(out.begin(), out.end(), [](const Neighbor& a, const Neighbor& b) {
        if (a.similarity != b.similarity) return a.similarity > b.similarity;
        return a.id < b.id;
    });
}

void check_query(std::span<const double> query, std::size_t dim) {
    if (query.size() != dim) {
        throw DataError("query has dimension " + std::to_string(query.size()) + ", index has " + std::to_string(dim));
    }
}

constexpr std::string_view kMagic = "HNW1";

}  // namespace

VectorSet normalize_rows(const VectorSet& vectors, std::span<const TermId> ids) {
    const std::size_t n = vectors.size();
    if (vectors.data.size() != n * vectors.dim) throw DataError("vector matrix is not rectangular");
    if (ids.size() != n) throw ConfigError("id count does not match vector count");
    VectorSet out;
    out.dim = vectors.dim;
    out.data.reserve(vectors.data.size());
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> unit;
        try {
            unit = normalize(vectors.row(i));
        } catch (const DataError&) {
            throw DataError("zero or non-finite vector for id " + std::to_string(ids[i]));
        }
        out.data.insert(out.data.end(), unit.begin(), unit.end());
    }
    return out;
}

std::vector<Neighbor> brute_force_knn(const VectorSet& vectors, std::span<const TermId> ids,
                                      std::span<const double> query, std::size_t k) {
    if (k == 0 || vectors.size() == 0) return {};
    check_query(query, vectors.dim);
    const auto q = normalize(query);
    std::vector<Neighbor> all;
    all.reserve(vectors.size());
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        all.push_back({ids[i], clamp_sim(dot(q, normalize(vectors.row(i))))});
    }
    sort_neighbors(all);
    all.resize(std::min(k, all.size()));
    return all;
}

double HnswIndex::level_norm() const noexcept { return 1.0 / std::log(static_cast<double>(params_.m)); }

HnswIndex HnswIndex::build(const VectorSet& vectors, std::span<const TermId> ids, const HnswParams& params) {
    params.validate();
    const std::size_t n = vectors.size();
    if (n == 0) throw DataError("cannot build an index over zero vectors");

    HnswIndex index;
    index.params_ = params;
    index.ids_.assign(ids.begin(), ids.end());
    index.vectors_ = normalize_rows(vectors, ids);

    index.links_.resize(n);
    Rng rng(params.seed);
    const double ml = index.level_norm();
    std::vector<std::uint32_t> visited(n, 0);
    std::uint32_t tag = 0;
    for (std::uint32_t node = 0; node < n; ++node) {
        const int level = static_cast<int>(std::floor(-std::log(rng.unit_open_closed()) * ml));
        index.insert(node, level, visited, tag);
    }
    return index;
}

std::uint32_t HnswIndex::greedy_descend(std::span<const double> q, std::uint32_t start, int from_level,
                                        int to_level) const {
    std::uint32_t cur = start;
    double best = sim(q, cur);
    for (int level = from_level; level >= to_level; --level) {
        bool moved = true;
        while (moved) {
            moved = false;
            for (std::uint32_t nb : links_[cur][static_cast<std::size_t>(level)]) {
                const double s = sim(q, nb);
                if (s > best || (s == best && nb < cur)) {
                    best = s;
                    cur = nb;
                    moved = true;
                }
            }
        }
    }
    return cur;
}

std::vector<HnswIndex::Candidate> HnswIndex::search_layer(std::span<const double> q, std::uint32_t entry,
                                                          std::size_t ef, int level,
                                                          std::vector<std::uint32_t>& visited,
                                                          std::uint32_t& visit_tag) const {
    // Total order: higher similarity first, then lower node id.
    auto better = [](const Candidate& a, const Candidate& b) {
        return a.sim > b.sim || (a.sim == b.sim && a.node < b.node);
    };
    auto worse = [&](const Candidate& a, const Candidate& b) { return better(b, a); };
    // `frontier` pops the best candidate; `result` pops its worst member.
    std::priority_queue<Candidate, std::vector<Candidate>, decltype(worse)> frontier(worse);
    std::priority_queue<Candidate, std::vector<Candidate>, decltype(better)> result(better);

    if (++visit_tag == 0) {
        std::fill(visited.begin(), visited.end(), 0);
        visit_tag = 1;
    }
    const Candidate start{sim(q, entry), entry};
    visited[entry] = visit_tag;
    frontier.push(start);
    result.push(start);

    while (!frontier.empty()) {
        const Candidate c = frontier.top();
        if (result.size() >= ef && better(result.top(), c)) break;
        frontier.pop();
        for (std::uint32_t nb : links_[c.node][static_cast<std::size_t>(level)]) {
            if (visited[nb] == visit_tag) continue;
            visited[nb] = visit_tag;
            const Candidate e{sim(q, nb), nb};
            if (result.size() < ef || better(e, result.top())) {
                frontier.push(e);
                result.push(e);
                if (result.size() > ef) result.pop();
            }
        }
    }

    std::vector<Candidate> out;
    out.reserve(result.size());
    while (!result.empty()) {
        out.push_back(result.top());
        result.pop();
    }
    std::reverse(out.begin(), out.end());
    return out;
}

std::vector<std::uint32_t> HnswIndex::select_neighbors(const std::vector<Candidate>& sorted,
                                                       std::size_t limit) const {
    std::vector<std::uint32_t> chosen;
    if (sorted.size() <= limit) {
        for (const auto& c : sorted) chosen.push_back(c.node);
        return chosen;
    }
    for (const auto& c : sorted) {
        if (chosen.size() >= limit) break;
        bool keep = true;
        for (std::uint32_t s : chosen) {
            // Skip c when an already-chosen neighbor is closer to it than q is.
            if (dot(vectors_.row(c.node), vectors_.row(s)) > c.sim) {
                keep = false;
                break;
            }
        }
        if (keep) chosen.push_back(c.node);
    }
    return chosen;
}

void HnswIndex::insert(std::uint32_t node, int level, std::vector<std::uint32_t>& visited, std::uint32_t& visit_tag) {
    links_[node].resize(static_cast<std::size_t>(level) + 1);
    if (max_level_ < 0) {
        entry_point_ = node;
        max_level_ = level;
        return;
    }
    const auto q = vectors_.row(node);
    std::uint32_t cur = entry_point_;
    if (level < max_level_) cur = greedy_descend(q, entry_point_, max_level_, level + 1);

    for (int l = std::min(level, max_level_); l >= 0; --l) {
        const auto found = search_layer(q, cur, params_.ef_construction, l, visited, visit_tag);
        auto chosen = select_neighbors(found, params_.m);
        const std::size_t cap = l == 0 ? 2 * params_.m : params_.m;
        for (std::uint32_t nb : chosen) {
            auto& back = links_[nb][static_cast<std::size_t>(l)];
            back.push_back(node);
            if (back.size() <= cap) continue;
            const auto base = vectors_.row(nb);
            std::vector<Candidate> cands;
            cands.reserve(back.size());
            for (std::uint32_t x : back) cands.push_back({dot(base, vectors_.row(x)), x});
            std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
                return a.sim > b.sim || (a.sim == b.sim && a.node < b.node);
            });
            back = select_neighbors(cands, cap);
        }
        links_[node][static_cast<std::size_t>(l)] = std::move(chosen);
        cur = found.front().node;
    }
    if (level > max_level_) {
        entry_point_ = node;
        max_level_ = level;
    }
}

std::vector<Neighbor> HnswIndex::search(std::span<const double> query, std::size_t k, std::size_t ef_search) const {
    if (ids_.empty()) throw Error("search on an empty index");
    if (k == 0) return {};
    check_query(query, vectors_.dim);
    const auto q = normalize(query);
    std::uint32_t cur = entry_point_;
    if (max_level_ > 0) cur = greedy_descend(q, entry_point_, max_level_, 1);
    std::vector<std::uint32_t> visited(ids_.size(), 0);
    std::uint32_t tag = 0;
    const auto found = search_layer(q, cur, std::max(ef_search, k), 0, visited, tag);

    std::vector<Neighbor> out;
    out.reserve(found.size());
    for (const auto& c : found) out.push_back({ids_[c.node], clamp_sim(c.sim)});
    sort_neighbors(out);
    out.resize(std::min(k, out.size()));
    return out;
}

void HnswIndex::save(std::ostream& out) const {
    io::Writer w(out);
    w.bytes(kMagic);
    w.put<std::uint64_t>(params_.m);
    w.put<std::uint64_t>(params_.ef_construction);
    w.put<std::uint64_t>(params_.ef_search);
    w.put<std::uint64_t>(params_.seed);
    w.put<std::uint64_t>(ids_.size());
    w.put<std::uint64_t>(vectors_.dim);
    w.put<std::uint32_t>(entry_point_);
    w.put<std::int32_t>(max_level_);
    w.put_all(std::span<const double>(vectors_.data));
    for (const auto& levels : links_) {
        w.put<std::uint32_t>(static_cast<std::uint32_t>(levels.size()));
        for (const auto& adj : levels) {
            w.put<std::uint32_t>(static_cast<std::uint32_t>(adj.size()));
            w.put_all(std::span<const std::uint32_t>(adj));
        }
    }
    w.put_all(std::span<const TermId>(ids_));
    w.check("hnsw index");
}

void HnswIndex::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write index " + path.string());
    save(out);
}

HnswIndex HnswIndex::load(std::istream& in) {
    io::Reader r(in);
    std::string magic;
    try {
        magic = r.bytes(kMagic.size());
    } catch (const FormatError&) {
        throw FormatError("not an index: file too short");
    }
    if (magic != kMagic) throw FormatError("not an index: bad magic");
    HnswIndex index;
    index.params_.m = r.get<std::uint64_t>();
    index.params_.ef_construction = r.get<std::uint64_t>();
    index.params_.ef_search = r.get<std::uint64_t>();
    index.params_.seed = r.get<std::uint64_t>();
    try {
        index.params_.validate();
    } catch (const ConfigError& e) {
        throw FormatError(std::string("corrupt index parameters: ") + e.what());
    }
    const auto n = r.get_count(1ULL << 32, "node");
    index.vectors_.dim = r.get_count(1ULL << 24, "dimension");
    index.entry_point_ = r.get<std::uint32_t>();
    index.max_level_ = r.get<std::int32_t>();
    if (n == 0 || index.entry_point_ >= n || index.max_level_ < 0 || index.max_level_ > 64) {
        throw FormatError("corrupt index header");
    }
    index.vectors_.data.resize(n * index.vectors_.dim);
    r.get_all(std::span<double>(index.vectors_.data));
    index.links_.resize(n);
    for (auto& levels : index.links_) {
        const auto count = r.get<std::uint32_t>();
        if (count == 0 || count > static_cast<std::uint32_t>(index.max_level_) + 1) {
            throw FormatError("corrupt node level");
        }
        levels.resize(count);
        for (auto& adj : levels) {
            const auto deg = r.get<std::uint32_t>();
            if (deg > 2 * index.params_.m) throw FormatError("corrupt adjacency list");
            adj.resize(deg);
            r.get_all(std::span<std::uint32_t>(adj));
            for (auto x : adj) {
                if (x >= n) throw FormatError("adjacency references unknown node");
            }
        }
    }
    index.ids_.resize(n);
    r.get_all(std::span<TermId>(index.ids_));
    if (!r.at_end()) throw FormatError("trailing bytes after index");
    index.check_invariants();
    return index;
}

HnswIndex HnswIndex::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open index " + path.string());
    return load(in);
}

void HnswIndex::check_invariants() const {
    if (level_of(entry_point_) != max_level_) throw FormatError("entry point is not on the top level");
    for (std::uint32_t node = 0; node < links_.size(); ++node) {
        for (int l = 0; l <= level_of(node); ++l) {
            for (auto nb : neighbors(node, l)) {
                if (level_of(nb) < l) throw FormatError("edge to a node absent from its level");
            }
        }
    }
}

VectorSet random_unit_vectors(std::size_t n, std::size_t dim, std::uint64_t seed) {
    Rng rng(seed);
    VectorSet out;
    out.dim = dim;
    out.data.reserve(n * dim);
    std::vector<double> row(dim);
    for (std::size_t i = 0; i < n; ++i) {
        // Box-Muller keeps the draws independent of the library's normal_distribution.
        for (std::size_t j = 0; j < dim; j += 2) {
            const double radius = std::sqrt(-2.0 * std::log(rng.unit_open_closed()));
            const double angle = 2.0 * std::numbers::pi * rng.unit();
            row[j] = radius * std::cos(angle);
            if (j + 1 < dim) row[j + 1] = radius * std::sin(angle);
        }
        const auto unit = normalize(row);
        out.data.insert(out.data.end(), unit.begin(), unit.end());
    }
    return out;
}

}  // namespace kgrec::ann
