#include "kgrec/pipeline/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "kgrec/common/error.hpp"
#include "kgrec/common/parallel.hpp"
#include "kgrec/rdf/vocabulary.hpp"

namespace kgrec::pipeline {
namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(value);
    while (std::getline(in, item, ',')) {
        auto t = trim(item);
        if (!t.empty()) out.push_back(std::move(t));
    }
    return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& value) {
    std::uint64_t out = 0;
    const auto t = trim(value);
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
    if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size()) {
        throw ConfigError(key + ": expected a non-negative integer, got '" + value + "'");
    }
    return out;
}

std::size_t to_size(const std::string& key, const std::string& value) { return static_cast<std::size_t>(to_u64(key, value)); }

double to_double(const std::string& key, const std::string& value) {
    double out = 0;
    const auto t = trim(value);
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
    if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size()) {
        throw ConfigError(key + ": expected a number, got '" + value + "'");
    }
    return out;
}

bool to_bool(const std::string& key, const std::string& value) {
    const auto t = trim(value);
    if (t == "true" || t == "1" || t == "yes") return true;
    if (t == "false" || t == "0" || t == "no") return false;
    throw ConfigError(key + ": expected true or false, got '" + value + "'");
}

std::string fmt_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, ptr);
}

template <typename T, typename F>
std::string join(const std::vector<T>& items, F&& fmt) {
    std::string out;
    for (const auto& item : items) {
        if (!out.empty()) out += ',';
        out += fmt(item);
    }
    return out;
}

template <typename T, typename F>
std::vector<T> parse_list(const std::string& key, const std::string& value, F&& parse) {
    std::vector<T> out;
    for (const auto& item : split_list(value)) out.push_back(parse(key, item));
    if (out.empty()) throw ConfigError(key + ": expected a non-empty list");
    return out;
}

struct Field {
    std::function<void(PipelineConfig&, const std::string& key, const std::string& value)> set;
    std::function<std::string(const PipelineConfig&)> get;
};

#define KGREC_SIZE_FIELD(name, member)                                                              \
    {                                                                                               \
        name, {                                                                                     \
            [](PipelineConfig& c, const std::string& k, const std::string& v) { c.member = to_size(k, v); }, \
                [](const PipelineConfig& c) { return std::to_string(c.member); }                    \
        }                                                                                           \
    }

const std::map<std::string, Field>& fields() {
    static const std::map<std::string, Field> table = {
        {"pipeline.input_graph",
         {[](PipelineConfig& c, const std::string&, const std::string& v) { c.input_graph = trim(v); },
          [](const PipelineConfig& c) {
              return c.input_graph.empty() ? std::string() : std::filesystem::absolute(c.input_graph).string();
          }}},
        {"pipeline.output_dir",
         {[](PipelineConfig& c, const std::string&, const std::string& v) { c.output_dir = trim(v); },
          nullptr}},
        {"pipeline.targets",
         {[](PipelineConfig& c, const std::string&, const std::string& v) {
              c.targets.clear();
              for (const auto& t : split_list(v)) c.targets.push_back(rdf::vocab::expand_curie(t));
          },
          [](const PipelineConfig& c) { return join(c.targets, [](const std::string& s) { return s; }); }}},
        {"pipeline.targets_file",
         {[](PipelineConfig& c, const std::string&, const std::string& v) { c.targets_file = trim(v); },
          [](const PipelineConfig& c) {
              return c.targets_file.empty() ? std::string() : std::filesystem::absolute(c.targets_file).string();
          }}},
        KGREC_SIZE_FIELD("pipeline.raw_k", raw_k),
        KGREC_SIZE_FIELD("pipeline.top_n", top_n),
        {"pipeline.filter_config",
         {[](PipelineConfig& c, const std::string&, const std::string& v) { c.filter_config = trim(v); },
          [](const PipelineConfig& c) {
              return c.filter_config == "builtin" ? c.filter_config
                                                  : std::filesystem::absolute(c.filter_config).string();
          }}},
        {"pipeline.seed",
         {[](PipelineConfig& c, const std::string& k, const std::string& v) { c.seed = to_u64(k, v); },
          [](const PipelineConfig& c) { return std::to_string(c.seed); }}},
        {"pipeline.checkpoint",
         {[](PipelineConfig& c, const std::string&, const std::string& v) { c.checkpoint = trim(v); },
          [](const PipelineConfig& c) { return c.checkpoint.string(); }}},
        {"pipeline.index",
         {[](PipelineConfig& c, const std::string&, const std::string& v) { c.index = trim(v); },
          [](const PipelineConfig& c) { return c.index.string(); }}},
        {"pipeline.label_predicate",
         {[](PipelineConfig& c, const std::string&, const std::string& v) {
              c.label_predicate = rdf::vocab::expand_curie(trim(v));
          },
          [](const PipelineConfig& c) { return c.label_predicate; }}},
        {"pipeline.parse_mode",
         {[](PipelineConfig& c, const std::string& k, const std::string& v) {
              const auto t = trim(v);
              if (t == "strict") c.parse_mode = rdf::ParseMode::Strict;
              else if (t == "lenient") c.parse_mode = rdf::ParseMode::Lenient;
              else throw ConfigError(k + ": expected strict or lenient");
          },
          [](const PipelineConfig& c) {
              return std::string(c.parse_mode == rdf::ParseMode::Strict ? "strict" : "lenient");
          }}},
        {"pipeline.deterministic",
         {[](PipelineConfig& c, const std::string& k, const std::string& v) { c.deterministic = to_bool(k, v); },
          [](const PipelineConfig& c) { return std::string(c.deterministic ? "true" : "false"); }}},
        {"pipeline.threads",
         {[](PipelineConfig& c, const std::string& k, const std::string& v) { c.threads = to_size(k, v); },
          nullptr}},

        {"train.model",
         {[](PipelineConfig& c, const std::string&, const std::string& v) {
              c.train.model = kge::parse_model_kind(trim(v));
          },
          [](const PipelineConfig& c) { return std::string(kge::to_string(c.train.model)); }}},
        KGREC_SIZE_FIELD("train.dim", train.dim),
        {"train.lr",
         {[](PipelineConfig& c, const std::string& k, const std::string& v) { c.train.lr = to_double(k, v); },
          [](const PipelineConfig& c) { return fmt_double(c.train.lr); }}},
        KGREC_SIZE_FIELD("train.batch_size", train.batch_size),
        KGREC_SIZE_FIELD("train.epochs", train.epochs),
        KGREC_SIZE_FIELD("train.negatives_per_positive", train.negatives_per_positive),
        {"train.margin",
         {[](PipelineConfig& c, const std::string& k, const std::string& v) { c.train.margin = to_double(k, v); },
          [](const PipelineConfig& c) { return fmt_double(c.train.margin); }}},
        {"train.l2",
         {[](PipelineConfig& c, const std::string& k, const std::string& v) { c.train.l2 = to_double(k, v); },
          [](const PipelineConfig& c) { return fmt_double(c.train.l2); }}},
        {"train.optimizer",
         {[](PipelineConfig& c, const std::string&, const std::string& v) {
              c.train.optimizer = kge::parse_optimizer_kind(trim(v));
          },
          [](const PipelineConfig& c) { return std::string(kge::to_string(c.train.optimizer)); }}},

        KGREC_SIZE_FIELD("hnsw.M", hnsw.m),
        KGREC_SIZE_FIELD("hnsw.ef_construction", hnsw.ef_construction),
        KGREC_SIZE_FIELD("hnsw.ef_search", hnsw.ef_search),

        {"eval.split",
         {[](PipelineConfig& c, const std::string& k, const std::string& v) {
              auto parts = parse_list<double>(k, v, to_double);
              if (parts.size() != 3) throw ConfigError(k + ": expected train,valid,test ratios");
              c.split = {parts[0], parts[1], parts[2]};
          },
          [](const PipelineConfig& c) {
              return fmt_double(c.split.train) + "," + fmt_double(c.split.valid) + "," + fmt_double(c.split.test);
          }}},
        {"eval.mode",
         {[](PipelineConfig& c, const std::string&, const std::string& v) {
              c.ranking_mode = kge::parse_ranking_mode(trim(v));
          },
          [](const PipelineConfig& c) { return std::string(kge::to_string(c.ranking_mode)); }}},

        {"grid.M",
         {[](PipelineConfig& c, const std::string& k, const std::string& v) {
              c.grid.m = parse_list<std::size_t>(k, v, to_size);
          },
          [](const PipelineConfig& c) { return join(c.grid.m, [](std::size_t x) { return std::to_string(x); }); }}},
        {"grid.ef_construction",
         {[](PipelineConfig& c, const std::string& k, const std::string& v) {
              c.grid.ef_construction = parse_list<std::size_t>(k, v, to_size);
          },
          [](const PipelineConfig& c) {
              return join(c.grid.ef_construction, [](std::size_t x) { return std::to_string(x); });
          }}},
        {"grid.ef_search",
         {[](PipelineConfig& c, const std::string& k, const std::string& v) {
              c.grid.ef_search = parse_list<std::size_t>(k, v, to_size);
          },
          [](const PipelineConfig& c) {
              return join(c.grid.ef_search, [](std::size_t x) { return std::to_string(x); });
          }}},
        KGREC_SIZE_FIELD("grid.k", grid.k),
        KGREC_SIZE_FIELD("grid.queries", grid_queries),
        {"grid.source",
         {[](PipelineConfig& c, const std::string& k, const std::string& v) {
              const auto t = trim(v);
              if (t != "model" && t != "random") throw ConfigError(k + ": expected model or random");
              c.grid_source = t;
          },
          [](const PipelineConfig& c) { return c.grid_source; }}},
        KGREC_SIZE_FIELD("grid.vectors", grid_vectors),
        KGREC_SIZE_FIELD("grid.dim", grid_dim),

        {"sweep.lrs",
         {[](PipelineConfig& c, const std::string& k, const std::string& v) {
              c.sweep_lrs = parse_list<double>(k, v, to_double);
          },
          [](const PipelineConfig& c) { return join(c.sweep_lrs, fmt_double); }}},
        {"sweep.dims",
         {[](PipelineConfig& c, const std::string& k, const std::string& v) {
              c.sweep_dims = parse_list<std::size_t>(k, v, to_size);
          },
          [](const PipelineConfig& c) {
              return join(c.sweep_dims, [](std::size_t x) { return std::to_string(x); });
          }}},

        {"compare.models",
         {[](PipelineConfig& c, const std::string& k, const std::string& v) {
              c.compare_models = parse_list<kge::ModelKind>(
                  k, v, [](const std::string&, const std::string& s) { return kge::parse_model_kind(s); });
          },
          [](const PipelineConfig& c) {
              return join(c.compare_models, [](kge::ModelKind m) { return std::string(kge::to_string(m)); });
          }}},

        KGREC_SIZE_FIELD("synth.n_persons", synth.n_persons),
        KGREC_SIZE_FIELD("synth.community_size", synth.community_size),
        KGREC_SIZE_FIELD("synth.events_per_community", synth.events_per_community),
        KGREC_SIZE_FIELD("synth.background_events", synth.background_events),
        KGREC_SIZE_FIELD("synth.places", synth.places),
        KGREC_SIZE_FIELD("synth.targets", synth.n_targets),
    };
    return table;
}

#undef KGREC_SIZE_FIELD

}  // namespace

void apply_setting(PipelineConfig& config, const std::string& dotted_key, const std::string& value) {
    const auto& table = fields();
    auto it = table.find(trim(dotted_key));
    if (it == table.end()) throw ConfigError("unknown config key '" + dotted_key + "'");
    it->second.set(config, it->first, value);
}

std::vector<std::string> known_keys() {
    std::vector<std::string> out;
    for (const auto& [k, _] : fields()) out.push_back(k);
    return out;
}

void PipelineConfig::finalize() {
    threads = threads == 0 ? worker_count() : std::min(threads, worker_count());
    train.seed = seed + kTrainSeedOffset;
    train.deterministic = deterministic;
    train.threads = threads;
    hnsw.seed = seed + kIndexSeedOffset;
    grid.seed = seed + kGridSeedOffset;
    synth.seed = seed;
    if (top_n == 0) throw ConfigError("pipeline.top_n must be positive");
    if (raw_k < top_n) throw ConfigError("pipeline.raw_k must be at least pipeline.top_n");
    if (grid.k == 0) throw ConfigError("grid.k must be positive");
    if (synth.community_size == 0) throw ConfigError("synth.community_size must be positive");
    train.validate();
    hnsw.validate();
}

std::map<std::string, std::string> PipelineConfig::snapshot() const {
    std::map<std::string, std::string> out;
    for (const auto& [k, f] : fields()) {
        if (f.get) out.emplace(k, f.get(*this));
    }
    return out;
}

PipelineConfig parse_config(std::istream& in) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    PipelineConfig config;
    for (const auto& [section, body] : tree) {
        if (body.empty()) throw ConfigError("config: key '" + section + "' is outside a section");
        for (const auto& [key, value] : body) apply_setting(config, section + "." + key, value.data());
    }
    return config;
}

PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    auto config = parse_config(in);
    // Relative paths inside the file are relative to the file.
    const auto base = path.parent_path();
    for (auto* p : {&config.input_graph, &config.targets_file, &config.checkpoint, &config.index}) {
        if (!p->empty() && p->is_relative()) *p = base / *p;
    }
    if (config.filter_config != "builtin" && std::filesystem::path(config.filter_config).is_relative()) {
        config.filter_config = (base / config.filter_config).string();
    }
    return config;
}

std::vector<std::string> resolve_targets(const PipelineConfig& config) {
    auto out = config.targets;
    if (!config.targets_file.empty()) {
        std::ifstream in(config.targets_file);
        if (!in) throw ConfigError("cannot open targets file " + config.targets_file.string());
        std::string line;
        while (std::getline(in, line)) {
            auto first = trim(line.substr(0, line.find('\t')));
            if (first.empty() || first.front() == '#') continue;
            out.push_back(rdf::vocab::expand_curie(first));
        }
    }
    return out;
}

}  // namespace kgrec::pipeline
