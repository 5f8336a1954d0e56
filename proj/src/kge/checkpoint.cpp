#include "kgrec/kge/checkpoint.hpp"

#include <fstream>

#include "kgrec/common/binary_io.hpp"
#include "kgrec/common/error.hpp"

namespace kgrec::kge {
namespace {
constexpr std::string_view kMagic = "KGE1";
constexpr std::uint64_t kMaxRows = 1ULL << 32;
constexpr std::uint64_t kMaxDim = 1ULL << 20;
}  // namespace

void save_checkpoint(const EmbeddingModel& model, std::ostream& out) {
    io::Writer w(out);
    w.bytes(kMagic);
    w.put(static_cast<std::uint8_t>(model.kind()));
    w.put(static_cast<std::uint64_t>(model.config().dim));
    w.put(static_cast<std::uint64_t>(model.n_entities()));
    w.put(static_cast<std::uint64_t>(model.n_relations()));
    w.put_all(std::span<const double>(model.entity_params()));
    w.put_all(std::span<const double>(model.relation_params()));
    for (auto id : model.entity_ids()) w.put(static_cast<std::uint64_t>(id));
    for (auto id : model.relation_ids()) w.put(static_cast<std::uint64_t>(id));
    w.check("checkpoint");
}

void save_checkpoint(const EmbeddingModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write checkpoint " + path.string());
    save_checkpoint(model, out);
}

EmbeddingModel load_checkpoint(std::istream& in) {
    io::Reader r(in);
    std::string magic;
    try {
        magic = r.bytes(kMagic.size());
    } catch (const FormatError&) {
        throw FormatError("not a checkpoint: file too short");
    }
    if (magic != kMagic) throw FormatError("not a checkpoint: bad magic");
    const auto kind = r.get<std::uint8_t>();
    if (kind > static_cast<std::uint8_t>(ModelKind::TransE)) throw FormatError("unknown model kind in checkpoint");
    TrainConfig cfg;
    cfg.model = static_cast<ModelKind>(kind);
    cfg.dim = r.get_count(kMaxDim, "dim");
    if (cfg.dim == 0) throw FormatError("checkpoint dim is zero");
    const auto n_entities = r.get_count(kMaxRows, "entity");
    const auto n_relations = r.get_count(kMaxRows, "relation");

    const std::size_t width = cfg.row_width();
    std::vector<double> entity(n_entities * width);
    std::vector<double> relation(n_relations * width);
    r.get_all(std::span<double>(entity));
    r.get_all(std::span<double>(relation));
    std::vector<TermId> entity_ids(n_entities), relation_ids(n_relations);
    for (auto& id : entity_ids) id = static_cast<TermId>(r.get<std::uint64_t>());
    for (auto& id : relation_ids) id = static_cast<TermId>(r.get<std::uint64_t>());
    if (!r.at_end()) throw FormatError("trailing bytes after checkpoint");

    EmbeddingModel model(cfg, std::move(entity_ids), std::move(relation_ids));
    model.entity_params() = std::move(entity);
    model.relation_params() = std::move(relation);
    return model;
}

EmbeddingModel load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint " + path.string());
    return load_checkpoint(in);
}

}  // namespace kgrec::kge
