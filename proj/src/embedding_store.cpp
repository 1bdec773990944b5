#include "vcmr/embedding_store.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <utility>

#include <json.hpp>

#include "binary_io.hpp"

namespace vcmr {

namespace {

constexpr char kMagic[4] = {'E', 'M', 'B', '1'};

void require_finite(const EmbeddingRecord& record) {
    for (float v : record.vector) {
        if (!std::isfinite(v)) {
            throw non_finite_error("record '" + record.id +
                                   "' contains a non-finite component");
        }
    }
}

} // namespace

EmbeddingStore::EmbeddingStore(std::size_t dimension, StoreKind kind)
    : dimension_(dimension), kind_(kind) {
    if (dimension_ == 0) {
        throw invalid_input_error("embedding dimension must be at least 1");
    }
}

void EmbeddingStore::add(EmbeddingRecord record) {
    if (record.vector.size() != dimension_) {
        throw dimension_error("record '" + record.id + "' has dimension " +
                              std::to_string(record.vector.size()) +
                              ", store expects " + std::to_string(dimension_));
    }
    require_finite(record);
    if (by_id_.contains(record.id)) {
        throw duplicate_id_error("duplicate record id '" + record.id + "'");
    }
    by_id_.emplace(record.id, records_.size());
    records_.push_back(std::move(record));
}

bool EmbeddingStore::contains(const std::string& id) const {
    return by_id_.contains(id);
}

const std::vector<float>* EmbeddingStore::find(const std::string& id) const {
    auto it = by_id_.find(id);
    return it == by_id_.end() ? nullptr : &records_[it->second].vector;
}

const std::vector<float>& EmbeddingStore::at(const std::string& id) const {
    const auto* vec = find(id);
    if (!vec) {
        throw invalid_input_error("no embedding record with id '" + id + "'");
    }
    return *vec;
}

bool EmbeddingStore::same_records(const EmbeddingStore& other) const {
    if (dimension_ != other.dimension_ || size() != other.size()) return false;
    for (const auto& rec : records_) {
        const auto* vec = other.find(rec.id);
        if (!vec || *vec != rec.vector) return false;
    }
    return true;
}

StoreFormat store_format_for_path(const std::filesystem::path& path) {
    return path.extension() == ".jsonl" ? StoreFormat::jsonl : StoreFormat::binary;
}

namespace {

EmbeddingStore load_binary(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw io_error("cannot open '" + path.string() + "' for reading");

    char magic[4];
    detail::read_exact(is, magic, 4, "EMB1 magic");
    if (std::memcmp(magic, kMagic, 4) != 0) {
        throw format_error("'" + path.string() + "' is not an EMB1 file (bad magic)");
    }
    const std::uint32_t dim = detail::get_u32(is, "EMB1 dimension");
    if (dim == 0) {
        throw format_error("'" + path.string() + "' declares dimension 0");
    }
    const std::uint64_t count = detail::get_u64(is, "EMB1 record count");

    EmbeddingStore store(dim);
    for (std::uint64_t i = 0; i < count; ++i) {
        const std::uint16_t id_len = detail::get_u16(is, "record id length");
        std::string id(id_len, '\0');
        detail::read_exact(is, id.data(), id_len, "record id");
        EmbeddingRecord rec{std::move(id), {}};
        rec.vector.resize(dim);
        detail::read_exact(is, reinterpret_cast<char*>(rec.vector.data()),
                           static_cast<std::size_t>(dim) * 4,
                           "vector of record '" + rec.id + "'");
        if constexpr (std::endian::native != std::endian::little) {
            for (float& v : rec.vector) {
                std::uint32_t bits;
                std::memcpy(&bits, &v, 4);
                bits = ((bits & 0xff) << 24) | ((bits & 0xff00) << 8) |
                       ((bits >> 8) & 0xff00) | (bits >> 24);
                std::memcpy(&v, &bits, 4);
            }
        }
        store.add(std::move(rec));
    }
    if (is.peek() != std::char_traits<char>::eof()) {
        throw format_error("'" + path.string() + "' has trailing bytes after " +
                           std::to_string(count) + " records");
    }
    return store;
}

void save_binary(const EmbeddingStore& store, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw io_error("cannot open '" + path.string() + "' for writing");

    os.write(kMagic, 4);
    detail::put_u32(os, static_cast<std::uint32_t>(store.dimension()));
    detail::put_u64(os, static_cast<std::uint64_t>(store.size()));
    for (const auto& rec : store.records()) {
        if (rec.id.size() > std::numeric_limits<std::uint16_t>::max()) {
            throw format_error("record id '" + rec.id.substr(0, 32) +
                               "...' exceeds the 65535-byte id limit");
        }
        detail::put_u16(os, static_cast<std::uint16_t>(rec.id.size()));
        os.write(rec.id.data(), static_cast<std::streamsize>(rec.id.size()));
        for (float v : rec.vector) detail::put_f32(os, v);
    }
    if (!os) throw io_error("failed writing '" + path.string() + "'");
}

EmbeddingStore load_jsonl(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw io_error("cannot open '" + path.string() + "' for reading");

    std::vector<EmbeddingRecord> records;
    std::string line;
    std::size_t line_no = 0;
    std::size_t dim = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw format_error(path.string() + ":" + std::to_string(line_no) +
                               ": invalid JSON: " + e.what());
        }
        if (!obj.is_object() || !obj.contains("id") || !obj.contains("vector") ||
            !obj["id"].is_string() || !obj["vector"].is_array()) {
            throw format_error(path.string() + ":" + std::to_string(line_no) +
                               ": expected {\"id\": str, \"vector\": [numbers]}");
        }
        EmbeddingRecord rec;
        rec.id = obj["id"].get<std::string>();
        for (const auto& x : obj["vector"]) {
            if (!x.is_number()) {
                throw format_error("record '" + rec.id + "' has a non-numeric component");
            }
            rec.vector.push_back(static_cast<float>(x.get<double>()));
        }
        if (rec.vector.empty()) {
            throw format_error("record '" + rec.id + "' has an empty vector");
        }
        if (dim == 0) dim = rec.vector.size();
        records.push_back(std::move(rec));
    }
    if (records.empty()) {
        throw format_error("'" + path.string() + "' contains no embedding records");
    }
    EmbeddingStore store(dim);
    for (auto& rec : records) store.add(std::move(rec));
    return store;
}

void save_jsonl(const EmbeddingStore& store, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw io_error("cannot open '" + path.string() + "' for writing");
    for (const auto& rec : store.records()) {
        nlohmann::ordered_json obj;
        obj["id"] = rec.id;
        obj["vector"] = rec.vector;
        os << obj.dump() << '\n';
    }
    if (!os) throw io_error("failed writing '" + path.string() + "'");
}

} // namespace

EmbeddingStore load_store(const std::filesystem::path& path, StoreFormat format) {
    return format == StoreFormat::binary ? load_binary(path) : load_jsonl(path);
}

void save_store(const EmbeddingStore& store, const std::filesystem::path& path,
                StoreFormat format) {
    if (format == StoreFormat::binary) {
        save_binary(store, path);
    } else {
        save_jsonl(store, path);
    }
}

namespace {

std::vector<float> add_vectors(const std::vector<float>& a,
                               const std::vector<float>& b) {
    if (a.size() != b.size()) {
        throw dimension_error("cannot add vectors of dimension " +
                              std::to_string(a.size()) + " and " +
                              std::to_string(b.size()));
    }
    std::vector<float> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
    return out;
}

} // namespace

std::vector<float> fuse_features(const std::vector<float>& precomputed,
                                 const std::optional<std::vector<float>>& raw) {
    if (!raw.has_value()) return precomputed;
    return add_vectors(precomputed, *raw);
}

std::vector<float> fuse_modalities(const std::vector<float>& visual,
                                   const std::vector<float>& subtitle) {
    return add_vectors(visual, subtitle);
}

} // namespace vcmr
