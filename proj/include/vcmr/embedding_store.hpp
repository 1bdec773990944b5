#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "vcmr/errors.hpp"

namespace vcmr {

// What a store's vectors encode. Purely an in-memory tag; the file formats
// carry no kind byte.
enum class StoreKind { visual_precomputed, visual_raw, subtitle, query, fused };

// An id paired with a fixed-dimension vector. Components are 32-bit floats,
// matching the on-disk layout.
struct EmbeddingRecord {
    std::string id;
    std::vector<float> vector;
};

// Immutable-after-load collection of same-dimension embedding vectors with
// exact id lookup. Insertion order is preserved so a loaded store writes
// back byte-identically; equality is order-insensitive.
class EmbeddingStore {
public:
    explicit EmbeddingStore(std::size_t dimension, StoreKind kind = StoreKind::fused);

    std::size_t dimension() const { return dimension_; }
    std::size_t size() const { return records_.size(); }
    StoreKind kind() const { return kind_; }
    void set_kind(StoreKind kind) { kind_ = kind; }

    // Validates dimension, finiteness, and id uniqueness before inserting.
    void add(EmbeddingRecord record);

    bool contains(const std::string& id) const;
    const std::vector<float>* find(const std::string& id) const;
    const std::vector<float>& at(const std::string& id) const;
    const std::vector<EmbeddingRecord>& records() const { return records_; }

    // True when both stores hold the same id -> vector map, regardless of
    // insertion order.
    bool same_records(const EmbeddingStore& other) const;

private:
    std::size_t dimension_;
    StoreKind kind_;
    std::vector<EmbeddingRecord> records_;
    std::unordered_map<std::string, std::size_t> by_id_;
};

enum class StoreFormat { binary, jsonl };

// Picks the format from the file extension: .jsonl is JSONL, anything else
// is the EMB1 binary layout.
StoreFormat store_format_for_path(const std::filesystem::path& path);

// Reads a store, validating the header, per-record dimensions, id
// uniqueness, and component finiteness. Errors name the offending record.
EmbeddingStore load_store(const std::filesystem::path& path, StoreFormat format);

void save_store(const EmbeddingStore& store, const std::filesystem::path& path,
                StoreFormat format);

// Componentwise sum of the frozen-encoder feature and the trainable-encoder
// feature for one frame or clip. A missing `raw` acts as the zero vector, so
// clips whose source footage is unavailable still get a usable feature.
std::vector<float> fuse_features(const std::vector<float>& precomputed,
                                 const std::optional<std::vector<float>>& raw);

// Componentwise sum of the visual and subtitle encodings; the combined
// vector is the final video encoding used for similarity scoring.
std::vector<float> fuse_modalities(const std::vector<float>& visual,
                                   const std::vector<float>& subtitle);

} // namespace vcmr
