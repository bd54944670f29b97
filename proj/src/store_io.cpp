#include "gaug/store_io.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace gaug {

const char* to_string(StoreErrorCode code) {
    switch (code) {
        case StoreErrorCode::Io: return "Io";
        case StoreErrorCode::BadMagic: return "BadMagic";
        case StoreErrorCode::VersionMismatch: return "VersionMismatch";
        case StoreErrorCode::Truncated: return "Truncated";
        case StoreErrorCode::ChecksumMismatch: return "ChecksumMismatch";
        case StoreErrorCode::InvalidPayload: return "InvalidPayload";
    }
    return "Unknown";
}

namespace {

class Writer {
public:
    void bytes(const void* p, std::size_t n) {
        const auto* b = static_cast<const std::uint8_t*>(p);
        out_.insert(out_.end(), b, b + n);
    }
    template <typename T>
    void le(T value) {
        using U = std::make_unsigned_t<T>;
        U u = static_cast<U>(value);
        for (std::size_t i = 0; i < sizeof(T); ++i) {
            out_.push_back(static_cast<std::uint8_t>(u & 0xffu));
            u = static_cast<U>(u >> 8);
        }
    }
    void f32(float v) { le(std::bit_cast<std::uint32_t>(v)); }
    void crc() {
        const auto c = crc32(0L, out_.data(), static_cast<uInt>(out_.size()));
        le(static_cast<std::uint32_t>(c));
    }
    std::vector<std::uint8_t> take() { return std::move(out_); }

private:
    std::vector<std::uint8_t> out_;
};

class Reader {
public:
    explicit Reader(const std::vector<std::uint8_t>& in) : in_(in) {}

    void need(std::size_t n) const {
        if (in_.size() - pos_ < n) {
            throw StoreError(StoreErrorCode::Truncated,
                             "payload ends at byte " + std::to_string(in_.size()) + ", needed " +
                                 std::to_string(pos_ + n));
        }
    }
    void magic(const char (&expected)[8]) {
        need(8);
        if (std::memcmp(in_.data() + pos_, expected, 8) != 0) {
            throw StoreError(StoreErrorCode::BadMagic, "unrecognized file magic");
        }
        pos_ += 8;
    }
    template <typename T>
    T le() {
        need(sizeof(T));
        std::make_unsigned_t<T> u = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) {
            u |= static_cast<std::make_unsigned_t<T>>(in_[pos_ + i]) << (8 * i);
        }
        pos_ += sizeof(T);
        return static_cast<T>(u);
    }
    float f32() { return std::bit_cast<float>(le<std::uint32_t>()); }
    void check_crc() {
        const std::size_t body = pos_;
        const auto stored = le<std::uint32_t>();
        const auto actual =
            static_cast<std::uint32_t>(crc32(0L, in_.data(), static_cast<uInt>(body)));
        if (stored != actual) throw StoreError(StoreErrorCode::ChecksumMismatch, "CRC32 mismatch");
        if (pos_ != in_.size()) {
            throw StoreError(StoreErrorCode::InvalidPayload, "trailing bytes after checksum");
        }
    }
    std::size_t remaining() const { return in_.size() - pos_; }

private:
    const std::vector<std::uint8_t>& in_;
    std::size_t pos_ = 0;
};

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw StoreError(StoreErrorCode::Io, "cannot open " + path.string());
    return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void write_file(const std::vector<std::uint8_t>& bytes, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw StoreError(StoreErrorCode::Io, "cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw StoreError(StoreErrorCode::Io, "write failed for " + path.string());
}

}  // namespace

std::vector<std::uint8_t> encode_store(const EmbeddingStore& store) {
    Writer w;
    w.bytes(kEmbeddingMagic, 8);
    w.le<std::uint32_t>(kEmbeddingFormatVersion);
    w.le<std::uint64_t>(store.count());
    w.le<std::uint32_t>(static_cast<std::uint32_t>(store.dim()));
    w.le<std::uint8_t>(store.has_labels() ? 1 : 0);
    for (float v : store.data()) w.f32(v);
    if (store.has_labels()) {
        for (std::uint32_t l : *store.labels()) w.le<std::uint32_t>(l);
    }
    w.crc();
    return w.take();
}

EmbeddingStore decode_store(const std::vector<std::uint8_t>& bytes) {
    Reader r(bytes);
    r.magic(kEmbeddingMagic);
    const auto version = r.le<std::uint32_t>();
    if (version != kEmbeddingFormatVersion) {
        throw StoreError(StoreErrorCode::VersionMismatch,
                         "file version " + std::to_string(version) + ", expected " +
                             std::to_string(kEmbeddingFormatVersion));
    }
    const auto n = r.le<std::uint64_t>();
    const auto d = r.le<std::uint32_t>();
    const auto has_labels = r.le<std::uint8_t>();
    if (has_labels > 1) throw StoreError(StoreErrorCode::InvalidPayload, "has_labels flag not 0/1");
    if (n == 0 || d == 0) throw StoreError(StoreErrorCode::InvalidPayload, "empty store header");
    // Guard the allocation against garbage headers before reading.
    const std::uint64_t floats = n * d;
    if (floats / d != n || floats > r.remaining() / 4) {
        r.need(r.remaining() + 1);
    }
    std::vector<float> values(static_cast<std::size_t>(floats));
    for (auto& v : values) v = r.f32();
    std::optional<std::vector<std::uint32_t>> labels;
    if (has_labels) {
        r.need(static_cast<std::size_t>(n) * 4);
        labels.emplace(static_cast<std::size_t>(n));
        for (auto& l : *labels) l = r.le<std::uint32_t>();
    }
    r.check_crc();
    try {
        return EmbeddingStore(d, std::move(values), std::move(labels));
    } catch (const InvalidArgument& e) {
        throw StoreError(StoreErrorCode::InvalidPayload, e.what());
    }
}

void persist_store(const EmbeddingStore& store, const std::filesystem::path& path) {
    write_file(encode_store(store), path);
}

EmbeddingStore load_store(const std::filesystem::path& path) { return decode_store(read_file(path)); }

std::vector<std::uint8_t> encode_index(const NeighborhoodIndex& index) {
    Writer w;
    w.bytes(kIndexMagic, 8);
    w.le<std::uint32_t>(kIndexFormatVersion);
    w.le<std::uint64_t>(index.count());
    w.le<std::uint32_t>(static_cast<std::uint32_t>(index.k()));
    for (std::uint32_t id : index.data()) w.le<std::uint32_t>(id);
    w.crc();
    return w.take();
}

NeighborhoodIndex decode_index(const std::vector<std::uint8_t>& bytes) {
    Reader r(bytes);
    r.magic(kIndexMagic);
    const auto version = r.le<std::uint32_t>();
    if (version != kIndexFormatVersion) {
        throw StoreError(StoreErrorCode::VersionMismatch,
                         "file version " + std::to_string(version) + ", expected " +
                             std::to_string(kIndexFormatVersion));
    }
    const auto n = r.le<std::uint64_t>();
    const auto k = r.le<std::uint32_t>();
    if (n == 0 || k == 0) throw StoreError(StoreErrorCode::InvalidPayload, "empty index header");
    const std::uint64_t ids = n * k;
    if (ids / k != n || ids > r.remaining() / 4) r.need(r.remaining() + 1);
    std::vector<std::uint32_t> neighbors(static_cast<std::size_t>(ids));
    for (auto& id : neighbors) id = r.le<std::uint32_t>();
    r.check_crc();
    try {
        return NeighborhoodIndex(k, std::move(neighbors));
    } catch (const InvalidArgument& e) {
        throw StoreError(StoreErrorCode::InvalidPayload, e.what());
    }
}

void persist_index(const NeighborhoodIndex& index, const std::filesystem::path& path) {
    write_file(encode_index(index), path);
}

NeighborhoodIndex load_index(const std::filesystem::path& path) { return decode_index(read_file(path)); }

}  // namespace gaug
