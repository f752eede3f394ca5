#include "vatd/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace vatd {

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'V', 'A', 'T', 'D'};

void write_u32(std::ostream& out, uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

uint32_t read_u32(std::istream& in) {
    uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in) {
        throw std::runtime_error("incompatible checkpoint: truncated header");
    }
    return v;
}

}  // namespace

void write_checkpoint(const std::string& path, const nlohmann::json& meta,
                      const std::vector<std::span<const double>>& tensors) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open checkpoint for writing: " + path);
    }
    out.write(kMagic, sizeof kMagic);
    write_u32(out, kCheckpointVersion);
    const std::string meta_str = meta.dump();
    write_u32(out, static_cast<uint32_t>(meta_str.size()));
    out.write(meta_str.data(), static_cast<std::streamsize>(meta_str.size()));
    for (const auto& t : tensors) {
        out.write(reinterpret_cast<const char*>(t.data()),
                  static_cast<std::streamsize>(t.size_bytes()));
    }
    if (!out) {
        throw std::runtime_error("failed writing checkpoint: " + path);
    }
}

RawCheckpoint read_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open checkpoint: " + path);
    }
    char magic[4] = {};
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
        throw std::runtime_error("incompatible checkpoint: bad magic in " + path);
    }
    const uint32_t version = read_u32(in);
    if (version != kCheckpointVersion) {
        throw std::runtime_error("incompatible checkpoint: version " +
                                 std::to_string(version));
    }
    const uint32_t meta_len = read_u32(in);
    std::string meta_str(meta_len, '\0');
    in.read(meta_str.data(), meta_len);
    if (!in) {
        throw std::runtime_error("incompatible checkpoint: truncated metadata");
    }
    RawCheckpoint ckpt;
    try {
        ckpt.meta = nlohmann::json::parse(meta_str);
    } catch (const nlohmann::json::parse_error&) {
        throw std::runtime_error("incompatible checkpoint: unparseable metadata");
    }
    // the rest of the file is the flat tensor payload
    std::vector<char> rest((std::istreambuf_iterator<char>(in)),
                           std::istreambuf_iterator<char>());
    if (rest.size() % sizeof(double) != 0) {
        throw std::runtime_error("incompatible checkpoint: ragged payload");
    }
    ckpt.data.resize(rest.size() / sizeof(double));
    std::memcpy(ckpt.data.data(), rest.data(), rest.size());
    return ckpt;
}

}  // namespace vatd
