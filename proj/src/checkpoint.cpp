#include "mgrnet/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <map>

#include "mgrnet/errors.hpp"

namespace mgrnet {

namespace {

constexpr char kMagic[8] = {'M', 'G', 'R', 'N', 'E', 'T', '0', '1'};

void write_u32(std::ostream& os, std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                                static_cast<unsigned char>((v >> 8) & 0xff),
                                static_cast<unsigned char>((v >> 16) & 0xff),
                                static_cast<unsigned char>((v >> 24) & 0xff)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

bool read_u32(std::istream& is, std::uint32_t& v) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4)) return false;
    v = static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
        (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
    return true;
}

}  // namespace

void save_checkpoint(const std::string& path,
                     const std::vector<std::pair<std::string, const Tensor*>>& params) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw_data("checkpoint", "cannot write '" + path + "'");
    os.write(kMagic, 8);
    for (const auto& [name, t] : params) {
        write_u32(os, static_cast<std::uint32_t>(name.size()));
        os.write(name.data(), static_cast<std::streamsize>(name.size()));
        write_u32(os, static_cast<std::uint32_t>(t->rank()));
        for (std::size_t d : t->shape) write_u32(os, static_cast<std::uint32_t>(d));
        static_assert(sizeof(float) == 4);
        os.write(reinterpret_cast<const char*>(t->data.data()),
                 static_cast<std::streamsize>(t->data.size() * 4));
    }
    if (!os) throw_data("checkpoint", "write failed for '" + path + "'");
}

std::vector<std::pair<std::string, Tensor>> read_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw_data("checkpoint", "cannot open '" + path + "'");
    char magic[8];
    if (!is.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0)
        throw_data("checkpoint", "unknown magic in '" + path + "'");
    std::vector<std::pair<std::string, Tensor>> entries;
    std::uint32_t name_len;
    while (read_u32(is, name_len)) {
        std::string name(name_len, '\0');
        if (!is.read(name.data(), name_len)) throw_data("checkpoint", "truncated name");
        std::uint32_t rank;
        if (!read_u32(is, rank)) throw_data("checkpoint", "truncated rank for " + name);
        Shape shape(rank);
        for (auto& d : shape) {
            std::uint32_t ext;
            if (!read_u32(is, ext) || ext == 0)
                throw_data("checkpoint", "bad extent for " + name);
            d = ext;
        }
        Tensor t(shape);
        if (!is.read(reinterpret_cast<char*>(t.data.data()),
                     static_cast<std::streamsize>(t.data.size() * 4)))
            throw_data("checkpoint", "truncated values for " + name);
        entries.emplace_back(std::move(name), std::move(t));
    }
    return entries;
}

void load_checkpoint(const std::string& path,
                     const std::vector<std::pair<std::string, Tensor*>>& params) {
    auto entries = read_checkpoint(path);
    std::map<std::string, Tensor*> loaded;
    for (auto& [name, t] : entries) loaded[name] = &t;
    if (loaded.size() != params.size())
        throw_data("checkpoint", "parameter count mismatch: file has " +
                                     std::to_string(loaded.size()) + ", model has " +
                                     std::to_string(params.size()));
    for (const auto& [name, dst] : params) {
        auto it = loaded.find(name);
        if (it == loaded.end()) throw_data("checkpoint", "missing parameter '" + name + "'");
        if (it->second->shape != dst->shape)
            throw_data("checkpoint", "shape mismatch for '" + name + "': file " +
                                         shape_str(it->second->shape) + " vs model " +
                                         shape_str(dst->shape));
        dst->data = it->second->data;
    }
}

}  // namespace mgrnet
