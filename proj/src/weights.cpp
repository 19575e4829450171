#include "sodkit/weights.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace sodkit {

std::uint64_t fnv1a64(const void* bytes, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(bytes);
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001B3ULL;
    }
    return h;
}

std::uint64_t fnv1a64(const std::string& s) { return fnv1a64(s.data(), s.size()); }

WeightLayerParams WeightStore::make_identity_layer(int in_c, int out_c) {
    WeightLayerParams p;
    p.in_channels = in_c;
    p.out_channels = out_c;
    p.kernel.assign(static_cast<std::size_t>(out_c) * in_c * 9, 0.0f);
    for (int oc = 0; oc < out_c; ++oc)
        p.kernel[(static_cast<std::size_t>(oc) * in_c + oc % in_c) * 9 + 4] = 1.0f;
    p.bn_gamma.assign(out_c, 1.0f);
    p.bn_beta.assign(out_c, 0.0f);
    p.bn_mean.assign(out_c, 0.0f);
    p.bn_eps = 1e-5f;
    // var + eps == 1 exactly, so identity fixtures stay bit-exact
    p.bn_var.assign(out_c, 1.0f - p.bn_eps);
    return p;
}

Proj1x1 WeightStore::make_identity_proj(int in_c, int out_c) {
    Proj1x1 p;
    p.in_channels = in_c;
    p.out_channels = out_c;
    p.kernel.assign(static_cast<std::size_t>(out_c) * in_c, 0.0f);
    for (int oc = 0; oc < out_c; ++oc)
        p.kernel[static_cast<std::size_t>(oc) * in_c + oc % in_c] = 1.0f;
    return p;
}

namespace {

WeightLayerParams glorot_layer(std::uint64_t sub_seed, int in_c, int out_c) {
    WeightLayerParams p;
    p.in_channels = in_c;
    p.out_channels = out_c;
    SplitMix64 rng(sub_seed);
    const float bound = std::sqrt(6.0f / (in_c * 9.0f + out_c * 9.0f));
    p.kernel.resize(static_cast<std::size_t>(out_c) * in_c * 9);
    for (float& v : p.kernel) v = rng.next_uniform(bound);
    p.bn_gamma.assign(out_c, 1.0f);
    p.bn_beta.assign(out_c, 0.0f);
    p.bn_mean.assign(out_c, 0.0f);
    p.bn_var.assign(out_c, 1.0f);
    p.bn_eps = 1e-5f;
    return p;
}

Proj1x1 glorot_proj(std::uint64_t sub_seed, int in_c, int out_c) {
    Proj1x1 p;
    p.in_channels = in_c;
    p.out_channels = out_c;
    SplitMix64 rng(sub_seed);
    const float bound = std::sqrt(6.0f / (in_c + out_c));
    p.kernel.resize(static_cast<std::size_t>(out_c) * in_c);
    for (float& v : p.kernel) v = rng.next_uniform(bound);
    return p;
}

}  // namespace

const WeightLayerParams& WeightStore::layer(const std::string& name, int in_c, int out_c) {
    auto it = layers_.find(name);
    if (it != layers_.end()) {
        if (it->second.in_channels != in_c || it->second.out_channels != out_c)
            throw std::runtime_error("weight site shape mismatch: " + name);
        return it->second;
    }
    if (loaded_)
        throw std::runtime_error("weight container missing site: " + name);
    WeightLayerParams p = (init_ == WeightInit::Identity)
                              ? make_identity_layer(in_c, out_c)
                              : glorot_layer(seed_ ^ fnv1a64(name), in_c, out_c);
    return layers_.emplace(name, std::move(p)).first->second;
}

const Proj1x1& WeightStore::proj(const std::string& name, int in_c, int out_c) {
    auto it = projs_.find(name);
    if (it != projs_.end()) {
        if (it->second.in_channels != in_c || it->second.out_channels != out_c)
            throw std::runtime_error("projection site shape mismatch: " + name);
        return it->second;
    }
    if (loaded_)
        throw std::runtime_error("weight container missing site: " + name);
    Proj1x1 p = (init_ == WeightInit::Identity)
                    ? make_identity_proj(in_c, out_c)
                    : glorot_proj(seed_ ^ fnv1a64(name + "/proj"), in_c, out_c);
    return projs_.emplace(name, std::move(p)).first->second;
}

// Container layout: magic "MCIW", version u16, entry count u32; per entry:
// name length u16, UTF-8 name, rank u8, dims (u32 each), little-endian f32
// payload. All integers little-endian.
namespace {

constexpr std::uint16_t kVersion = 1;

void put_u16(std::ostream& os, std::uint16_t v) {
    unsigned char b[2] = {static_cast<unsigned char>(v & 0xFF),
                          static_cast<unsigned char>(v >> 8)};
    os.write(reinterpret_cast<const char*>(b), 2);
}

void put_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFF);
    os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint16_t get_u16(std::istream& is) {
    unsigned char b[2];
    is.read(reinterpret_cast<char*>(b), 2);
    return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

std::uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) |
           (static_cast<std::uint32_t>(b[3]) << 24);
}

void write_entry(std::ostream& os, const std::string& name,
                 const std::vector<std::uint32_t>& dims, const float* payload) {
    put_u16(os, static_cast<std::uint16_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    os.put(static_cast<char>(dims.size()));
    std::size_t n = 1;
    for (std::uint32_t d : dims) {
        put_u32(os, d);
        n *= d;
    }
    for (std::size_t i = 0; i < n; ++i) {
        std::uint32_t bits;
        std::memcpy(&bits, &payload[i], 4);
        put_u32(os, bits);
    }
}

struct RawEntry {
    std::vector<std::uint32_t> dims;
    std::vector<float> payload;
};

}  // namespace

void WeightStore::save(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open weight file for writing: " + path);
    os.write("MCIW", 4);
    put_u16(os, kVersion);
    std::uint32_t count = 0;
    for (const auto& [name, p] : layers_) {
        (void)name;
        (void)p;
        count += 6;  // kernel + 4 bn arrays + eps
    }
    count += static_cast<std::uint32_t>(projs_.size());
    put_u32(os, count);
    for (const auto& [name, p] : layers_) {
        write_entry(os, name + "/kernel",
                    {static_cast<std::uint32_t>(p.out_channels),
                     static_cast<std::uint32_t>(p.in_channels), 3, 3},
                    p.kernel.data());
        const std::uint32_t oc = static_cast<std::uint32_t>(p.out_channels);
        write_entry(os, name + "/bn_gamma", {oc}, p.bn_gamma.data());
        write_entry(os, name + "/bn_beta", {oc}, p.bn_beta.data());
        write_entry(os, name + "/bn_mean", {oc}, p.bn_mean.data());
        write_entry(os, name + "/bn_var", {oc}, p.bn_var.data());
        write_entry(os, name + "/bn_eps", {1}, &p.bn_eps);
    }
    for (const auto& [name, p] : projs_)
        write_entry(os, name + "/proj",
                    {static_cast<std::uint32_t>(p.out_channels),
                     static_cast<std::uint32_t>(p.in_channels)},
                    p.kernel.data());
    if (!os) throw std::runtime_error("write failure: " + path);
}

WeightStore WeightStore::load(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open weight file: " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "MCIW", 4) != 0)
        throw std::runtime_error("malformed weight container (bad magic): " + path);
    const std::uint16_t version = get_u16(is);
    if (version != kVersion)
        throw std::runtime_error("unsupported weight container version");
    const std::uint32_t count = get_u32(is);

    std::map<std::string, RawEntry> raw;
    for (std::uint32_t e = 0; e < count; ++e) {
        const std::uint16_t name_len = get_u16(is);
        std::string name(name_len, '\0');
        is.read(name.data(), name_len);
        const int rank = is.get();
        if (!is || rank < 0 || rank > 8)
            throw std::runtime_error("malformed weight container entry: " + path);
        RawEntry entry;
        std::size_t n = 1;
        for (int d = 0; d < rank; ++d) {
            entry.dims.push_back(get_u32(is));
            n *= entry.dims.back();
        }
        if (n > (1u << 28)) throw std::runtime_error("weight entry too large");
        entry.payload.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const std::uint32_t bits = get_u32(is);
            std::memcpy(&entry.payload[i], &bits, 4);
        }
        if (!is) throw std::runtime_error("truncated weight container: " + path);
        raw.emplace(std::move(name), std::move(entry));
    }

    WeightStore store;
    store.loaded_ = true;
    auto take = [&](const std::string& key, std::size_t expected_rank) -> RawEntry& {
        auto it = raw.find(key);
        if (it == raw.end())
            throw std::runtime_error("weight container missing entry: " + key);
        if (it->second.dims.size() != expected_rank)
            throw std::runtime_error("weight entry rank mismatch: " + key);
        return it->second;
    };
    for (const auto& [key, entry] : raw) {
        const auto slash = key.rfind('/');
        if (slash == std::string::npos)
            throw std::runtime_error("malformed weight entry name: " + key);
        const std::string site = key.substr(0, slash);
        const std::string part = key.substr(slash + 1);
        if (part == "kernel") {
            WeightLayerParams p;
            RawEntry& k = take(key, 4);
            if (k.dims[2] != 3 || k.dims[3] != 3)
                throw std::runtime_error("weight kernel must be 3x3: " + key);
            p.out_channels = static_cast<int>(k.dims[0]);
            p.in_channels = static_cast<int>(k.dims[1]);
            p.kernel = k.payload;
            p.bn_gamma = take(site + "/bn_gamma", 1).payload;
            p.bn_beta = take(site + "/bn_beta", 1).payload;
            p.bn_mean = take(site + "/bn_mean", 1).payload;
            p.bn_var = take(site + "/bn_var", 1).payload;
            p.bn_eps = take(site + "/bn_eps", 1).payload.at(0);
            if (static_cast<int>(p.bn_gamma.size()) != p.out_channels)
                throw std::runtime_error("bn param length mismatch: " + site);
            for (float v : p.bn_var)
                if (v < 0.0f) throw std::runtime_error("negative bn_var: " + site);
            if (!(p.bn_eps > 0.0f)) throw std::runtime_error("bn_eps must be > 0: " + site);
            store.layers_.emplace(site, std::move(p));
        } else if (part == "proj") {
            Proj1x1 p;
            p.out_channels = static_cast<int>(entry.dims.at(0));
            p.in_channels = static_cast<int>(entry.dims.at(1));
            p.kernel = entry.payload;
            store.projs_.emplace(site, std::move(p));
        }
    }
    return store;
}

}  // namespace sodkit
