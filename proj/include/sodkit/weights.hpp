#ifndef SODKIT_WEIGHTS_HPP
#define SODKIT_WEIGHTS_HPP

#include <cstdint>
#include <map>
#include <string>

#include "sodkit/tensor.hpp"

namespace sodkit {

// SplitMix64: tiny, deterministic, cross-platform.
struct SplitMix64 {
    std::uint64_t state;
    explicit SplitMix64(std::uint64_t seed) : state(seed) {}
    std::uint64_t next() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
    // uniform in [0,1)
    double next_unit() { return (next() >> 11) * 0x1.0p-53; }
    // uniform in [-bound, bound)
    float next_uniform(float bound) {
        return static_cast<float>((2.0 * next_unit() - 1.0) * bound);
    }
};

std::uint64_t fnv1a64(const void* bytes, std::size_t len);
std::uint64_t fnv1a64(const std::string& s);

enum class WeightInit {
    Random,    // Glorot-uniform from the store seed
    Identity,  // Dirac kernels, identity BN, truncating/replicating projections
};

// Named collection of weight-layer and 1x1-projection parameters. Sites are
// materialized on first use from a sub-seed derived from (seed, site name),
// so lookup order never affects the values.
class WeightStore {
public:
    explicit WeightStore(std::uint64_t seed, WeightInit init = WeightInit::Random)
        : seed_(seed), init_(init) {}

    // Loads a weight container; lookups then fail on any missing site.
    static WeightStore load(const std::string& path);
    void save(const std::string& path) const;

    const WeightLayerParams& layer(const std::string& name, int in_c, int out_c);
    const Proj1x1& proj(const std::string& name, int in_c, int out_c);

    std::uint64_t seed() const { return seed_; }
    bool identity_mode() const { return init_ == WeightInit::Identity; }

    static WeightLayerParams make_identity_layer(int in_c, int out_c);
    static Proj1x1 make_identity_proj(int in_c, int out_c);

private:
    WeightStore() = default;

    std::uint64_t seed_ = 0;
    WeightInit init_ = WeightInit::Random;
    bool loaded_ = false;
    std::map<std::string, WeightLayerParams> layers_;
    std::map<std::string, Proj1x1> projs_;
};

}  // namespace sodkit

#endif
