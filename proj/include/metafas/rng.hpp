#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>

namespace metafas {

// Seeded RNG with explicitly implemented distributions. std:: distributions
// are implementation-defined, so rolling the mapping ourselves keeps every
// sampled value a pure function of the engine state. The engine state
// serializes to a string for checkpointing.
class Rng {
  public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n).
    int uniform_int(int n) { return static_cast<int>(uniform() * n) % n; }

    // Box-Muller; one value per call (the twin is discarded to keep the
    // stream position independent of call parity).
    double normal(double mean = 0.0, double stddev = 1.0) {
        double u1 = uniform();
        double u2 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
        return mean + stddev * z;
    }

    template <typename T>
    void shuffle(std::vector<T>& xs) {
        for (int i = static_cast<int>(xs.size()) - 1; i > 0; --i) {
            int j = uniform_int(i + 1);
            std::swap(xs[i], xs[j]);
        }
    }

    std::string state() const {
        std::ostringstream os;
        os << engine_;
        return os.str();
    }

    void set_state(const std::string& s) {
        std::istringstream is(s);
        is >> engine_;
    }

    // Derives an independent stream, e.g. one per domain. splitmix64 keeps
    // derived seeds decorrelated even for consecutive indices.
    static std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
        std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

  private:
    std::mt19937_64 engine_;
};

}  // namespace metafas
