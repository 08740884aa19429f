#pragma once

#include <cstdint>
#include <random>

#include <boost/random/exponential_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>
#include <boost/random/uniform_01.hpp>

namespace cva {

// splitmix64 finaliser; spreads (seed, stream) pairs over the engine's seed space.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

// Independent generator per (seed, stream). Boost distributions are used because
// their output is specified, so sequences agree across standard libraries.
class PathRng {
public:
    PathRng(std::uint64_t seed, std::uint64_t stream) : engine_(mix_seed(seed, stream)) {}

    double normal() { return normal_(engine_); }
    double uniform() { return boost::random::uniform_01<double>()(engine_); }
    int poisson(double mean) {
        return mean > 0.0 ? boost::random::poisson_distribution<int, double>(mean)(engine_) : 0;
    }
    double exponential(double mean) {
        return mean * boost::random::exponential_distribution<double>(1.0)(engine_);
    }

private:
    std::mt19937_64 engine_;
    boost::random::normal_distribution<double> normal_;
};

}  // namespace cva
