#include "cva/rng.hpp"

namespace cva {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    auto splitmix = [](std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    return splitmix(splitmix(seed) ^ (stream * 0xd1342543de82ef95ULL + 1));
}

}  // namespace cva
