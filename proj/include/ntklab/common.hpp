#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <cstdlib>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace ntklab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Index = Eigen::Index;

// Error taxonomy; the CLI maps these onto process exit codes.
struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct RankError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DivergenceError : std::runtime_error {
    DivergenceError(const std::string& what, long step)
        : std::runtime_error(what), step(step) {}
    long step;
};

inline int max_threads() {
    if (const char* env = std::getenv("NTKLAB_THREADS")) {
        int cap = std::atoi(env);
        if (cap > 0) return cap;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

// Static partition over [0, n); each worker writes only to its own indices,
// so results do not depend on scheduling.
inline void parallel_for(Index n, const std::function<void(Index)>& body) {
    int workers = max_threads();
    if (workers <= 1 || n < 4) {
        for (Index i = 0; i < n; ++i) body(i);
        return;
    }
    workers = static_cast<int>(std::min<Index>(workers, n));
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (Index i = w; i < n; i += workers) body(i);
        });
    }
    for (auto& t : pool) t.join();
}

// FNV-1a over raw bytes; used to fingerprint parameter vectors so stale
// kernels can be detected.
inline std::uint64_t fnv1a64(const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string fingerprint(const Vec& params) {
    std::uint64_t h = fnv1a64(params.data(), sizeof(double) * static_cast<std::size_t>(params.size()));
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

}  // namespace ntklab
