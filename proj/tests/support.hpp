#pragma once

// Shared helpers for the unit and acceptance suites.

#include <dgprm/types.hpp>

#include <unistd.h>

#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

namespace dgprm::test {

/// Unique scratch directory under the system temp root, removed on
/// destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("dgprm-" + tag + "-" + std::to_string(::getpid()) + "-" +
                 std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

/// Uniform random unit vector (independent of the library's generator).
inline EmbeddingVector random_unit_vector(std::mt19937_64& rng, int d) {
    std::normal_distribution<double> normal(0.0, 1.0);
    EmbeddingVector v(static_cast<size_t>(d));
    double norm_sq = 0.0;
    do {
        norm_sq = 0.0;
        for (auto& x : v) {
            x = normal(rng);
            norm_sq += x * x;
        }
    } while (norm_sq == 0.0);
    const double inv = 1.0 / std::sqrt(norm_sq);
    for (auto& x : v) x *= inv;
    return v;
}

} // namespace dgprm::test
