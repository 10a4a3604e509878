#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

namespace erp::testing {

namespace fs = std::filesystem;

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = fs::temp_directory_path() /
                ("erp-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& name) const { return path_ / name; }

private:
    fs::path path_;
};

inline void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

inline std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Ridge coefficients [w; b] from the normal equations of [X | 1], solved by
/// Gaussian elimination with partial pivoting in long double. Written without
/// Eigen so it shares no code with the library solver.
inline std::vector<double> ridge_oracle(const std::vector<std::vector<double>>& x, const std::vector<double>& y,
                                        double beta) {
    const std::size_t n = x.size();
    const std::size_t d = x.empty() ? 0 : x[0].size();
    const std::size_t p = d + 1;
    std::vector<std::vector<long double>> a(p, std::vector<long double>(p + 1, 0.0L));
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<long double> row(p);
        for (std::size_t k = 0; k < d; ++k) row[k] = x[i][k];
        row[d] = 1.0L;
        for (std::size_t r = 0; r < p; ++r) {
            for (std::size_t c = 0; c < p; ++c) a[r][c] += row[r] * row[c];
            a[r][p] += row[r] * y[i];
        }
    }
    for (std::size_t r = 0; r < p; ++r) a[r][r] += beta;
    for (std::size_t col = 0; col < p; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < p; ++r)
            if (std::fabs(a[r][col]) > std::fabs(a[piv][col])) piv = r;
        std::swap(a[col], a[piv]);
        for (std::size_t r = col + 1; r < p; ++r) {
            const long double f = a[r][col] / a[col][col];
            for (std::size_t c = col; c <= p; ++c) a[r][c] -= f * a[col][c];
        }
    }
    std::vector<long double> sol(p);
    for (std::size_t r = p; r-- > 0;) {
        long double s = a[r][p];
        for (std::size_t c = r + 1; c < p; ++c) s -= a[r][c] * sol[c];
        sol[r] = s / a[r][r];
    }
    return std::vector<double>(sol.begin(), sol.end());
}

}  // namespace erp::testing
