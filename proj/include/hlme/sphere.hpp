#ifndef HLME_SPHERE_HPP
#define HLME_SPHERE_HPP

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <thread>
#include <vector>

namespace hlme {

/// splitmix64; fixed algorithm so seeded runs are bit-identical across platforms.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    double uniform01() {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    /// Box-Muller; avoids implementation-defined std::normal_distribution.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform01(), u2 = uniform01();
        while (u1 <= 1e-300) u1 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    Eigen::VectorXd unitVector(int n) {
        Eigen::VectorXd x(n);
        double norm2;
        do {
            for (int i = 0; i < n; ++i) x(i) = normal();
            norm2 = x.squaredNorm();
        } while (norm2 < 1e-30);
        return x / std::sqrt(norm2);
    }

private:
    uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

/// Deterministic near-uniform sample of the unit sphere in R^n.
/// n=3 uses the Fibonacci spiral; n=4 maps a Halton sequence through Hopf
/// coordinates; other n fall back to seeded random directions.
inline std::vector<Eigen::VectorXd> sphereGrid(int n, int count) {
    std::vector<Eigen::VectorXd> pts;
    pts.reserve(static_cast<size_t>(count));
    if (n == 1) {
        Eigen::VectorXd p(1);
        p << 1.0;
        pts.push_back(p);
        p << -1.0;
        pts.push_back(p);
        return pts;
    }
    if (n == 2) {
        for (int i = 0; i < count; ++i) {
            const double a = 2.0 * std::numbers::pi * i / count;
            Eigen::VectorXd p(2);
            p << std::cos(a), std::sin(a);
            pts.push_back(p);
        }
        return pts;
    }
    if (n == 3) {
        const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
        for (int i = 0; i < count; ++i) {
            const double z = 1.0 - 2.0 * (i + 0.5) / count;
            const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
            const double a = 2.0 * std::numbers::pi * i / golden;
            Eigen::VectorXd p(3);
            p << r * std::cos(a), r * std::sin(a), z;
            pts.push_back(p);
        }
        return pts;
    }
    if (n == 4) {
        auto halton = [](int idx, int base) {
            double f = 1.0, r = 0.0;
            for (int i = idx; i > 0; i /= base) {
                f /= base;
                r += f * (i % base);
            }
            return r;
        };
        for (int i = 0; i < count; ++i) {
            const double u = halton(i + 1, 2);
            const double v = halton(i + 1, 3);
            const double w = halton(i + 1, 5);
            const double a = 2.0 * std::numbers::pi * v;
            const double b = 2.0 * std::numbers::pi * w;
            const double su = std::sqrt(u), cu = std::sqrt(1.0 - u);
            Eigen::VectorXd p(4);
            p << cu * std::sin(a), cu * std::cos(a), su * std::sin(b), su * std::cos(b);
            pts.push_back(p);
        }
        return pts;
    }
    Rng rng(0x5ee3d5u ^ static_cast<uint64_t>(n));
    for (int i = 0; i < count; ++i) pts.push_back(rng.unitVector(n));
    return pts;
}

/// Runs body(start_index) for start_index in [0, starts) across up to
/// `threads` workers. The per-index results must be independent; callers
/// merge deterministically afterwards.
inline void parallelForStarts(int starts, int threads, const std::function<void(int)>& body) {
    if (threads <= 1 || starts <= 1) {
        for (int s = 0; s < starts; ++s) body(s);
        return;
    }
    const int nthreads = std::min(threads, starts);
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(nthreads));
    for (int t = 0; t < nthreads; ++t) {
        pool.emplace_back([&, t]() {
            for (int s = t; s < starts; s += nthreads) body(s);
        });
    }
    for (std::thread& th : pool) th.join();
}

} // namespace hlme

#endif
