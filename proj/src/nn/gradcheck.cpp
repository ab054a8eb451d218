#include "tnet/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace tnet::nn {

namespace {
constexpr double kNoiseFloor = 1e-8;
} // namespace

GradCheckReport gradient_check(const std::function<Tensor()>& f,
                               const std::vector<std::pair<std::string, Tensor>>& leaves,
                               double eps, int max_coords, unsigned sample_seed) {
    for (auto& [_, t] : leaves) {
        Tensor h = t;
        h.zero_grad();
    }
    Tensor loss = f();
    loss.backward();

    std::vector<Array> analytic;
    analytic.reserve(leaves.size());
    for (auto& [_, t] : leaves) {
        Tensor h = t;
        analytic.push_back(h.grad());
    }

    std::mt19937_64 rng(sample_seed);
    GradCheckReport rep;
    for (size_t li = 0; li < leaves.size(); ++li) {
        Tensor t = leaves[li].second;
        long n = t.size();
        std::vector<long> coords(static_cast<size_t>(n));
        std::iota(coords.begin(), coords.end(), 0L);
        if (max_coords > 0 && n > max_coords) {
            std::shuffle(coords.begin(), coords.end(), rng);
            coords.resize(static_cast<size_t>(max_coords));
        }
        for (long c : coords) {
            double orig = t.value()[c];
            t.value()[c] = orig + eps;
            double up = f().item();
            t.value()[c] = orig - eps;
            double down = f().item();
            t.value()[c] = orig;
            double numeric = (up - down) / (2.0 * eps);
            double a = analytic[li][c];
            ++rep.coords_checked;
            // below ~1e-8 absolute agreement the central difference is
            // dominated by f's double roundoff (~eps_mach*|f|/eps), so the
            // comparison carries no signal about the backward pass
            if (std::abs(a - numeric) <= kNoiseFloor) continue;
            double rel = std::abs(a - numeric) / std::max(1e-8, std::abs(a) + std::abs(numeric));
            if (rel > rep.max_rel_err) {
                rep.max_rel_err = rel;
                rep.worst = leaves[li].first + "[" + std::to_string(c) + "]";
            }
        }
    }
    return rep;
}

} // namespace tnet::nn
