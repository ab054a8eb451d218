#pragma once

#include "tnet/nn/tensor.hpp"

#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace tnet::nn {

struct GradCheckReport {
    double max_rel_err = 0.0;
    std::string worst; // "param[idx]"
    long coords_checked = 0;

    bool pass(double tol = 1e-4) const { return max_rel_err < tol; }
};

// Central finite differences against reverse-mode gradients. `f` must
// rebuild the graph from the current leaf values on every call. Tensors
// larger than max_coords get a seeded coordinate sample instead of a full
// sweep so whole-model checks stay fast.
GradCheckReport gradient_check(const std::function<Tensor()>& f,
                               const std::vector<std::pair<std::string, Tensor>>& leaves,
                               double eps = 1e-5, int max_coords = 0, unsigned sample_seed = 1234);

} // namespace tnet::nn
