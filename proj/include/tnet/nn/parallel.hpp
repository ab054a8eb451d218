#pragma once

#include <Eigen/Core>

#include <functional>

namespace tnet::nn {

// Static-partition helper for the hot tensor loops. Every output element is
// written by exactly one chunk and accumulation order within an element
// never depends on the partition, so results are bitwise identical for any
// worker count (including 1).
void parallel_for(Eigen::Index n, Eigen::Index grain,
                  const std::function<void(Eigen::Index, Eigen::Index)>& fn);

int worker_count();

} // namespace tnet::nn
