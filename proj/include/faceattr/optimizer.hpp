#pragma once

#include <vector>

#include "faceattr/tensor.hpp"

namespace faceattr {

struct SgdHyper {
    double learning_rate = 0.01;
    double momentum = 0.9;
};

/// Velocity buffers, one per parameter tensor; sized on first step.
template <typename T>
struct MomentumState {
    std::vector<BasicTensor<T>> velocity;
};

/// Classical momentum: v <- mu*v - lr*g; p <- p + v.
template <typename T>
void optimizer_step(const std::vector<BasicTensor<T>*>& params, const std::vector<BasicTensor<T>>& grads,
                    MomentumState<T>& state, const SgdHyper& hyper);

} // namespace faceattr
