#include "faceattr/optimizer.hpp"

#include <string>

namespace faceattr {

template <typename T>
void optimizer_step(const std::vector<BasicTensor<T>*>& params, const std::vector<BasicTensor<T>>& grads,
                    MomentumState<T>& state, const SgdHyper& hyper) {
    if (!(hyper.learning_rate > 0.0)) {
        throw ArgumentError("optimizer_step: learning rate must be positive, got " +
                            std::to_string(hyper.learning_rate));
    }
    if (!(hyper.momentum >= 0.0 && hyper.momentum < 1.0)) {
        throw ArgumentError("optimizer_step: momentum must be in [0, 1), got " + std::to_string(hyper.momentum));
    }
    if (params.size() != grads.size()) {
        throw ShapeError("optimizer_step: " + std::to_string(params.size()) + " parameters but " +
                         std::to_string(grads.size()) + " gradients");
    }
    if (state.velocity.empty()) {
        for (const auto* p : params) state.velocity.emplace_back(p->shape());
    }
    if (state.velocity.size() != params.size()) {
        throw ShapeError("optimizer_step: optimizer state tracks a different parameter list");
    }
    const T mu = static_cast<T>(hyper.momentum);
    const T lr = static_cast<T>(hyper.learning_rate);
    for (std::size_t i = 0; i < params.size(); ++i) {
        BasicTensor<T>& p = *params[i];
        p.require_same_shape(grads[i], "optimizer_step");
        p.require_same_shape(state.velocity[i], "optimizer_step");
        T* pv = p.data();
        T* v = state.velocity[i].data();
        const T* g = grads[i].data();
        for (std::size_t j = 0; j < p.size(); ++j) {
            v[j] = mu * v[j] - lr * g[j];
            pv[j] += v[j];
        }
    }
}

template void optimizer_step(const std::vector<BasicTensor<float>*>&, const std::vector<BasicTensor<float>>&,
                             MomentumState<float>&, const SgdHyper&);
template void optimizer_step(const std::vector<BasicTensor<double>*>&, const std::vector<BasicTensor<double>>&,
                             MomentumState<double>&, const SgdHyper&);

} // namespace faceattr
