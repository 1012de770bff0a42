#pragma once

#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "ammi/network.hpp"
#include "ammi/tensor.hpp"

namespace ammi::nn {

// One (name, gradient) pair per parameter tensor updated in a step.
using GradList = std::vector<std::pair<std::string, const Tensor*>>;

// Adam with bias correction. One instance per parameter collection; the
// step counter advances once per step() call. The learning rate is a step
// argument so inner and outer loops can share the implementation.
class AdamOpt {
public:
    AdamOpt() = default;
    AdamOpt(double beta1, double beta2, double eps)
        : beta1_(beta1), beta2_(beta2), eps_(eps) {}

    // Throws std::runtime_error naming the parameter on non-finite gradients.
    void step(ParamStore& store, const GradList& grads, double lr);

    int steps() const { return t_; }

    void save(std::ostream& os) const;
    static AdamOpt load(std::istream& is);

    bool operator==(const AdamOpt& o) const = default;

private:
    double beta1_ = 0.9;
    double beta2_ = 0.999;
    double eps_ = 1e-8;
    int t_ = 0;
    std::map<std::string, std::pair<Tensor, Tensor>> moments_;  // first, second
};

// Scales gradients in place so their joint L2 norm is at most max_norm
// (no-op when max_norm <= 0); returns the pre-clip norm.
double clip_grad_norm(std::vector<Tensor*> grads, double max_norm);

}  // namespace ammi::nn
