#include "ammi/adam.hpp"

#include <cmath>
#include <stdexcept>

#include "ammi/serialize.hpp"

namespace ammi::nn {

void AdamOpt::step(ParamStore& store, const GradList& grads, double lr) {
    ++t_;
    const double c1 = 1.0 - std::pow(beta1_, t_);
    const double c2 = 1.0 - std::pow(beta2_, t_);
    for (const auto& [name, grad] : grads) {
        Tensor& p = store.at(name);
        if (!p.same_shape(*grad))
            throw std::runtime_error("AdamOpt: gradient shape mismatch for " + name);
        if (!grad->all_finite())
            throw std::runtime_error("AdamOpt: non-finite gradient for " + name);
        auto it = moments_.find(name);
        if (it == moments_.end())
            it = moments_.emplace(name, std::make_pair(Tensor(p.rows, p.cols),
                                                       Tensor(p.rows, p.cols))).first;
        Tensor& m1 = it->second.first;
        Tensor& m2 = it->second.second;
        for (size_t i = 0; i < p.size(); ++i) {
            double gv = grad->v[i];
            m1.v[i] = beta1_ * m1.v[i] + (1.0 - beta1_) * gv;
            m2.v[i] = beta2_ * m2.v[i] + (1.0 - beta2_) * gv * gv;
            p.v[i] -= lr * (m1.v[i] / c1) / (std::sqrt(m2.v[i] / c2) + eps_);
        }
    }
}

void AdamOpt::save(std::ostream& os) const {
    io::write_f64(os, beta1_);
    io::write_f64(os, beta2_);
    io::write_f64(os, eps_);
    io::write_u32(os, static_cast<uint32_t>(t_));
    io::write_u32(os, static_cast<uint32_t>(moments_.size()));
    for (const auto& [name, mm] : moments_) {
        io::write_string(os, name);
        io::write_tensor(os, mm.first);
        io::write_tensor(os, mm.second);
    }
}

AdamOpt AdamOpt::load(std::istream& is) {
    AdamOpt opt;
    opt.beta1_ = io::read_f64(is);
    opt.beta2_ = io::read_f64(is);
    opt.eps_ = io::read_f64(is);
    opt.t_ = static_cast<int>(io::read_u32(is));
    uint32_t n = io::read_u32(is);
    for (uint32_t i = 0; i < n; ++i) {
        std::string name = io::read_string(is);
        Tensor m1 = io::read_tensor(is);
        Tensor m2 = io::read_tensor(is);
        opt.moments_.emplace(name, std::make_pair(std::move(m1), std::move(m2)));
    }
    return opt;
}

double clip_grad_norm(std::vector<Tensor*> grads, double max_norm) {
    double sq = 0.0;
    for (const Tensor* g : grads)
        for (double x : g->v) sq += x * x;
    double norm = std::sqrt(sq);
    if (max_norm > 0.0 && norm > max_norm) {
        double scale = max_norm / norm;
        for (Tensor* g : grads)
            for (double& x : g->v) x *= scale;
    }
    return norm;
}

}  // namespace ammi::nn
