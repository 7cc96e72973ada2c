#include "echobeam/optim.hpp"

#include <cmath>
#include <string>

namespace echobeam {

AdamOptimizer::AdamOptimizer(double learning_rate, double beta1, double beta2,
                             double epsilon)
    : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(epsilon) {
    if (learning_rate <= 0.0) throw ConfigError("adam: learning rate must be positive");
}

void AdamOptimizer::attach(const std::vector<ad::Tensor>& params) {
    m_.clear();
    v_.clear();
    for (const ad::Tensor& p : params) {
        m_.emplace_back(p.numel(), 0.0);
        v_.emplace_back(p.numel(), 0.0);
    }
    step_ = 0;
}

void AdamOptimizer::step(std::vector<ad::Tensor>& params,
                         const std::vector<const ad::Tensor*>& grads) {
    if (params.size() != m_.size() || grads.size() != m_.size())
        throw ShapeError("adam: parameter list does not match attached moments");
    ++step_;
    double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(step_));
    double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(step_));
    for (std::size_t p = 0; p < params.size(); ++p) {
        if (!grads[p]) continue;
        std::vector<double>& pv = params[p].v;
        const std::vector<double>& g = grads[p]->v;
        if (g.size() != pv.size())
            throw ShapeError("adam: gradient shape mismatch for tensor " +
                             std::to_string(p));
        std::vector<double>& m = m_[p];
        std::vector<double>& v = v_[p];
        for (std::size_t n = 0; n < pv.size(); ++n) {
            if (!std::isfinite(g[n]))
                throw NumericError("adam: non-finite gradient at update " +
                                   std::to_string(step_));
            m[n] = beta1_ * m[n] + (1.0 - beta1_) * g[n];
            v[n] = beta2_ * v[n] + (1.0 - beta2_) * g[n] * g[n];
            double m_hat = m[n] / bc1;
            double v_hat = v[n] / bc2;
            pv[n] -= lr_ * m_hat / (std::sqrt(v_hat) + eps_);
        }
    }
}

void AdamOptimizer::restore(std::uint64_t step, std::vector<std::vector<double>> m,
                            std::vector<std::vector<double>> v) {
    step_ = step;
    m_ = std::move(m);
    v_ = std::move(v);
}

MomentumOptimizer::MomentumOptimizer(double learning_rate, double mu, double n_half)
    : lr0_(learning_rate), mu_(mu), n_half_(n_half) {
    if (learning_rate < 0.0) throw ConfigError("momentum: learning rate must be >= 0");
    if (n_half <= 0.0) throw ConfigError("momentum: decay half-life must be positive");
}

void MomentumOptimizer::attach(std::size_t size) {
    accum_.assign(size, 0.0);
    step_ = 0;
}

void MomentumOptimizer::step(std::vector<double>& param, const std::vector<double>& grad) {
    if (param.size() != accum_.size() || grad.size() != accum_.size())
        throw ShapeError("momentum: parameter/gradient size mismatch");
    double eta = rate_at(step_);
    for (std::size_t n = 0; n < param.size(); ++n) {
        if (!std::isfinite(grad[n]))
            throw NumericError("momentum: non-finite gradient at update " +
                               std::to_string(step_ + 1));
        accum_[n] = mu_ * accum_[n] + grad[n];
        param[n] -= eta * accum_[n];
    }
    ++step_;
}

void MomentumOptimizer::restore(std::uint64_t step, std::vector<double> accum) {
    step_ = step;
    accum_ = std::move(accum);
}

}  // namespace echobeam
