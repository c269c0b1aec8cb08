#pragma once

#include <cstdint>

#include "metafas/net/params.hpp"

namespace metafas::meta {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;  // the stated momentum
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 5e-5;  // added to the gradient, applied to all parameters
};

// Adam over the four parameter groups with a shared step counter.
class Adam {
  public:
    Adam(AdamConfig cfg, const net::NetworkParams& params)
        : cfg_(cfg), m_(net::NetworkGrads::zeros_like(params)), v_(net::NetworkGrads::zeros_like(params)) {}

    void step(net::NetworkParams& params, const net::NetworkGrads& grads);

    const AdamConfig& config() const { return cfg_; }
    std::int64_t t() const { return t_; }
    const net::NetworkGrads& moment1() const { return m_; }
    const net::NetworkGrads& moment2() const { return v_; }
    void restore(net::NetworkGrads m, net::NetworkGrads v, std::int64_t t) {
        m_ = std::move(m);
        v_ = std::move(v);
        t_ = t;
    }

  private:
    AdamConfig cfg_;
    net::NetworkGrads m_, v_;
    std::int64_t t_ = 0;
};

}  // namespace metafas::meta
