#include "metafas/meta/adam.hpp"

#include <cmath>

namespace metafas::meta {

void Adam::step(net::NetworkParams& params, const net::NetworkGrads& grads) {
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));

    auto step_group = [&](net::ParamGroup& p, const net::GradBuffer& g, net::GradBuffer& m,
                          net::GradBuffer& v) {
        for (size_t i = 0; i < p.blobs.size(); ++i) {
            auto& pv = p.blobs[i].v;
            const auto& gv = g.g[i];
            auto& mv = m.g[i];
            auto& vv = v.g[i];
            for (size_t j = 0; j < pv.size(); ++j) {
                const double grad = gv[j] + cfg_.weight_decay * pv[j];
                mv[j] = cfg_.beta1 * mv[j] + (1.0 - cfg_.beta1) * grad;
                vv[j] = cfg_.beta2 * vv[j] + (1.0 - cfg_.beta2) * grad * grad;
                const double mhat = mv[j] / bc1;
                const double vhat = vv[j] / bc2;
                pv[j] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
            }
        }
    };
    step_group(params.theta_f, grads.f, m_.f, v_.f);
    step_group(params.theta_d, grads.d, m_.d, v_.d);
    step_group(params.theta_s, grads.s, m_.s, v_.s);
    step_group(params.theta_m, grads.m, m_.m, v_.m);
}

}  // namespace metafas::meta
