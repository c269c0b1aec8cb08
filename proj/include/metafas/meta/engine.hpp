#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "metafas/data/types.hpp"
#include "metafas/loss/losses.hpp"
#include "metafas/meta/adam.hpp"
#include "metafas/meta/model.hpp"

namespace metafas::meta {

struct MiningSchedule {
    double stage1_margin = 0.1;
    double stage2_margin = 0.3;
    int switch_iteration = -1;  // -1: iterations / 2
};

struct MetaConfig {
    double inner_lr = 1e-3;  // inner update rate
    AdamConfig outer;
    int iterations = 1500;
    int batch_size = 20;  // per domain
    bool second_order = false;
    bool meta_enabled = true;  // false: plain joint training over the episode's batches
    MiningSchedule schedule;
    int checkpoint_every = 200;
    int threads = 1;

    void validate() const;
    int resolved_switch_iteration() const {
        return schedule.switch_iteration < 0 ? iterations / 2 : schedule.switch_iteration;
    }
    loss::TripletConfig triplet_at(int iteration) const {
        const bool stage2 = iteration >= resolved_switch_iteration();
        return {stage2 ? schedule.stage2_margin : schedule.stage1_margin,
                stage2 ? loss::Mining::batch_hard : loss::Mining::batch_all};
    }
};

struct MetaStepReport {
    std::vector<loss::LossBundle> mtrn;  // one per meta-train domain
    std::vector<loss::LossBundle> mtst;  // one per updated meta learner
    loss::LossBundle mtrn_agg, mtst_agg;  // means over the divisions
    double total = 0.0;
    double grad_norm_f = 0.0, grad_norm_d = 0.0, grad_norm_s = 0.0, grad_norm_m = 0.0;
};

// theta_M - inner_lr * grad_{theta_M}(L_cls + L_trip) on one meta-train
// batch. The original parameters are untouched; theta_F/S/D receive no
// update at all.
net::ParamGroup inner_update(const MetaModel& model, const net::NetworkParams& params,
                             const data::Batch& batch, double inner_lr, const loss::TripletConfig& trip_cfg);

// Classification and triplet losses of the meta-test batch through every
// theta_M_i'; depth and segmentation are evaluated once and repeated in each
// returned bundle.
std::vector<loss::LossBundle> meta_test_losses(const MetaModel& model, const net::NetworkParams& params,
                                               const std::vector<net::ParamGroup>& theta_m_primes,
                                               const data::Batch& meta_test,
                                               const loss::TripletConfig& trip_cfg);

// The meta objective and its gradients for one episode, without touching
// the parameters (the pieces of meta_step up to the optimizer).
MetaStepReport meta_losses_and_grads(const MetaModel& model, const net::NetworkParams& params,
                                     const data::EpisodeSplit& episode, const MetaConfig& cfg,
                                     const loss::LossWeights& weights, const loss::TripletConfig& trip_cfg,
                                     net::NetworkGrads& grads);

// One full meta iteration: meta-train losses and inner updates, meta-test
// losses through each theta_M_i', the overall objective, and one outer
// optimizer step on all four parameter groups.
MetaStepReport meta_step(const MetaModel& model, net::NetworkParams& params, Adam& adam,
                         const data::EpisodeSplit& episode, const MetaConfig& cfg,
                         const loss::LossWeights& weights, const loss::TripletConfig& trip_cfg);

struct TrainConfig {
    MetaConfig meta;
    loss::LossWeights weights;
    std::uint64_t seed = 1;
    std::string out_dir;
    std::string resume;  // checkpoint directory to resume from (optional)
};

struct TrainResult {
    std::string final_checkpoint;
    std::string log_path;
};

// Episode-sampling training loop with the two-stage mining schedule,
// periodic checkpoints, and a line-delimited JSON log. Deterministic given
// (seed, thread count).
TrainResult train(const NetModel& model, const std::vector<data::DomainDataset>& domains,
                  const TrainConfig& cfg);

}  // namespace metafas::meta
