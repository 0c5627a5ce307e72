#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mgrnet/metrics.hpp"
#include "mgrnet/model.hpp"
#include "mgrnet/patches.hpp"

namespace mgrnet {

struct TrainConfig {
    std::size_t epochs = 500;
    std::size_t batch_size = 64;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::uint64_t rng_seed = 0;
    std::size_t eval_every = 10;
};

// -log(probs[target] + 1e-12); batch losses are averaged by the caller.
template <typename S>
TensorT<S> cross_entropy_loss(const TensorT<S>& probs, std::size_t target) {
    return pick_neg_log(probs, target, S(1e-12));
}

// Adaptive-moment optimizer with bias correction. Slots are keyed by the
// registration order of the parameter list, which must stay stable.
class AdamOptimizer {
  public:
    explicit AdamOptimizer(const std::vector<std::pair<std::string, Tensor*>>& params);

    void step(const std::vector<std::pair<std::string, Tensor*>>& params,
              const std::vector<std::vector<float>>& grads, const TrainConfig& cfg);

    std::size_t step_count() const { return step_count_; }

  private:
    std::vector<std::vector<double>> m_, v_;
    std::size_t step_count_ = 0;
};

struct EvalRecord {
    std::size_t epoch = 0;
    double loss = 0.0;
    double oa = 0.0, aa = 0.0, kappa = 0.0;
};

struct TrainTrace {
    std::vector<double> epoch_loss;   // mean training loss per epoch
    std::vector<EvalRecord> evals;    // test metrics every eval_every epochs
};

// Seeded-shuffle mini-batch training; returns the final-epoch model state in
// place plus the loss/metric trace. Evaluates on `test_set` (when given)
// every eval_every epochs and after the final epoch.
TrainTrace train(MgrnetModel& model, const PatchSet& train_set, const TrainConfig& cfg,
                 const PatchSet* test_set = nullptr);

// Argmax prediction over the test set; parallel over samples.
EvalReport evaluate(const MgrnetModel& model, const PatchSet& test_set);

// Per-sample argmax predictions in set order (used by map rendering).
std::vector<int> predict_all(const MgrnetModel& model, const PatchSet& set);

// Tab-separated "epoch loss OA AA Kappa" lines, 6 decimal places.
std::string format_trace(const TrainTrace& trace);

}  // namespace mgrnet
