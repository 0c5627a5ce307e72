#include "mgrnet/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "mgrnet/parallel.hpp"
#include "mgrnet/rng.hpp"

namespace mgrnet {

AdamOptimizer::AdamOptimizer(const std::vector<std::pair<std::string, Tensor*>>& params) {
    m_.reserve(params.size());
    v_.reserve(params.size());
    for (const auto& [name, t] : params) {
        m_.emplace_back(t->size(), 0.0);
        v_.emplace_back(t->size(), 0.0);
    }
}

void AdamOptimizer::step(const std::vector<std::pair<std::string, Tensor*>>& params,
                         const std::vector<std::vector<float>>& grads, const TrainConfig& cfg) {
    if (params.size() != m_.size() || grads.size() != m_.size())
        throw_structural("optim", "parameter/gradient list does not match optimizer state");
    ++step_count_;
    const double b1 = cfg.beta1, b2 = cfg.beta2;
    const double corr1 = 1.0 - std::pow(b1, static_cast<double>(step_count_));
    const double corr2 = 1.0 - std::pow(b2, static_cast<double>(step_count_));
    for (std::size_t p = 0; p < params.size(); ++p) {
        Tensor& t = *params[p].second;
        const auto& g = grads[p];
        if (g.size() != t.size())
            throw_structural("optim", "gradient shape mismatch for " + params[p].first);
        auto& m = m_[p];
        auto& v = v_[p];
        for (std::size_t i = 0; i < t.size(); ++i) {
            const double gi = g[i];
            m[i] = b1 * m[i] + (1.0 - b1) * gi;
            v[i] = b2 * v[i] + (1.0 - b2) * gi * gi;
            const double mhat = m[i] / corr1;
            const double vhat = v[i] / corr2;
            t.data[i] = static_cast<float>(t.data[i] -
                                           cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.epsilon));
        }
    }
}

namespace {

double run_batch(MgrnetModel& model, const PatchSet& set, const std::vector<std::size_t>& order,
                 std::size_t begin, std::size_t end, AdamOptimizer& opt, const TrainConfig& cfg) {
    Tape tape;
    model.attach(tape);
    Tensor batch_loss;
    const std::size_t count = end - begin;
    for (std::size_t i = begin; i < end; ++i) {
        const std::size_t idx = order[i];
        Tensor probs = model.forward(set.patch(idx));
        Tensor loss = cross_entropy_loss(probs, static_cast<std::size_t>(set.target(idx)));
        batch_loss = i == begin ? std::move(loss) : add(batch_loss, loss);
    }
    batch_loss = scale(batch_loss, 1.0f / static_cast<float>(count));
    const double value = batch_loss.data[0];
    if (!std::isfinite(value)) {
        model.detach();
        throw_numeric("train", "non-finite training loss");
    }
    tape.backward(batch_loss);

    auto params = model.named_params();
    std::vector<std::vector<float>> grads;
    grads.reserve(params.size());
    for (auto& [name, t] : params) grads.push_back(tape.grad(*t));
    model.detach();
    opt.step(params, grads, cfg);
    return value;
}

}  // namespace

TrainTrace train(MgrnetModel& model, const PatchSet& train_set, const TrainConfig& cfg,
                 const PatchSet* test_set) {
    if (train_set.empty()) throw_usage("train", "training set is empty");
    if (cfg.epochs < 1 || cfg.batch_size < 1) throw_config("train", "epochs and batch size must be >= 1");
    if (!(cfg.learning_rate > 0.0)) throw_config("train", "learning rate must be positive");

    AdamOptimizer opt(model.named_params());
    Rng rng(cfg.rng_seed);
    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    TrainTrace trace;
    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        rng.shuffle(order);
        double loss_sum = 0.0;
        for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
            const std::size_t end = std::min(order.size(), begin + cfg.batch_size);
            loss_sum += run_batch(model, train_set, order, begin, end, opt, cfg) *
                        static_cast<double>(end - begin);
        }
        const double epoch_loss = loss_sum / static_cast<double>(order.size());
        trace.epoch_loss.push_back(epoch_loss);

        if (test_set && !test_set->empty() &&
            (epoch % cfg.eval_every == 0 || epoch == cfg.epochs)) {
            const EvalReport rep = evaluate(model, *test_set);
            trace.evals.push_back({epoch, epoch_loss, rep.oa, rep.aa, rep.kappa});
        }
    }
    return trace;
}

std::vector<int> predict_all(const MgrnetModel& model, const PatchSet& set) {
    std::vector<int> pred(set.size(), -1);
    parallel_chunks(set.size(), [&](std::size_t begin, std::size_t end, std::size_t) {
        for (std::size_t i = begin; i < end; ++i) {
            const Tensor probs = model.forward(set.patch(i));
            pred[i] = static_cast<int>(
                std::max_element(probs.data.begin(), probs.data.end()) - probs.data.begin());
        }
    });
    return pred;
}

EvalReport evaluate(const MgrnetModel& model, const PatchSet& test_set) {
    if (test_set.empty()) throw_usage("eval", "test set is empty");
    const std::vector<int> pred = predict_all(model, test_set);
    return report_from_pairs(test_set.targets(), pred, test_set.num_classes());
}

std::string format_trace(const TrainTrace& trace) {
    std::string out;
    char line[160];
    for (const auto& e : trace.evals) {
        std::snprintf(line, sizeof(line), "%zu\t%.6f\t%.6f\t%.6f\t%.6f\n", e.epoch, e.loss, e.oa,
                      e.aa, e.kappa);
        out += line;
    }
    return out;
}

}  // namespace mgrnet
