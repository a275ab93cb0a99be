#include "muown/shard_sim.hpp"

#include "muown/error.hpp"

#include <algorithm>
#include <thread>

namespace muown {

std::vector<std::size_t> ShardPlan::loads() const {
  std::vector<std::size_t> out(num_ranks, 0);
  for (std::size_t r : assignment) {
    ++out.at(r);
  }
  return out;
}

std::vector<std::size_t> ShardPlan::owned(std::size_t rank) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    if (assignment[i] == rank) {
      out.push_back(i);
    }
  }
  return out;
}

ShardPlan make_plan(std::size_t num_layers, std::size_t num_ranks) {
  if (num_layers == 0 || num_ranks == 0) {
    throw InvalidArgument("make_plan: layer and rank counts must be >= 1");
  }
  ShardPlan plan{num_ranks, std::vector<std::size_t>(num_layers)};
  for (std::size_t i = 0; i < num_layers; ++i) {
    plan.assignment[i] = i % num_ranks;
  }
  return plan;
}

std::uint64_t weight_bytes(const Matrix &w) {
  return static_cast<std::uint64_t>(w.size()) * sizeof(double);
}

ShardedOptimizer::ShardedOptimizer(std::vector<Layer> layers, ShardPlan plan)
    : plan_(std::move(plan)), owned_(plan_.num_ranks), replicas_(plan_.num_ranks) {
  if (layers.size() != plan_.num_layers()) {
    throw DimensionMismatch("ShardedOptimizer: plan covers " + std::to_string(plan_.num_layers()) +
                            " layers, got " + std::to_string(layers.size()));
  }
  std::vector<Matrix> weights;
  weights.reserve(layers.size());
  for (const Layer &l : layers) {
    weights.push_back(l.weight());
  }
  for (auto &rep : replicas_) {
    rep = weights;
  }
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const std::size_t r = plan_.assignment[i];
    if (r >= plan_.num_ranks) {
      throw InvalidArgument("ShardedOptimizer: layer " + std::to_string(i) +
                            " assigned to missing rank " + std::to_string(r));
    }
    owned_[r].push_back({i, std::move(layers[i])});
  }
}

std::uint64_t ShardedOptimizer::step(std::span<const Matrix> grads, const HyperParams &hp) {
  if (grads.size() != num_layers()) {
    throw DimensionMismatch("ShardedOptimizer::step: " + std::to_string(grads.size()) +
                            " gradients for " + std::to_string(num_layers()) + " layers");
  }
  const std::size_t ranks = plan_.num_ranks;
  std::vector<std::vector<Slot>> next(ranks);
  std::vector<std::vector<StepError::Failure>> failures(ranks);

  // Local phase: each rank touches only its own slots.
  auto work = [&](std::size_t rank) {
    next[rank] = owned_[rank];
    for (Slot &s : next[rank]) {
      try {
        s.layer = step_layer(s.layer, grads[s.index], hp);
      } catch (const Error &e) {
        failures[rank].push_back({s.index, e.what()});
      }
    }
  };
  if (ranks == 1) {
    work(0);
  } else {
    std::vector<std::jthread> threads;
    threads.reserve(ranks);
    for (std::size_t r = 0; r < ranks; ++r) {
      threads.emplace_back(work, r);
    }
  }

  std::vector<StepError::Failure> all;
  for (auto &f : failures) {
    all.insert(all.end(), f.begin(), f.end());
  }
  if (!all.empty()) {
    std::sort(all.begin(), all.end(),
              [](const auto &a, const auto &b) { return a.layer < b.layer; });
    throw StepError(std::move(all));
  }

  // All-gather: every replica receives each owner's W.
  std::uint64_t bytes = 0;
  for (std::size_t r = 0; r < ranks; ++r) {
    for (const Slot &s : next[r]) {
      const Matrix &w = s.layer.weight();
      for (auto &rep : replicas_) {
        rep[s.index] = w;
      }
      bytes += weight_bytes(w);
    }
  }
  owned_ = std::move(next);
  traffic_ += bytes;
  return bytes;
}

std::vector<Layer> ShardedOptimizer::layers() const {
  std::vector<Layer> out(num_layers());
  for (const auto &rank : owned_) {
    for (const Slot &s : rank) {
      out[s.index] = s.layer;
    }
  }
  return out;
}

ShardedResult run_sharded(std::vector<Layer> layers, std::span<const Matrix> grads,
                          const HyperParams &hp, const ShardPlan &plan) {
  ShardedOptimizer opt(std::move(layers), plan);
  const std::uint64_t bytes = opt.step(grads, hp);
  return {opt.layers(), bytes};
}

} // namespace muown
