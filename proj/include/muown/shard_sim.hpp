#pragma once

#include "muown/optimizers.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace muown {

// Round-robin assignment of layers to virtual ranks: layer i -> rank i mod R.
struct ShardPlan {
  std::size_t num_ranks = 1;
  std::vector<std::size_t> assignment; // layer index -> rank

  std::size_t num_layers() const { return assignment.size(); }
  std::vector<std::size_t> loads() const;
  std::vector<std::size_t> owned(std::size_t rank) const;
};

// Throws InvalidArgument if either count is zero.
ShardPlan make_plan(std::size_t num_layers, std::size_t num_ranks);

// Virtual ranks. Each rank keeps full optimizer state (g, R, moments) only for
// the layers it owns and a replica of every effective weight W. A step runs
// each rank's owned layers on its own thread, then all-gathers the updated W
// matrices into every replica. Only W crosses ranks.
class ShardedOptimizer {
public:
  ShardedOptimizer(std::vector<Layer> layers, ShardPlan plan);

  // Returns the bytes all-gathered by this step (8 m n per layer).
  // Failures from every rank are collected into one StepError; on failure no
  // state is modified.
  std::uint64_t step(std::span<const Matrix> grads, const HyperParams &hp);

  const ShardPlan &plan() const { return plan_; }
  std::size_t num_layers() const { return plan_.num_layers(); }
  // Weight replica held by `rank`.
  const std::vector<Matrix> &replica(std::size_t rank) const { return replicas_.at(rank); }
  // Owned layers reassembled in declaration order.
  std::vector<Layer> layers() const;
  std::uint64_t total_traffic() const { return traffic_; }

private:
  struct Slot {
    std::size_t index; // global layer index
    Layer layer;
  };

  ShardPlan plan_;
  std::vector<std::vector<Slot>> owned_;     // per rank
  std::vector<std::vector<Matrix>> replicas_; // per rank, one W per layer
  std::uint64_t traffic_ = 0;
};

struct ShardedResult {
  std::vector<Layer> layers;
  std::uint64_t traffic = 0; // bytes all-gathered
};

// One sharded step; equivalent to step_all(layers, grads, hp).
ShardedResult run_sharded(std::vector<Layer> layers, std::span<const Matrix> grads,
                          const HyperParams &hp, const ShardPlan &plan);

std::uint64_t weight_bytes(const Matrix &w);

} // namespace muown
