#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dipgnn/tensor.hpp"

namespace dipgnn {

struct AdamwConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
  double clip_norm = 0.5;  // <= 0 disables clipping
};

/// Named parameter tensors plus AdamW state. Iteration order is the sorted
/// name order, which keeps updates and checkpoints deterministic.
class ParamStore {
 public:
  Tensor add(const std::string& name, Tensor param);
  Tensor get(const std::string& name) const;
  bool has(const std::string& name) const { return params_.count(name) != 0; }
  std::size_t count() const { return params_.size(); }

  const std::map<std::string, Tensor>& params() const { return params_; }
  std::map<std::string, Tensor>& params_mutable() { return params_; }
  std::int64_t step() const { return step_; }
  void set_step(std::int64_t s) { step_ = s; }

  void zero_grad();

  /// Snapshot / restore raw parameter values (used for best-checkpoint keeping).
  std::map<std::string, std::vector<double>> snapshot_values() const;
  void restore_values(const std::map<std::string, std::vector<double>>& values);

  struct OptState {
    std::vector<double> m;
    std::vector<double> v;
  };
  std::map<std::string, OptState>& opt_state() { return opt_; }
  const std::map<std::string, OptState>& opt_state() const { return opt_; }

 private:
  std::map<std::string, Tensor> params_;
  std::map<std::string, OptState> opt_;
  std::int64_t step_ = 0;
};

/// One AdamW step over every parameter in the store, reading gradients left
/// by backward(). Global-norm clipping is applied first (scales the stored
/// gradients in place), then the Adam update with decoupled weight decay.
/// Returns the pre-clip global gradient norm.
double adamw_step(ParamStore& store, const AdamwConfig& cfg);

struct CheckpointMeta {
  std::uint32_t version = 1;
  std::string config_digest;
  double lambda = 0.0;
  std::int32_t layers = 0;
  std::int32_t hidden_dim = 0;
  std::int32_t feature_dim = 0;
  std::string variant;
};

void save_checkpoint(const std::string& path, const ParamStore& store,
                     const CheckpointMeta& meta);

struct LoadedCheckpoint {
  ParamStore store;
  CheckpointMeta meta;
};

LoadedCheckpoint load_checkpoint(const std::string& path);

}  // namespace dipgnn
