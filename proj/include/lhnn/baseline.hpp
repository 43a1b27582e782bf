// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "lhnn/checkpoint.hpp"
#include "lhnn/model.hpp"

namespace lhnn {

/// Per-G-cell residual MLP: mlp_depth ReLU layers (identity skips between
/// equal widths) and a sigmoid head. Sees only the G-cell's own features.
/// Uses hidden_dim, mlp_depth, gamma, learning rates, epochs, seed and
/// channel_mode from the shared config.
class MLPModel {
 public:
  explicit MLPModel(const LHNNConfig& config);

  const LHNNConfig& config() const { return config_; }
  ad::ParameterSet& params() { return params_; }
  const ad::ParameterSet& params() const { return params_; }
  Standardizer& standardizer() { return norm_; }
  const Standardizer& standardizer() const { return norm_; }

  /// Standardized G-cell features, with the same channel masking as LHNN.
  Matrix inputs(const LHGraph& graph) const;

  ad::Tensor forward(ad::Tape& tape, const Matrix& cells) const;

  /// Probabilities only; `reg` is left empty.
  Prediction predict(const LHGraph& graph) const;

  Checkpoint to_checkpoint() const;
  static MLPModel from_checkpoint(const Checkpoint& checkpoint);

 private:
  LHNNConfig config_;
  ad::ParameterSet params_;
  Standardizer norm_;
};

/// Trained with the weighted classification loss only.
MLPModel train_mlp(const std::vector<TrainingSample>& samples, const LHNNConfig& config,
                   std::vector<EpochMetrics>* log = nullptr, const EpochCallback& on_epoch = {});

/// "lhnn" or "mlp", read from checkpoint metadata.
std::string checkpoint_model_kind(const Checkpoint& checkpoint);

}  // namespace lhnn
