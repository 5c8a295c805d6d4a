#pragma once

#include "dac/common.hpp"

#include <random>
#include <vector>

namespace dac::nn {

using Rng = std::mt19937_64;

enum class OutputActivation { linear, sigmoid };

/// Activations recorded by a forward pass, consumed by Mlp::backward.
struct ForwardCache {
  std::vector<Mat> layer_inputs;  // layer_inputs[0] is the network input
  Mat output;
  bool recorded = false;
};

/// Fully connected network with rectified-linear hidden layers. Samples are
/// stored column-wise. All weights and biases live in one flat vector so that
/// optimizers, target tracking, and checkpoints can treat a network as a
/// single parameter block. Layer l occupies W_l (out x in, column-major)
/// followed by b_l.
class Mlp {
 public:
  Mlp() = default;
  Mlp(std::vector<int> layer_sizes, OutputActivation output);

  /// Uniform fan-in initialization U(-1/sqrt(fan_in), 1/sqrt(fan_in)); the last
  /// layer is additionally multiplied by `final_layer_scale`.
  static Mlp initialized(std::vector<int> layer_sizes, OutputActivation output, Rng& rng,
                         double final_layer_scale = 1.0);

  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }
  int num_layers() const { return static_cast<int>(sizes_.size()) - 1; }
  const std::vector<int>& layer_sizes() const { return sizes_; }
  OutputActivation output_activation() const { return output_; }

  Eigen::Index num_params() const { return params_.size(); }
  Vec& params() { return params_; }
  const Vec& params() const { return params_; }

  Eigen::Map<const Mat> weight(int layer) const;
  Eigen::Map<const Vec> bias(int layer) const;
  Eigen::Map<Mat> weight(int layer);
  Eigen::Map<Vec> bias(int layer);

  Mat forward(const Mat& input) const;
  Mat forward(const Mat& input, ForwardCache& cache) const;

  /// Reverse pass for the loss whose adjoint with respect to the output is
  /// `d_output`. Parameter gradients are accumulated into `param_grad` when it
  /// is non-null. Returns the adjoint with respect to the input.
  Mat backward(const ForwardCache& cache, const Mat& d_output, Vec* param_grad) const;

 private:
  Eigen::Index weight_offset(int layer) const { return offsets_[layer]; }
  Eigen::Index bias_offset(int layer) const {
    return offsets_[layer] + static_cast<Eigen::Index>(sizes_[layer + 1]) * sizes_[layer];
  }

  std::vector<int> sizes_;
  std::vector<Eigen::Index> offsets_;
  OutputActivation output_ = OutputActivation::linear;
  Vec params_;
};

}  // namespace dac::nn
