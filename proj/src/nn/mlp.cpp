#include "dac/nn/mlp.hpp"

#include <cmath>

namespace dac::nn {

Mlp::Mlp(std::vector<int> layer_sizes, OutputActivation output)
    : sizes_(std::move(layer_sizes)), output_(output) {
  require(sizes_.size() >= 2, "an MLP needs at least an input and an output layer");
  Eigen::Index total = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    require(sizes_[l] > 0 && sizes_[l + 1] > 0, "layer sizes must be positive");
    offsets_.push_back(total);
    total += static_cast<Eigen::Index>(sizes_[l + 1]) * (sizes_[l] + 1);
  }
  params_ = Vec::Zero(total);
}

Mlp Mlp::initialized(std::vector<int> layer_sizes, OutputActivation output, Rng& rng,
                     double final_layer_scale) {
  Mlp net(std::move(layer_sizes), output);
  for (int l = 0; l < net.num_layers(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(net.sizes_[l]));
    const double scale = l + 1 == net.num_layers() ? final_layer_scale : 1.0;
    std::uniform_real_distribution<double> dist(-bound, bound);
    auto w = net.weight(l);
    auto b = net.bias(l);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = scale * dist(rng);
    for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = scale * dist(rng);
  }
  return net;
}

Eigen::Map<const Mat> Mlp::weight(int layer) const {
  return {params_.data() + weight_offset(layer), sizes_[layer + 1], sizes_[layer]};
}
Eigen::Map<const Vec> Mlp::bias(int layer) const {
  return {params_.data() + bias_offset(layer), sizes_[layer + 1]};
}
Eigen::Map<Mat> Mlp::weight(int layer) {
  return {params_.data() + weight_offset(layer), sizes_[layer + 1], sizes_[layer]};
}
Eigen::Map<Vec> Mlp::bias(int layer) { return {params_.data() + bias_offset(layer), sizes_[layer + 1]}; }

Mat Mlp::forward(const Mat& input) const {
  ForwardCache scratch;
  return forward(input, scratch);
}

Mat Mlp::forward(const Mat& input, ForwardCache& cache) const {
  if (input.rows() != input_size()) {
    throw ValidationError("MLP input has " + std::to_string(input.rows()) + " rows, expected " +
                          std::to_string(input_size()));
  }
  cache.layer_inputs.resize(num_layers());
  cache.layer_inputs[0] = input;
  Mat z;
  for (int l = 0; l < num_layers(); ++l) {
    z.noalias() = weight(l) * cache.layer_inputs[l];
    z.colwise() += bias(l);
    if (l + 1 < num_layers()) {
      cache.layer_inputs[l + 1] = z.cwiseMax(0.0);
    }
  }
  if (output_ == OutputActivation::sigmoid) {
    z = (1.0 + (-z.array()).exp()).inverse().matrix();
  }
  cache.output = z;
  cache.recorded = true;
  return z;
}

Mat Mlp::backward(const ForwardCache& cache, const Mat& d_output, Vec* param_grad) const {
  if (!cache.recorded) throw ValidationError("MLP backward called without a recorded forward pass");
  if (d_output.rows() != output_size() || d_output.cols() != cache.output.cols()) {
    throw ValidationError("MLP output adjoint has the wrong shape");
  }
  if (param_grad != nullptr && param_grad->size() != num_params()) {
    throw ValidationError("parameter gradient buffer has the wrong size");
  }
  Mat delta = d_output;
  if (output_ == OutputActivation::sigmoid) {
    delta.array() *= cache.output.array() * (1.0 - cache.output.array());
  }
  for (int l = num_layers() - 1; l >= 0; --l) {
    const Mat& in = cache.layer_inputs[l];
    if (param_grad != nullptr) {
      Eigen::Map<Mat> gw(param_grad->data() + weight_offset(l), sizes_[l + 1], sizes_[l]);
      Eigen::Map<Vec> gb(param_grad->data() + bias_offset(l), sizes_[l + 1]);
      gw.noalias() += delta * in.transpose();
      gb.noalias() += delta.rowwise().sum();
    }
    Mat d_in = weight(l).transpose() * delta;
    if (l > 0) {
      d_in.array() *= (in.array() > 0.0).cast<double>();
    }
    delta = std::move(d_in);
  }
  return delta;
}

}  // namespace dac::nn
