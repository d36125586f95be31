#ifndef LANGINC_RELU_POTENTIAL_HPP_
#define LANGINC_RELU_POTENTIAL_HPP_

#include <cmath>
#include <cstddef>
#include <fstream>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "langinc/errors.hpp"
#include "langinc/rng.hpp"

namespace langinc {

/// Regression data: `inputs` is rows x cols, row-major.
struct Dataset {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> inputs;
  std::vector<double> targets;

  std::span<const double> row(std::size_t i) const { return {inputs.data() + i * cols, cols}; }
};

/// CSV with a header row; the last column is the target, the others are inputs.
inline Dataset load_csv_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ContractViolation("cannot open dataset " + path);
  std::string line;
  if (!std::getline(in, line)) throw ContractViolation("dataset " + path + " is empty");
  std::size_t header_cols = 1;
  for (char c : line) header_cols += (c == ',');
  if (header_cols < 2) throw ContractViolation("dataset needs at least one input and one target column");

  Dataset data;
  data.cols = header_cols - 1;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> values;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(cell, &used));
      } catch (const std::exception&) {
        throw ContractViolation(path + ":" + std::to_string(lineno) + ": not a number: '" + cell + "'");
      }
    }
    if (values.size() != header_cols) {
      throw ContractViolation(path + ":" + std::to_string(lineno) + ": expected " +
                              std::to_string(header_cols) + " columns");
    }
    data.inputs.insert(data.inputs.end(), values.begin(), values.end() - 1);
    data.targets.push_back(values.back());
    ++data.rows;
  }
  return data;
}

/*
 * Built-in toy regression: inputs uniform on [-2, 2]^d and
 *   y = 3 + 2 sin(x0) + x1 x2 - |x3| + 0.5 x4 + 0.1 noise
 * (only the first min(d, 5) inputs enter). Deterministic in `seed`.
 */
inline Dataset synthetic_regression(std::size_t rows, std::size_t d, std::uint64_t seed) {
  Rng rng(seed);
  Dataset data;
  data.rows = rows;
  data.cols = d;
  data.inputs.resize(rows * d);
  data.targets.resize(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    double* x = data.inputs.data() + i * d;
    for (std::size_t j = 0; j < d; ++j) x[j] = -2.0 + 4.0 * rng.uniform();
    auto at = [&](std::size_t j) { return j < d ? x[j] : 0.0; };
    data.targets[i] = 3.0 + 2.0 * std::sin(at(0)) + at(1) * at(2) - std::abs(at(3)) + 0.5 * at(4) +
                      0.1 * rng.normal();
  }
  return data;
}

/// Rows [begin, end) of a dataset.
inline Dataset slice_rows(const Dataset& data, std::size_t begin, std::size_t end) {
  Dataset out;
  out.cols = data.cols;
  out.rows = end - begin;
  out.inputs.assign(data.inputs.begin() + static_cast<std::ptrdiff_t>(begin * data.cols),
                    data.inputs.begin() + static_cast<std::ptrdiff_t>(end * data.cols));
  out.targets.assign(data.targets.begin() + static_cast<std::ptrdiff_t>(begin),
                     data.targets.begin() + static_cast<std::ptrdiff_t>(end));
  return out;
}

/*
 * Posterior potential of a fully connected ReLU regression network:
 *
 *   f(theta) = (1/m) sum_i (net(x_i; theta) - y_i)^2 + (lambda/2) |theta|^2
 *
 * Parameters are stored layer by layer, each layer as its weight matrix
 * (out x in, row-major) followed by its bias vector. Hidden layers use
 * ReLU, the output layer is linear.
 *
 * Only a selection of the drift is exposed: gradient() runs reverse-mode
 * accumulation with relu_slope_at_zero standing in for the ReLU derivative
 * at exactly zero.
 */
class ReLUNetPotential {
 public:
  ReLUNetPotential(std::vector<std::size_t> widths, Dataset train, double lambda,
                   double relu_slope_at_zero = 0.0)
      : widths_(std::move(widths)), train_(std::move(train)), lambda_(lambda), slope0_(relu_slope_at_zero) {
    if (widths_.size() < 2) throw ContractViolation("network needs at least input and output widths");
    if (widths_.back() != 1) throw ContractViolation("network output must be scalar");
    for (auto w : widths_) {
      if (w == 0) throw ContractViolation("layer widths must be positive");
    }
    if (train_.rows > 0 && train_.cols != widths_.front()) {
      throw ContractViolation("dataset has " + std::to_string(train_.cols) + " inputs, network expects " +
                              std::to_string(widths_.front()));
    }
    if (train_.targets.size() != train_.rows || train_.inputs.size() != train_.rows * train_.cols) {
      throw ContractViolation("dataset arrays do not match its row count");
    }
    if (!(lambda_ >= 0.0)) throw ContractViolation("prior precision lambda must be nonnegative");
    if (!(slope0_ >= 0.0 && slope0_ <= 1.0)) throw ContractViolation("relu_slope_at_zero must lie in [0,1]");
    dimension_ = 0;
    for (std::size_t l = 0; l + 1 < widths_.size(); ++l) dimension_ += widths_[l + 1] * (widths_[l] + 1);
  }

  /// d -> 10 -> 10 -> 10 -> 1.
  static std::vector<std::size_t> three_hidden_layers(std::size_t d, std::size_t hidden = 10) {
    return {d, hidden, hidden, hidden, 1};
  }

  std::size_t dimension() const { return dimension_; }
  const std::vector<std::size_t>& widths() const { return widths_; }
  const Dataset& training_data() const { return train_; }
  double lambda() const { return lambda_; }
  double relu_slope_at_zero() const { return slope0_; }

  double predict(std::span<const double> params, std::span<const double> x) const {
    check_dimension(params);
    std::vector<double> act(x.begin(), x.end());
    std::vector<double> next;
    std::size_t offset = 0;
    for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
      const std::size_t in = widths_[l];
      const std::size_t out = widths_[l + 1];
      const double* w = params.data() + offset;
      const double* b = w + out * in;
      next.assign(out, 0.0);
      for (std::size_t o = 0; o < out; ++o) {
        double z = b[o];
        for (std::size_t k = 0; k < in; ++k) z += w[o * in + k] * act[k];
        next[o] = (l + 2 < widths_.size()) ? std::max(z, 0.0) : z;
      }
      offset += out * (in + 1);
      act.swap(next);
    }
    return act[0];
  }

  /// Mean squared error over `data` (no prior term).
  double mse(std::span<const double> params, const Dataset& data) const {
    if (data.rows == 0) return 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < data.rows; ++i) {
      const double r = predict(params, data.row(i)) - data.targets[i];
      sum += r * r;
    }
    return sum / static_cast<double>(data.rows);
  }

  double operator()(std::span<const double> params) const {
    check_dimension(params);
    double sq = 0.0;
    for (double p : params) sq += p * p;
    return mse(params, train_) + 0.5 * lambda_ * sq;
  }

  std::vector<double> gradient(std::span<const double> params) const {
    check_dimension(params);
    std::vector<double> grad(dimension_, 0.0);
    for (std::size_t i = 0; i < dimension_; ++i) grad[i] = lambda_ * params[i];
    if (train_.rows == 0) return grad;

    const std::size_t layers = widths_.size() - 1;
    std::vector<std::size_t> offsets(layers);
    for (std::size_t l = 0, off = 0; l < layers; ++l) {
      offsets[l] = off;
      off += widths_[l + 1] * (widths_[l] + 1);
    }
    // acts[l] is the input to layer l; pre[l] its pre-activations.
    std::vector<std::vector<double>> acts(layers + 1), pre(layers);
    std::vector<double> delta, delta_prev;
    const double scale = 2.0 / static_cast<double>(train_.rows);

    for (std::size_t r = 0; r < train_.rows; ++r) {
      auto x = train_.row(r);
      acts[0].assign(x.begin(), x.end());
      for (std::size_t l = 0; l < layers; ++l) {
        const std::size_t in = widths_[l];
        const std::size_t out = widths_[l + 1];
        const double* w = params.data() + offsets[l];
        const double* b = w + out * in;
        pre[l].assign(out, 0.0);
        acts[l + 1].assign(out, 0.0);
        for (std::size_t o = 0; o < out; ++o) {
          double z = b[o];
          for (std::size_t k = 0; k < in; ++k) z += w[o * in + k] * acts[l][k];
          pre[l][o] = z;
          acts[l + 1][o] = (l + 1 < layers) ? std::max(z, 0.0) : z;
        }
      }
      delta.assign(1, scale * (acts[layers][0] - train_.targets[r]));
      for (std::size_t l = layers; l-- > 0;) {
        const std::size_t in = widths_[l];
        const std::size_t out = widths_[l + 1];
        const double* w = params.data() + offsets[l];
        double* gw = grad.data() + offsets[l];
        double* gb = gw + out * in;
        for (std::size_t o = 0; o < out; ++o) {
          gb[o] += delta[o];
          for (std::size_t k = 0; k < in; ++k) gw[o * in + k] += delta[o] * acts[l][k];
        }
        if (l == 0) break;
        delta_prev.assign(in, 0.0);
        for (std::size_t k = 0; k < in; ++k) {
          const double z = pre[l - 1][k];
          const double dact = z > 0.0 ? 1.0 : (z < 0.0 ? 0.0 : slope0_);
          if (dact == 0.0) continue;
          double s = 0.0;
          for (std::size_t o = 0; o < out; ++o) s += w[o * in + k] * delta[o];
          delta_prev[k] = s * dact;
        }
        delta.swap(delta_prev);
      }
    }
    return grad;
  }

  /// He-style initialization: weights N(0, 2/fan_in), biases zero.
  std::vector<double> initial_parameters(Rng& rng) const {
    std::vector<double> params(dimension_, 0.0);
    std::size_t offset = 0;
    for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
      const std::size_t in = widths_[l];
      const std::size_t out = widths_[l + 1];
      const double sd = std::sqrt(2.0 / static_cast<double>(in));
      for (std::size_t k = 0; k < out * in; ++k) params[offset + k] = sd * rng.normal();
      offset += out * (in + 1);
    }
    return params;
  }

 private:
  void check_dimension(std::span<const double> params) const {
    if (params.size() != dimension_) {
      throw ContractViolation("parameter vector has dimension " + std::to_string(params.size()) +
                              ", network expects " + std::to_string(dimension_));
    }
  }

  std::vector<std::size_t> widths_;
  Dataset train_;
  double lambda_;
  double slope0_;
  std::size_t dimension_ = 0;
};

}  // namespace langinc

#endif  // LANGINC_RELU_POTENTIAL_HPP_
