#pragma once
// Soft-margin kernel SVM trained with sequential minimal optimization.
// Linear and Gaussian RBF kernels, decision threshold at zero, and a compact
// binary model format so trained models can be stored and shipped.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "splitlink/common.hpp"
#include "splitlink/core.hpp"

namespace splitlink {

inline double dot(const double* a, const double* b, size_t dim) {
  double s = 0.0;
  for (size_t i = 0; i < dim; ++i) s += a[i] * b[i];
  return s;
}

inline double squared_distance(const double* a, const double* b, size_t dim) {
  double s = 0.0;
  for (size_t i = 0; i < dim; ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

inline double kernel_eval(Kernel kernel, double gamma, const double* a, const double* b,
                          size_t dim) {
  return kernel == Kernel::Linear ? dot(a, b, dim)
                                  : std::exp(-gamma * squared_distance(a, b, dim));
}

// gamma = 1 / (dim * pooled feature variance), the data-driven default used
// when no explicit value is configured. The denominator is floored so
// constant features cannot divide by zero.
inline double auto_gamma(const std::vector<LabeledExample>& data, size_t dim) {
  double n = 0.0, mean = 0.0, m2 = 0.0;
  for (const auto& ex : data)
    for (double v : ex.features) {
      n += 1.0;
      double delta = v - mean;
      mean += delta / n;
      m2 += delta * (v - mean);
    }
  double variance = n > 0.0 ? m2 / n : 0.0;
  return 1.0 / std::max(static_cast<double>(dim) * variance, 1e-12);
}

// ---------------------------------------------------------------------------
// Trained model. Kept as support vectors plus dual coefficients (alpha * y);
// the linear kernel additionally collapses to a single weight vector so a
// decision costs one dot product.

struct SvmModel {
  Kernel kernel = Kernel::Linear;
  double gamma = 0.0;
  double c = 0.0;
  double bias = 0.0;
  size_t dim = 0;
  std::vector<FeatureVector> support_vectors;
  std::vector<double> dual_coef;

  // Derived, rebuilt by finalize(): not serialized.
  std::vector<double> weights;    // linear only
  std::vector<double> sv_sqnorm;  // rbf only

  void finalize() {
    if (support_vectors.size() != dual_coef.size())
      throw DataError("model has mismatched support vector and coefficient counts");
    for (const auto& sv : support_vectors)
      if (sv.size() != dim) throw DataError("support vector dimension mismatch");
    weights.clear();
    sv_sqnorm.clear();
    if (kernel == Kernel::Linear) {
      weights.assign(dim, 0.0);
      for (size_t i = 0; i < support_vectors.size(); ++i)
        for (size_t j = 0; j < dim; ++j) weights[j] += dual_coef[i] * support_vectors[i][j];
    } else {
      sv_sqnorm.reserve(support_vectors.size());
      for (const auto& sv : support_vectors)
        sv_sqnorm.push_back(dot(sv.data(), sv.data(), dim));
    }
  }

  double decision_value(const double* x) const {
    if (kernel == Kernel::Linear) return dot(weights.data(), x, dim) + bias;
    double s = bias;
    for (size_t i = 0; i < support_vectors.size(); ++i)
      s += dual_coef[i] *
           std::exp(-gamma * squared_distance(support_vectors[i].data(), x, dim));
    return s;
  }

  double decision_value(const FeatureVector& x) const {
    if (x.size() != dim) throw DataError("feature vector dimension mismatch");
    return decision_value(x.data());
  }

  // Match iff the decision value is non-negative.
  bool predict(const FeatureVector& x) const { return decision_value(x) >= 0.0; }

  // -------------------------------------------------------------------------
  // Binary persistence. Big-endian layout:
  //   magic "SLPM", version u16, kernel u8 (0 linear / 1 rbf),
  //   gamma f64, c f64, bias f64, sv_count u32, dim u32,
  //   sv_count*dim f64 support vectors (row-major), sv_count f64 dual coefs.

  static constexpr char kMagic[4] = {'S', 'L', 'P', 'M'};
  static constexpr uint16_t kVersion = 1;

  std::vector<uint8_t> serialize() const {
    std::vector<uint8_t> out;
    out.reserve(64 + support_vectors.size() * (dim + 1) * 8);
    out.insert(out.end(), kMagic, kMagic + 4);
    append_u16(out, kVersion);
    append_u8(out, kernel == Kernel::Linear ? 0 : 1);
    append_f64(out, gamma);
    append_f64(out, c);
    append_f64(out, bias);
    append_u32(out, static_cast<uint32_t>(support_vectors.size()));
    append_u32(out, static_cast<uint32_t>(dim));
    for (const auto& sv : support_vectors)
      for (double v : sv) append_f64(out, v);
    for (double v : dual_coef) append_f64(out, v);
    return out;
  }

  static SvmModel deserialize(const std::vector<uint8_t>& bytes) {
    try {
      ByteReader r(bytes.data(), bytes.size());
      if (std::memcmp(r.bytes(4), kMagic, 4) != 0) throw DataError("bad model magic");
      if (r.u16() != kVersion) throw DataError("unsupported model version");
      uint8_t tag = r.u8();
      if (tag > 1) throw DataError("unknown kernel tag in model");
      SvmModel m;
      m.kernel = tag == 0 ? Kernel::Linear : Kernel::Rbf;
      m.gamma = r.f64();
      m.c = r.f64();
      m.bias = r.f64();
      uint32_t count = r.u32();
      m.dim = r.u32();
      m.support_vectors.resize(count);
      for (auto& sv : m.support_vectors) {
        sv.resize(m.dim);
        for (auto& v : sv) v = r.f64();
      }
      m.dual_coef.resize(count);
      for (auto& v : m.dual_coef) v = r.f64();
      if (!r.done()) throw DataError("trailing bytes after model");
      m.finalize();
      return m;
    } catch (const ByteUnderflow&) {
      throw DataError("truncated model data");
    }
  }

  void save(const std::string& path) const {
    auto bytes = serialize();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write model: " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
  }

  static SvmModel load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open model: " + path);
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                               std::istreambuf_iterator<char>());
    return deserialize(bytes);
  }
};

// ---------------------------------------------------------------------------
// Training.

struct SvmParams {
  Kernel kernel = Kernel::Linear;
  double c = 100.0;
  double gamma = 0.0;  // 0 = auto
  double tolerance = 1e-3;
  double alpha_eps = 1e-6;  // minimum meaningful alpha step
  int max_passes = 10;      // cap on full examine-all sweeps
  uint64_t seed = 1;
};

struct SvmTrainResult {
  SvmModel model;
  std::vector<double> alpha;  // per training example, aligned with the input
  double bias = 0.0;
};

namespace detail {

// Platt-style SMO working set. Kernel values are computed on demand: feature
// vectors here are short (one entry per mapping pair), so a kernel eval is
// cheaper than maintaining a cache.
class SmoSolver {
 public:
  SmoSolver(const std::vector<LabeledExample>& data, const SvmParams& params)
      : params_(params), n_(data.size()), rng_(derive_seed(params.seed, "smo")) {
    if (n_ < 2) throw DataError("svm training needs at least two examples");
    dim_ = data[0].features.size();
    if (dim_ == 0) throw DataError("svm training features are empty");
    x_.resize(n_ * dim_);
    y_.resize(n_);
    size_t pos = 0, neg = 0;
    for (size_t i = 0; i < n_; ++i) {
      if (data[i].features.size() != dim_)
        throw DataError("svm training features have inconsistent dimensions");
      std::copy(data[i].features.begin(), data[i].features.end(), x_.begin() + i * dim_);
      y_[i] = data[i].label ? 1.0 : -1.0;
      (data[i].label ? pos : neg) += 1;
    }
    if (pos == 0 || neg == 0) throw DataError("svm training needs both classes present");
    gamma_ = params.gamma > 0.0 ? params.gamma : auto_gamma(data, dim_);
    alpha_.assign(n_, 0.0);
    errors_.resize(n_);
  }

  SvmTrainResult solve() {
    refresh_errors();
    bool examine_all = true;
    int all_sweeps = 0;
    // Alternate full sweeps with free-point sweeps until a full sweep makes
    // no progress. The caps bound runtime on pathological data.
    for (int sweep = 0; sweep < 10000; ++sweep) {
      size_t changed = 0;
      if (examine_all) {
        refresh_errors();  // rebound the incremental error drift
        ++all_sweeps;
        for (size_t i = 0; i < n_; ++i) changed += examine(i);
        if (changed == 0) break;
        examine_all = false;
      } else {
        for (size_t i = 0; i < n_; ++i)
          if (is_free(alpha_[i])) changed += examine(i);
        if (changed == 0) {
          if (all_sweeps >= params_.max_passes) break;
          examine_all = true;
        }
      }
    }
    return extract();
  }

  double gamma() const { return gamma_; }

 private:
  const double* row(size_t i) const { return x_.data() + i * dim_; }

  double kern(size_t i, size_t j) const {
    return kernel_eval(params_.kernel, gamma_, row(i), row(j), dim_);
  }

  bool is_free(double a) const { return a > 0.0 && a < params_.c; }

  // f(x_k) - y_k under the current alphas and bias, from scratch.
  double error_of(size_t k) const {
    double f = bias_;
    for (size_t i = 0; i < n_; ++i)
      if (alpha_[i] > 0.0) f += alpha_[i] * y_[i] * kern(i, k);
    return f - y_[k];
  }

  void refresh_errors() {
    for (size_t k = 0; k < n_; ++k) errors_[k] = error_of(k);
  }

  size_t examine(size_t i2) {
    double y2 = y_[i2], a2 = alpha_[i2], e2 = errors_[i2];
    double r2 = e2 * y2;
    bool violates = (r2 < -params_.tolerance && a2 < params_.c) ||
                    (r2 > params_.tolerance && a2 > 0.0);
    if (!violates) return 0;

    // Second-choice heuristic: the free point with the largest |E1 - E2|.
    size_t best = n_;
    double best_gap = -1.0;
    for (size_t i = 0; i < n_; ++i) {
      if (!is_free(alpha_[i])) continue;
      double gap = std::abs(errors_[i] - e2);
      if (gap > best_gap) {
        best_gap = gap;
        best = i;
      }
    }
    if (best < n_ && take_step(best, i2)) return 1;

    // Fallback scans from a random start: free points first, then everything.
    size_t off = rng_.index(n_);
    for (size_t t = 0; t < n_; ++t) {
      size_t i1 = (off + t) % n_;
      if (is_free(alpha_[i1]) && take_step(i1, i2)) return 1;
    }
    off = rng_.index(n_);
    for (size_t t = 0; t < n_; ++t) {
      size_t i1 = (off + t) % n_;
      if (take_step(i1, i2)) return 1;
    }
    return 0;
  }

  bool take_step(size_t i1, size_t i2) {
    if (i1 == i2) return false;
    double a1o = alpha_[i1], a2o = alpha_[i2];
    double y1 = y_[i1], y2 = y_[i2];
    double e1 = errors_[i1], e2 = errors_[i2];
    double s = y1 * y2;
    double lo, hi;
    if (y1 != y2) {
      lo = std::max(0.0, a2o - a1o);
      hi = std::min(params_.c, params_.c + a2o - a1o);
    } else {
      lo = std::max(0.0, a1o + a2o - params_.c);
      hi = std::min(params_.c, a1o + a2o);
    }
    if (lo >= hi) return false;

    double k11 = kern(i1, i1), k12 = kern(i1, i2), k22 = kern(i2, i2);
    double eta = k11 + k22 - 2.0 * k12;
    double a2;
    if (eta > 0.0) {
      a2 = a2o + y2 * (e1 - e2) / eta;
      a2 = std::clamp(a2, lo, hi);
    } else {
      // eta is ||phi1 - phi2||^2, so <= 0 means coincident points; the dual
      // is then linear in a2 and the optimum sits at a bound.
      double slope = y2 * (e1 - e2);
      if (slope > 0.0)
        a2 = hi;
      else if (slope < 0.0)
        a2 = lo;
      else
        return false;
    }
    if (std::abs(a2 - a2o) < params_.alpha_eps * (a2 + a2o + params_.alpha_eps)) return false;

    double a1 = a1o + s * (a2o - a2);
    if (a1 < 0.0) {
      a2 += s * a1;
      a1 = 0.0;
    } else if (a1 > params_.c) {
      a2 += s * (a1 - params_.c);
      a1 = params_.c;
    }

    double d1 = y1 * (a1 - a1o), d2 = y2 * (a2 - a2o);
    double b1 = bias_ - e1 - d1 * k11 - d2 * k12;
    double b2 = bias_ - e2 - d1 * k12 - d2 * k22;
    double new_bias = is_free(a1) ? b1 : is_free(a2) ? b2 : 0.5 * (b1 + b2);
    double dbias = new_bias - bias_;

    for (size_t k = 0; k < n_; ++k)
      errors_[k] += d1 * kern(i1, k) + d2 * kern(i2, k) + dbias;
    alpha_[i1] = a1;
    alpha_[i2] = a2;
    bias_ = new_bias;
    return true;
  }

  SvmTrainResult extract() const {
    SvmTrainResult result;
    result.alpha = alpha_;
    result.bias = bias_;
    SvmModel& m = result.model;
    m.kernel = params_.kernel;
    m.gamma = gamma_;
    m.c = params_.c;
    m.bias = bias_;
    m.dim = dim_;
    for (size_t i = 0; i < n_; ++i) {
      if (alpha_[i] <= 1e-12) continue;
      m.support_vectors.emplace_back(row(i), row(i) + dim_);
      m.dual_coef.push_back(alpha_[i] * y_[i]);
    }
    m.finalize();
    return result;
  }

  SvmParams params_;
  size_t n_ = 0;
  size_t dim_ = 0;
  double gamma_ = 0.0;
  double bias_ = 0.0;
  std::vector<double> x_;
  std::vector<double> y_;
  std::vector<double> alpha_;
  std::vector<double> errors_;
  Rng rng_;
};

}  // namespace detail

inline SvmTrainResult train_svm_detailed(const std::vector<LabeledExample>& data,
                                         const SvmParams& params) {
  if (params.c <= 0.0) throw ConfigError("svm c must be positive");
  if (params.tolerance <= 0.0) throw ConfigError("svm tolerance must be positive");
  return detail::SmoSolver(data, params).solve();
}

inline SvmModel train_svm(const std::vector<LabeledExample>& data, const SvmParams& params) {
  return train_svm_detailed(data, params).model;
}

// Dual objective W(alpha) = sum(alpha) - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij.
// Shared by tests and diagnostics to compare solver outputs.
inline double dual_objective(const std::vector<LabeledExample>& data,
                             const std::vector<double>& alpha, Kernel kernel, double gamma) {
  size_t n = data.size();
  double w = 0.0;
  for (size_t i = 0; i < n; ++i) {
    if (alpha[i] == 0.0) continue;
    w += alpha[i];
    double yi = data[i].label ? 1.0 : -1.0;
    for (size_t j = 0; j < n; ++j) {
      if (alpha[j] == 0.0) continue;
      double yj = data[j].label ? 1.0 : -1.0;
      w -= 0.5 * alpha[i] * alpha[j] * yi * yj *
           kernel_eval(kernel, gamma, data[i].features.data(), data[j].features.data(),
                       data[i].features.size());
    }
  }
  return w;
}

}  // namespace splitlink
