#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "svmrx/channel.hpp"
#include "svmrx/phy.hpp"

namespace svmrx {

enum class KernelKind { Poly2, Rbf };

// Poly2:  k(x, y) = (1 + <x, y>)^2          (scale unused)
// Rbf:    k(x, y) = exp(-||x - y||^2 / (2 * scale^2))
struct KernelSpec {
  KernelKind kind = KernelKind::Rbf;
  double scale = 1.0;
};

using FeatureVector = std::vector<double>;

inline constexpr std::size_t kFeatureDim = 2 * kWindowLen;  // re/im of the window

// Real feature vector for one decision window: with u = [r_next; r_cur; z]
// the features are [Re(u); Im(u)].  adc_bits = 1 replaces every component
// with its sign (+1/-1, sign(0) = +1), modelling a 1-bit ADC front end; any
// other value means full precision.
FeatureVector extract_features(const FrameWindow& w, int adc_bits);

double kernel_eval(const KernelSpec& k, const FeatureVector& x, const FeatureVector& y);

// Median pairwise Euclidean distance over a seeded subsample of at most 1000
// points (all points when n <= 1000); floored at 1e-12 so the RBF kernel
// stays finite on degenerate data.
double auto_scale(const std::vector<FeatureVector>& samples, std::uint64_t seed);

// One trained soft-margin binary machine in dual form.
// weights[i] = alpha_i * y_i with 0 < alpha_i <= C; decision value
// f(x) = sum_i weights[i] * k(sv_i, x) + bias.
struct BinaryModel {
  KernelSpec kernel;
  std::vector<FeatureVector> support_vectors;
  std::vector<double> weights;
  double bias = 0.0;
  bool converged = true;  // KKT tolerance reached within the iteration cap
};

struct TrainOptions {
  double c = 1.0;
  double tol = 1e-3;
  std::size_t max_iter = 0;  // 0 -> automatic cap based on set size
};

// Sequential minimal optimization on the standard dual.  Labels are +/-1;
// both must be present (SingleClassData otherwise).  Fully deterministic:
// the working pair is the maximal-violating pair, index order breaking ties.
BinaryModel train_binary(const std::vector<FeatureVector>& x, const std::vector<int>& y,
                         const KernelSpec& kernel, const TrainOptions& opt);

double decision_value(const BinaryModel& m, const FeatureVector& x);

enum class Technique {
  Ovo16,     // one-vs-one over the 16 frame classes, 120 machines
  BitBank4,  // one machine per information bit, 4 machines
};

struct TrainingSet {
  std::vector<FeatureVector> features;
  std::vector<int> labels;  // class indices 0..15
};

struct ReceiverModel {
  Technique technique = Technique::Ovo16;
  KernelSpec kernel;
  int adc_bits = 32;
  std::size_t feature_dim = kFeatureDim;
  double c = 1.0;
  double tol = 1e-3;
  std::vector<BinaryModel> machines;
  // Ovo16: machines[m] separates class_pairs[m] = (a, b), a < b, with label
  // +1 for a.  BitBank4: machine j predicts information bit j, +1 <-> bit 1.
  std::vector<std::pair<int, int>> class_pairs;
};

// Train all 120 pairwise machines.  Every class must appear at least twice
// in the labels (MissingClass otherwise).
ReceiverModel train_ovo(const TrainingSet& d, const KernelSpec& kernel,
                        const TrainOptions& opt);

// Train the 4 per-bit machines.  Each bit must take both values in the set.
ReceiverModel train_bit_bank(const TrainingSet& d, const KernelSpec& kernel,
                             const TrainOptions& opt);

// Max-wins voting over the 120 machines (f > 0 votes the lower class, f < 0
// the upper, f == 0 the lower).  Vote ties are broken by the larger sum of
// |decision value| over the machines each tied class won, then by the lower
// class index.
InfoWord predict_ovo(const ReceiverModel& m, const FeatureVector& x);

// Per-bit thresholding: bit j = 1 iff machine j's decision value is > 0.
InfoWord predict_bits(const ReceiverModel& m, const FeatureVector& x);

// Batch evaluator that shares kernel work across machines: each distinct
// support vector's dot product / distance to x is computed once.  Per-machine
// sums run in the original support-vector order, so decision values (and
// hence predictions) are bit-identical to predict_ovo / predict_bits.
class ReceiverEvaluator {
 public:
  explicit ReceiverEvaluator(const ReceiverModel& m);
  InfoWord predict(const FeatureVector& x) const;
  std::vector<double> decision_values(const FeatureVector& x) const;

 private:
  const ReceiverModel& model_;
  std::vector<FeatureVector> pool_;            // distinct support vectors
  std::vector<std::vector<std::size_t>> idx_;  // per machine: pool index per SV
};

// Self-describing versioned text format; numbers are written with exact
// round-trip precision, so a reloaded model reproduces decision values
// bit-for-bit.  See README for the schema.
void save_model(const ReceiverModel& m, std::ostream& out);
void save_model(const ReceiverModel& m, const std::string& path);
ReceiverModel load_model(std::istream& in);
ReceiverModel load_model(const std::string& path);

}  // namespace svmrx
