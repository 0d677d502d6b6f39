#include "svmrx/svm.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "svmrx/errors.hpp"
#include "svmrx/rng.hpp"

namespace svmrx {

namespace {

void append_block(FeatureVector& out, const CVector& block, bool imag) {
  for (const Complex& v : block) out.push_back(imag ? v.imag() : v.real());
}

double sign1(double v) { return v < 0.0 ? -1.0 : 1.0; }

double dot(const FeatureVector& a, const FeatureVector& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double dist2(const FeatureVector& a, const FeatureVector& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

double poly2_of_dot(double d) {
  const double t = 1.0 + d;
  return t * t;
}

double rbf_of_dist2(double d2, double scale) {
  return std::exp(-d2 / (2.0 * scale * scale));
}

void check_kernel(const KernelSpec& k) {
  if (k.kind == KernelKind::Rbf && !(k.scale > 0.0))
    throw InvalidConfig("rbf kernel requires a positive scale");
}

}  // namespace

FeatureVector extract_features(const FrameWindow& w, int adc_bits) {
  if (w.r_cur.size() != kPilotLen || w.r_next.size() != kPilotLen ||
      w.z.size() != kDataLen)
    throw DimensionMismatch("extract_features: bad window block sizes");
  FeatureVector f;
  f.reserve(kFeatureDim);
  for (bool imag : {false, true}) {
    append_block(f, w.r_next, imag);
    append_block(f, w.r_cur, imag);
    append_block(f, w.z, imag);
  }
  if (adc_bits == 1)
    for (double& v : f) v = sign1(v);
  return f;
}

double kernel_eval(const KernelSpec& k, const FeatureVector& x, const FeatureVector& y) {
  if (x.size() != y.size()) throw DimensionMismatch("kernel_eval: dim mismatch");
  check_kernel(k);
  switch (k.kind) {
    case KernelKind::Poly2:
      return poly2_of_dot(dot(x, y));
    case KernelKind::Rbf:
      return rbf_of_dist2(dist2(x, y), k.scale);
  }
  return 0.0;  // unreachable
}

double auto_scale(const std::vector<FeatureVector>& samples, std::uint64_t seed) {
  constexpr double kFloor = 1e-12;
  constexpr std::size_t kSubsample = 1000;
  if (samples.empty()) throw InvalidConfig("auto_scale: no samples");

  // Seeded partial Fisher-Yates pick of at most kSubsample points.
  std::vector<std::size_t> idx(samples.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  const std::size_t m = std::min(kSubsample, samples.size());
  Rng rng(seed);
  for (std::size_t i = 0; i + 1 < samples.size() && i < m; ++i) {
    const std::size_t j = i + rng.uniform_below(samples.size() - i);
    std::swap(idx[i], idx[j]);
  }

  std::vector<double> dists;
  dists.reserve(m * (m - 1) / 2);
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = a + 1; b < m; ++b)
      dists.push_back(std::sqrt(dist2(samples[idx[a]], samples[idx[b]])));
  if (dists.empty()) return kFloor;

  // Classic median: middle element, or the average of the middle two.
  std::sort(dists.begin(), dists.end());
  const std::size_t n = dists.size();
  const double median =
      n % 2 ? dists[n / 2] : 0.5 * (dists[n / 2 - 1] + dists[n / 2]);
  return std::max(median, kFloor);
}

double decision_value(const BinaryModel& m, const FeatureVector& x) {
  check_kernel(m.kernel);
  double acc = 0.0;
  if (m.kernel.kind == KernelKind::Poly2) {
    for (std::size_t i = 0; i < m.support_vectors.size(); ++i)
      acc += m.weights[i] * poly2_of_dot(dot(m.support_vectors[i], x));
  } else {
    for (std::size_t i = 0; i < m.support_vectors.size(); ++i)
      acc += m.weights[i] *
             rbf_of_dist2(dist2(m.support_vectors[i], x), m.kernel.scale);
  }
  return acc + m.bias;
}

namespace {

// Max-wins vote over the pairwise decision values; shared by predict_ovo and
// the pooled evaluator so both take exactly the same decisions.
InfoWord vote_ovo(const ReceiverModel& m, const std::vector<double>& f) {
  int votes[kNumClasses] = {};
  double won_mag[kNumClasses] = {};  // sum |f| over machines the class won
  for (std::size_t k = 0; k < m.machines.size(); ++k) {
    const auto [a, b] = m.class_pairs[k];
    const int winner = f[k] < 0.0 ? b : a;
    votes[winner] += 1;
    won_mag[winner] += std::abs(f[k]);
  }
  unsigned best = 0;
  for (unsigned c = 1; c < kNumClasses; ++c) {
    if (votes[c] > votes[best] ||
        (votes[c] == votes[best] && won_mag[c] > won_mag[best]))
      best = c;
  }
  return InfoWord(best);
}

InfoWord vote_bits(const std::vector<double>& f) {
  std::array<int, kInfoBits> bits;
  for (std::size_t j = 0; j < kInfoBits; ++j) bits[j] = f[j] > 0.0 ? 1 : 0;
  return InfoWord::from_bits(bits);
}

InfoWord vote(const ReceiverModel& m, const std::vector<double>& f) {
  return m.technique == Technique::Ovo16 ? vote_ovo(m, f) : vote_bits(f);
}

std::vector<double> direct_decision_values(const ReceiverModel& m,
                                           const FeatureVector& x) {
  std::vector<double> f(m.machines.size());
  for (std::size_t k = 0; k < m.machines.size(); ++k)
    f[k] = decision_value(m.machines[k], x);
  return f;
}

}  // namespace

InfoWord predict_ovo(const ReceiverModel& m, const FeatureVector& x) {
  if (m.technique != Technique::Ovo16)
    throw InvalidConfig("predict_ovo: model is not one-vs-one");
  return vote_ovo(m, direct_decision_values(m, x));
}

InfoWord predict_bits(const ReceiverModel& m, const FeatureVector& x) {
  if (m.technique != Technique::BitBank4)
    throw InvalidConfig("predict_bits: model is not a bit bank");
  return vote_bits(direct_decision_values(m, x));
}

ReceiverEvaluator::ReceiverEvaluator(const ReceiverModel& m) : model_(m) {
  std::map<FeatureVector, std::size_t> seen;
  idx_.resize(m.machines.size());
  for (std::size_t k = 0; k < m.machines.size(); ++k) {
    idx_[k].reserve(m.machines[k].support_vectors.size());
    for (const auto& sv : m.machines[k].support_vectors) {
      auto [it, inserted] = seen.try_emplace(sv, pool_.size());
      if (inserted) pool_.push_back(sv);
      idx_[k].push_back(it->second);
    }
  }
}

std::vector<double> ReceiverEvaluator::decision_values(const FeatureVector& x) const {
  // One kernel evaluation per distinct support vector; per-machine sums then
  // run in the original support-vector order, reproducing decision_value()
  // bit for bit.
  std::vector<double> k_pool(pool_.size());
  if (model_.kernel.kind == KernelKind::Poly2) {
    for (std::size_t j = 0; j < pool_.size(); ++j)
      k_pool[j] = poly2_of_dot(dot(pool_[j], x));
  } else {
    for (std::size_t j = 0; j < pool_.size(); ++j)
      k_pool[j] = rbf_of_dist2(dist2(pool_[j], x), model_.kernel.scale);
  }
  std::vector<double> f(model_.machines.size());
  for (std::size_t k = 0; k < model_.machines.size(); ++k) {
    const auto& mach = model_.machines[k];
    double acc = 0.0;
    for (std::size_t i = 0; i < mach.weights.size(); ++i)
      acc += mach.weights[i] * k_pool[idx_[k][i]];
    f[k] = acc + mach.bias;
  }
  return f;
}

InfoWord ReceiverEvaluator::predict(const FeatureVector& x) const {
  return vote(model_, decision_values(x));
}

namespace {

ReceiverModel make_receiver_model(Technique tech, const TrainingSet& d,
                                  const KernelSpec& kernel, const TrainOptions& opt) {
  if (d.features.size() != d.labels.size())
    throw DimensionMismatch("training set: feature/label count mismatch");
  if (d.features.empty()) throw InvalidConfig("training set is empty");
  check_kernel(kernel);

  ReceiverModel m;
  m.technique = tech;
  m.kernel = kernel;
  m.feature_dim = d.features.front().size();
  m.c = opt.c;
  m.tol = opt.tol;
  return m;
}

}  // namespace

ReceiverModel train_ovo(const TrainingSet& d, const KernelSpec& kernel,
                        const TrainOptions& opt) {
  ReceiverModel m = make_receiver_model(Technique::Ovo16, d, kernel, opt);

  std::size_t count[kNumClasses] = {};
  for (int lbl : d.labels) {
    if (lbl < 0 || lbl >= static_cast<int>(kNumClasses))
      throw InvalidConfig("train_ovo: label outside 0..15");
    count[lbl] += 1;
  }
  for (unsigned c = 0; c < kNumClasses; ++c)
    if (count[c] < 2)
      throw MissingClass("train_ovo: class " + std::to_string(c) +
                         " has fewer than 2 examples");

  for (unsigned a = 0; a < kNumClasses; ++a) {
    for (unsigned b = a + 1; b < kNumClasses; ++b) {
      std::vector<FeatureVector> x;
      std::vector<int> y;
      x.reserve(count[a] + count[b]);
      y.reserve(count[a] + count[b]);
      for (std::size_t i = 0; i < d.labels.size(); ++i) {
        if (d.labels[i] == static_cast<int>(a)) {
          x.push_back(d.features[i]);
          y.push_back(+1);
        } else if (d.labels[i] == static_cast<int>(b)) {
          x.push_back(d.features[i]);
          y.push_back(-1);
        }
      }
      m.machines.push_back(train_binary(x, y, kernel, opt));
      m.class_pairs.emplace_back(static_cast<int>(a), static_cast<int>(b));
    }
  }
  return m;
}

ReceiverModel train_bit_bank(const TrainingSet& d, const KernelSpec& kernel,
                             const TrainOptions& opt) {
  ReceiverModel m = make_receiver_model(Technique::BitBank4, d, kernel, opt);

  for (std::size_t j = 0; j < kInfoBits; ++j) {
    std::vector<int> y;
    y.reserve(d.labels.size());
    std::size_t ones = 0;
    for (int lbl : d.labels) {
      if (lbl < 0 || lbl >= static_cast<int>(kNumClasses))
        throw InvalidConfig("train_bit_bank: label outside 0..15");
      const int bit = InfoWord(static_cast<unsigned>(lbl)).bit(j);
      ones += static_cast<std::size_t>(bit);
      y.push_back(bit ? +1 : -1);
    }
    if (ones == 0 || ones == d.labels.size())
      throw MissingClass("train_bit_bank: bit " + std::to_string(j) +
                         " takes a single value in the training set");
    m.machines.push_back(train_binary(d.features, y, kernel, opt));
    m.class_pairs.emplace_back(static_cast<int>(j), -1);
  }
  return m;
}

}  // namespace svmrx
