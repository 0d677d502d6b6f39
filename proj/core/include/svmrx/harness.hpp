#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "svmrx/channel.hpp"
#include "svmrx/rx_conventional.hpp"
#include "svmrx/svm.hpp"

namespace svmrx {

// Full description of a sweep: the (alpha, SNR, receiver) grid plus
// everything needed to reproduce it from the master seed alone.
struct ExperimentConfig {
  std::vector<double> alphas{0.95, 0.97, 0.99};
  std::vector<double> snrs_db{5, 10, 15, 20, 25, 30};
  std::size_t frames_train = 10000;
  std::size_t frames_eval = 200000;
  // Any of: ml, mmse, kalman, svm_ovo, svm_bitbank.
  std::vector<std::string> receivers{"ml", "mmse", "kalman"};
  KernelKind kernel = KernelKind::Rbf;
  double rbf_scale = 0.0;  // 0 -> median-distance heuristic at train time
  double c = 1.0;
  double tol = 1e-3;
  int adc_bits = 32;  // 1 or 32, applied to the SVM receivers only
  std::uint64_t seed = 1;
  double power = 1.0;
  double sigma_h2 = 1.0;
  std::string output = "sweep.csv";
  unsigned workers = 1;

  void validate() const;  // throws InvalidConfig
};

// Flat "key = value" file; '#' starts a comment, lists are comma-separated.
// Unknown keys and malformed values throw InvalidConfig.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

// Per-point stream seed: master seed XOR a splitmix64 hash chained over the
// operating point (bit patterns of alpha and snr_db), the receiver name and
// the stream role ("train" / "eval" / "scale").  Stable across versions --
// changing it silently would change every published number.
std::uint64_t derive_stream_seed(std::uint64_t master, double alpha, double snr_db,
                                 std::string_view receiver, std::string_view role);

// One decision problem drawn from the stream.
struct FrameItem {
  FrameWindow window;
  InfoWord truth;
  CVector h_true;  // kFrameLen gains of the current frame
};

// Frame source with one-frame lookahead: the window for frame i includes
// frame i+1's pilot observations, and the fading process runs continuously
// across frames.  Per frame the draw order is: info word, then per symbol
// noise followed by the fading innovation.
class FrameStream {
 public:
  FrameStream(const FadingParams& p, double power, std::uint64_t seed);
  FrameItem next();

 private:
  ReceivedFrame make_frame();

  FadingParams params_;
  double power_;
  FadingState state_;
  ReceivedFrame pending_;
};

// Materialized stream prefix, for tests and small experiments.
std::vector<FrameItem> generate_stream(const FadingParams& p, double power,
                                       std::size_t count, std::uint64_t seed);

// One measured point.  info_bits = 4 * frames; ber = bit_errors / info_bits.
struct BerRecord {
  double alpha = 0.0;
  double snr_db = 0.0;
  std::string receiver;
  std::string technique = "none";  // none | ovo16 | bitbank4
  std::string kernel = "none";     // none | poly2 | rbf
  int adc_bits = 32;
  std::uint64_t frames = 0;
  std::uint64_t info_bits = 0;
  std::uint64_t bit_errors = 0;
  double ber = 0.0;
  std::uint64_t seed = 0;

  // Binomial standard error sqrt(ber * (1 - ber) / info_bits).
  double std_error() const;
};

// Anything that turns a frame window into an information-word decision.
class FrameDecoder {
 public:
  virtual ~FrameDecoder() = default;
  virtual InfoWord decode(const FrameWindow& w) = 0;
};

// SVM receiver behind the FrameDecoder interface: feature extraction at the
// model's ADC width, then the pooled evaluator.
class SvmFrameDecoder : public FrameDecoder {
 public:
  explicit SvmFrameDecoder(const ReceiverModel& m);
  InfoWord decode(const FrameWindow& w) override;

 private:
  const ReceiverModel& model_;
  ReceiverEvaluator eval_;
};

// Run `frames` decisions and count information-bit errors.  Only the counts
// are filled in; the caller labels the record with its operating point.
BerRecord evaluate_receiver(FrameDecoder& rx, FrameStream& stream, std::size_t frames);

// Train an SVM receiver (svm_ovo / svm_bitbank) for one operating point,
// using the config's training length, kernel, C/tol, ADC width and the
// seeds derived from (alpha, snr_db, receiver).
ReceiverModel train_svm_point(const ExperimentConfig& cfg, double alpha, double snr_db,
                              const std::string& receiver);

// Exact CSV column set, in order.
std::string csv_header();

// Atomic CSV write: temp file in the same directory, then rename.
void write_csv(const std::vector<BerRecord>& records, const std::string& path);

// Evaluate the whole grid (training SVM points as needed), write the CSV,
// return the records in deterministic grid order (alpha-major, then SNR,
// then receiver).  Any worker count yields identical records and bytes.
std::vector<BerRecord> run_sweep(const ExperimentConfig& cfg);

}  // namespace svmrx
