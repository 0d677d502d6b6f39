#include "svmrx/harness.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>

#include "svmrx/errors.hpp"
#include "svmrx/text.hpp"

namespace svmrx {

namespace {

const std::vector<std::string> kKnownReceivers = {"ml", "mmse", "kalman", "svm_ovo",
                                                  "svm_bitbank"};

bool known_receiver(const std::string& name) {
  return std::find(kKnownReceivers.begin(), kKnownReceivers.end(), name) !=
         kKnownReceivers.end();
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream ss(s);
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double config_double(const std::string& key, const std::string& value) {
  try {
    return parse_double(value);
  } catch (const IoError&) {
    throw InvalidConfig("config: key '" + key + "' expects a number, got '" + value + "'");
  }
}

std::uint64_t config_u64(const std::string& key, const std::string& value) {
  try {
    return parse_u64(value);
  } catch (const IoError&) {
    throw InvalidConfig("config: key '" + key + "' expects an unsigned integer, got '" +
                        value + "'");
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  if (alphas.empty()) throw InvalidConfig("config: alphas must be nonempty");
  for (double a : alphas)
    if (!(a >= 0.0 && a <= 1.0))
      throw InvalidConfig("config: alpha " + format_double(a) + " outside [0, 1]");
  if (snrs_db.empty()) throw InvalidConfig("config: snrs_db must be nonempty");
  for (double s : snrs_db)
    if (!std::isfinite(s)) throw InvalidConfig("config: snr_db must be finite");
  if (frames_train == 0) throw InvalidConfig("config: frames_train must be positive");
  if (frames_eval == 0) throw InvalidConfig("config: frames_eval must be positive");
  if (receivers.empty()) throw InvalidConfig("config: receivers must be nonempty");
  for (const auto& r : receivers)
    if (!known_receiver(r)) throw InvalidConfig("config: unknown receiver '" + r + "'");
  if (!(c > 0.0)) throw InvalidConfig("config: c must be positive");
  if (!(tol > 0.0)) throw InvalidConfig("config: tol must be positive");
  if (adc_bits != 1 && adc_bits != 32)
    throw InvalidConfig("config: adc_bits must be 1 or 32");
  if (!(power > 0.0)) throw InvalidConfig("config: power must be positive");
  if (!(sigma_h2 > 0.0)) throw InvalidConfig("config: sigma_h2 must be positive");
  if (!(rbf_scale >= 0.0)) throw InvalidConfig("config: rbf_scale must be >= 0");
  if (output.empty()) throw InvalidConfig("config: output path must be nonempty");
  if (workers == 0) throw InvalidConfig("config: workers must be >= 1");
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw InvalidConfig("config line " + std::to_string(lineno) +
                          ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (value.empty())
      throw InvalidConfig("config: key '" + key + "' has an empty value");

    if (key == "alphas") {
      cfg.alphas.clear();
      for (const auto& t : split_list(value)) cfg.alphas.push_back(config_double(key, t));
    } else if (key == "snrs_db") {
      cfg.snrs_db.clear();
      for (const auto& t : split_list(value))
        cfg.snrs_db.push_back(config_double(key, t));
    } else if (key == "frames_train") {
      cfg.frames_train = config_u64(key, value);
    } else if (key == "frames_eval") {
      cfg.frames_eval = config_u64(key, value);
    } else if (key == "receivers") {
      cfg.receivers = split_list(value);
    } else if (key == "kernel") {
      if (value == "poly2")
        cfg.kernel = KernelKind::Poly2;
      else if (value == "rbf")
        cfg.kernel = KernelKind::Rbf;
      else
        throw InvalidConfig("config: kernel must be poly2 or rbf");
    } else if (key == "rbf_scale") {
      cfg.rbf_scale = value == "auto" ? 0.0 : config_double(key, value);
    } else if (key == "c") {
      cfg.c = config_double(key, value);
    } else if (key == "tol") {
      cfg.tol = config_double(key, value);
    } else if (key == "adc_bits") {
      cfg.adc_bits = static_cast<int>(config_u64(key, value));
    } else if (key == "seed") {
      cfg.seed = config_u64(key, value);
    } else if (key == "power") {
      cfg.power = config_double(key, value);
    } else if (key == "sigma_h2") {
      cfg.sigma_h2 = config_double(key, value);
    } else if (key == "output") {
      cfg.output = value;
    } else if (key == "workers") {
      cfg.workers = static_cast<unsigned>(config_u64(key, value));
    } else {
      throw InvalidConfig("config: unknown key '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

namespace {

std::uint64_t fold_string(std::uint64_t h, std::string_view s) {
  h = mix64(h ^ s.size());
  for (unsigned char c : s) h = mix64(h ^ c);
  return h;
}

}  // namespace

std::uint64_t derive_stream_seed(std::uint64_t master, double alpha, double snr_db,
                                 std::string_view receiver, std::string_view role) {
  std::uint64_t h = 0x9e3779b97f4a7c15ull;
  h = mix64(h ^ std::bit_cast<std::uint64_t>(alpha));
  h = mix64(h ^ std::bit_cast<std::uint64_t>(snr_db));
  h = fold_string(h, receiver);
  h = fold_string(h, role);
  return master ^ h;
}

FrameStream::FrameStream(const FadingParams& p, double power, std::uint64_t seed)
    : params_(p), power_(power), state_(make_fading_state(p, seed)) {
  if (!(power > 0.0)) throw InvalidConfig("frame stream: power must be positive");
  pending_ = make_frame();
}

ReceivedFrame FrameStream::make_frame() {
  const InfoWord word(static_cast<unsigned>(state_.rng.uniform_below(kNumClasses)));
  ReceivedFrame f = transmit(build_frame(word, power_), state_, params_);
  f.truth = word;
  return f;
}

FrameItem FrameStream::next() {
  ReceivedFrame upcoming = make_frame();
  FrameItem item{FrameWindow{pending_.r, pending_.z, upcoming.r}, pending_.truth,
                 pending_.h_true};
  pending_ = std::move(upcoming);
  return item;
}

std::vector<FrameItem> generate_stream(const FadingParams& p, double power,
                                       std::size_t count, std::uint64_t seed) {
  FrameStream s(p, power, seed);
  std::vector<FrameItem> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(s.next());
  return out;
}

double BerRecord::std_error() const {
  if (info_bits == 0) return 0.0;
  return std::sqrt(ber * (1.0 - ber) / static_cast<double>(info_bits));
}

SvmFrameDecoder::SvmFrameDecoder(const ReceiverModel& m) : model_(m), eval_(m) {}

InfoWord SvmFrameDecoder::decode(const FrameWindow& w) {
  return eval_.predict(extract_features(w, model_.adc_bits));
}

BerRecord evaluate_receiver(FrameDecoder& rx, FrameStream& stream, std::size_t frames) {
  std::uint64_t errors = 0;
  for (std::size_t i = 0; i < frames; ++i) {
    const FrameItem item = stream.next();
    const InfoWord decided = rx.decode(item.window);
    errors += static_cast<std::uint64_t>(
        std::popcount(decided.index() ^ item.truth.index()));
  }
  BerRecord rec;
  rec.frames = frames;
  rec.info_bits = static_cast<std::uint64_t>(frames) * kInfoBits;
  rec.bit_errors = errors;
  rec.ber = static_cast<double>(errors) / static_cast<double>(rec.info_bits);
  return rec;
}

namespace {

FadingParams point_params(const ExperimentConfig& cfg, double alpha, double snr_db) {
  FadingParams p;
  p.alpha = alpha;
  p.sigma_h2 = cfg.sigma_h2;
  p.sigma_w2 = snr_to_noise_var(cfg.power, snr_db);
  return p;
}

}  // namespace

ReceiverModel train_svm_point(const ExperimentConfig& cfg, double alpha, double snr_db,
                              const std::string& receiver) {
  if (receiver != "svm_ovo" && receiver != "svm_bitbank")
    throw InvalidConfig("train_svm_point: receiver must be svm_ovo or svm_bitbank");
  const FadingParams p = point_params(cfg, alpha, snr_db);

  FrameStream stream(p, cfg.power,
                     derive_stream_seed(cfg.seed, alpha, snr_db, receiver, "train"));
  TrainingSet set;
  set.features.reserve(cfg.frames_train);
  set.labels.reserve(cfg.frames_train);
  for (std::size_t i = 0; i < cfg.frames_train; ++i) {
    const FrameItem item = stream.next();
    set.features.push_back(extract_features(item.window, cfg.adc_bits));
    set.labels.push_back(static_cast<int>(item.truth.index()));
  }

  KernelSpec kernel{cfg.kernel, 1.0};
  if (cfg.kernel == KernelKind::Rbf) {
    kernel.scale =
        cfg.rbf_scale > 0.0
            ? cfg.rbf_scale
            : auto_scale(set.features,
                         derive_stream_seed(cfg.seed, alpha, snr_db, receiver, "scale"));
  }

  TrainOptions opt;
  opt.c = cfg.c;
  opt.tol = cfg.tol;
  ReceiverModel model = receiver == "svm_ovo" ? train_ovo(set, kernel, opt)
                                              : train_bit_bank(set, kernel, opt);
  model.adc_bits = cfg.adc_bits;
  return model;
}

std::string csv_header() {
  return "alpha,snr_db,receiver,technique,kernel,adc_bits,frames,info_bits,bit_errors,"
         "ber,seed";
}

void write_csv(const std::vector<BerRecord>& records, const std::string& path) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw IoError("cannot open for writing: " + tmp.string());
    out << csv_header() << '\n';
    for (const auto& r : records) {
      out << format_double(r.alpha) << ',' << format_double(r.snr_db) << ','
          << r.receiver << ',' << r.technique << ',' << r.kernel << ',' << r.adc_bits
          << ',' << r.frames << ',' << r.info_bits << ',' << r.bit_errors << ','
          << format_double(r.ber) << ',' << r.seed << '\n';
    }
    if (!out) throw IoError("write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) throw IoError("rename to " + path + " failed: " + ec.message());
}

namespace {

struct SweepTask {
  double alpha;
  double snr_db;
  std::string receiver;
};

BerRecord run_point(const ExperimentConfig& cfg, const SweepTask& task) {
  const FadingParams p = point_params(cfg, task.alpha, task.snr_db);
  const CVector pilots = build_frame(InfoWord(0), cfg.power).pilots;

  std::unique_ptr<FrameDecoder> decoder;
  ReceiverModel model;  // must outlive an SVM decoder

  // Local adapters around the per-frame receivers.
  struct MlDecoder : FrameDecoder {
    MlReceiver rx;
    MlDecoder(const CVector& pil, const FadingParams& pp, double power)
        : rx(pil, pp, power) {}
    InfoWord decode(const FrameWindow& w) override { return rx.decode(w); }
  };
  struct MmseDecoder : FrameDecoder {
    MmseReceiver rx;
    MmseDecoder(const CVector& pil, const FadingParams& pp) : rx(pil, pp) {}
    InfoWord decode(const FrameWindow& w) override { return rx.decode(w); }
  };
  struct KalmanDecoder : FrameDecoder {
    KalmanReceiver rx;
    KalmanDecoder(const CVector& pil, const FadingParams& pp) : rx(pil, pp) {}
    InfoWord decode(const FrameWindow& w) override { return rx.decode(w); }
  };

  BerRecord rec;
  rec.alpha = task.alpha;
  rec.snr_db = task.snr_db;
  rec.receiver = task.receiver;
  rec.seed = cfg.seed;

  if (task.receiver == "ml") {
    decoder = std::make_unique<MlDecoder>(pilots, p, cfg.power);
  } else if (task.receiver == "mmse") {
    decoder = std::make_unique<MmseDecoder>(pilots, p);
  } else if (task.receiver == "kalman") {
    decoder = std::make_unique<KalmanDecoder>(pilots, p);
  } else {
    model = train_svm_point(cfg, task.alpha, task.snr_db, task.receiver);
    decoder = std::make_unique<SvmFrameDecoder>(model);
    rec.technique = model.technique == Technique::Ovo16 ? "ovo16" : "bitbank4";
    rec.kernel = model.kernel.kind == KernelKind::Poly2 ? "poly2" : "rbf";
    rec.adc_bits = model.adc_bits;
  }

  FrameStream stream(
      p, cfg.power,
      derive_stream_seed(cfg.seed, task.alpha, task.snr_db, task.receiver, "eval"));
  const BerRecord counts = evaluate_receiver(*decoder, stream, cfg.frames_eval);
  rec.frames = counts.frames;
  rec.info_bits = counts.info_bits;
  rec.bit_errors = counts.bit_errors;
  rec.ber = counts.ber;
  return rec;
}

}  // namespace

std::vector<BerRecord> run_sweep(const ExperimentConfig& cfg) {
  cfg.validate();

  std::vector<SweepTask> tasks;
  for (double alpha : cfg.alphas)
    for (double snr : cfg.snrs_db)
      for (const auto& rx : cfg.receivers) tasks.push_back({alpha, snr, rx});

  std::vector<BerRecord> records(tasks.size());
  std::atomic<std::size_t> cursor{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (;;) {
      const std::size_t t = cursor.fetch_add(1);
      if (t >= tasks.size()) return;
      try {
        records[t] = run_point(cfg, tasks[t]);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };

  const std::size_t nthreads =
      std::min<std::size_t>(cfg.workers, std::max<std::size_t>(tasks.size(), 1));
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (std::size_t i = 0; i < nthreads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  write_csv(records, cfg.output);
  return records;
}

}  // namespace svmrx
