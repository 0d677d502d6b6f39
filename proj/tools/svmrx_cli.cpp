// Command line front end: sweep / train / eval / selftest.

#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "svmrx/errors.hpp"
#include "svmrx/harness.hpp"
#include "svmrx/selftest.hpp"
#include "svmrx/text.hpp"

namespace {

using svmrx::BerRecord;
using svmrx::ExperimentConfig;

void print_records(const std::vector<BerRecord>& records) {
  // Console companion to the CSV: BER plus its binomial standard error.
  std::printf("%-6s %-7s %-12s %-9s %-6s %-4s %10s %12s %10s\n", "alpha", "snr_db",
              "receiver", "technique", "kernel", "adc", "frames", "ber", "stderr");
  for (const auto& r : records) {
    std::printf("%-6g %-7g %-12s %-9s %-6s %-4d %10llu %12.6g %10.3g\n", r.alpha,
                r.snr_db, r.receiver.c_str(), r.technique.c_str(), r.kernel.c_str(),
                r.adc_bits, static_cast<unsigned long long>(r.frames), r.ber,
                r.std_error());
  }
}

std::string csv_row(const BerRecord& r) {
  std::string row;
  row += svmrx::format_double(r.alpha);
  row += ',';
  row += svmrx::format_double(r.snr_db);
  row += ',' + r.receiver + ',' + r.technique + ',' + r.kernel + ',';
  row += std::to_string(r.adc_bits) + ',' + std::to_string(r.frames) + ',';
  row += std::to_string(r.info_bits) + ',' + std::to_string(r.bit_errors) + ',';
  row += svmrx::format_double(r.ber) + ',' + std::to_string(r.seed);
  return row;
}

int fail(const std::string& code, const std::string& detail) {
  nlohmann::json j;
  j["error"] = code;
  j["detail"] = detail;
  std::cerr << j.dump() << '\n';
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gauss-Markov flat-fading receiver simulations (ML / LMMSE / Kalman / SVM)"};
  app.require_subcommand(1);

  std::string config_path, model_path, out_path, receiver;
  double alpha = 0.0, snr_db = 0.0;
  std::uint64_t frames_override = 0;
  unsigned workers_override = 0;

  auto* sweep = app.add_subcommand("sweep", "Run the configured BER sweep, write a CSV");
  sweep->add_option("--config", config_path, "Experiment config file")->required();
  sweep->add_option("--output", out_path, "Override the config's CSV output path");
  sweep->add_option("--workers", workers_override, "Override the config's worker count");

  auto* train = app.add_subcommand("train", "Train one SVM operating point, save model");
  train->add_option("--config", config_path, "Experiment config file")->required();
  train->add_option("--alpha", alpha, "Fading coefficient")->required();
  train->add_option("--snr-db", snr_db, "Operating SNR in dB")->required();
  train->add_option("--receiver", receiver, "svm_ovo or svm_bitbank")->required();
  train->add_option("--out", model_path, "Model file to write")->required();

  auto* eval = app.add_subcommand("eval", "Evaluate a saved model, print one CSV row");
  eval->add_option("--config", config_path, "Experiment config file")->required();
  eval->add_option("--model", model_path, "Model file produced by 'train'")->required();
  eval->add_option("--alpha", alpha, "Fading coefficient")->required();
  eval->add_option("--snr-db", snr_db, "Operating SNR in dB")->required();
  eval->add_option("--frames", frames_override, "Override frames_eval");

  auto* selftest =
      app.add_subcommand("selftest", "Run the cross-implementation oracle suite");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sweep->parsed()) {
      ExperimentConfig cfg = svmrx::parse_config_file(config_path);
      if (!out_path.empty()) cfg.output = out_path;
      if (workers_override > 0) cfg.workers = workers_override;
      const auto records = svmrx::run_sweep(cfg);
      print_records(records);
      std::cout << "wrote " << records.size() << " rows to " << cfg.output << '\n';
    } else if (train->parsed()) {
      ExperimentConfig cfg = svmrx::parse_config_file(config_path);
      const auto model = svmrx::train_svm_point(cfg, alpha, snr_db, receiver);
      svmrx::save_model(model, model_path);
      std::cout << "saved " << receiver << " model (" << model.machines.size()
                << " machines) to " << model_path << '\n';
    } else if (eval->parsed()) {
      ExperimentConfig cfg = svmrx::parse_config_file(config_path);
      const auto model = svmrx::load_model(model_path);
      const std::string rx_name =
          model.technique == svmrx::Technique::Ovo16 ? "svm_ovo" : "svm_bitbank";
      const std::size_t frames = frames_override ? frames_override : cfg.frames_eval;

      svmrx::FadingParams p;
      p.alpha = alpha;
      p.sigma_h2 = cfg.sigma_h2;
      p.sigma_w2 = svmrx::snr_to_noise_var(cfg.power, snr_db);
      svmrx::FrameStream stream(
          p, cfg.power,
          svmrx::derive_stream_seed(cfg.seed, alpha, snr_db, rx_name, "eval"));
      svmrx::SvmFrameDecoder decoder(model);
      BerRecord rec = svmrx::evaluate_receiver(decoder, stream, frames);
      rec.alpha = alpha;
      rec.snr_db = snr_db;
      rec.receiver = rx_name;
      rec.technique = model.technique == svmrx::Technique::Ovo16 ? "ovo16" : "bitbank4";
      rec.kernel = model.kernel.kind == svmrx::KernelKind::Poly2 ? "poly2" : "rbf";
      rec.adc_bits = model.adc_bits;
      rec.seed = cfg.seed;
      std::cout << svmrx::csv_header() << '\n' << csv_row(rec) << '\n';
    } else if (selftest->parsed()) {
      if (!svmrx::selftest::run_and_report(std::cout)) return 1;
    }
  } catch (const svmrx::InvalidConfig& e) {
    return fail("InvalidConfig", e.what());
  } catch (const svmrx::IoError& e) {
    return fail("IoError", e.what());
  } catch (const svmrx::NotPositiveDefinite& e) {
    return fail("NotPositiveDefinite", e.what());
  } catch (const svmrx::DimensionMismatch& e) {
    return fail("DimensionMismatch", e.what());
  } catch (const svmrx::SingleClassData& e) {
    return fail("SingleClassData", e.what());
  } catch (const svmrx::MissingClass& e) {
    return fail("MissingClass", e.what());
  } catch (const std::exception& e) {
    return fail("Error", e.what());
  }
  return 0;
}
