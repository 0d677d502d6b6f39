#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "svmrx/errors.hpp"
#include "svmrx/svm.hpp"
#include "svmrx/text.hpp"

namespace svmrx {

// Model file layout (version 1), whitespace-separated, one record per line:
//
//   svmrx-model 1
//   technique ovo16|bitbank4
//   kernel poly2|rbf <scale>
//   adc_bits <n>
//   feature_dim <d>
//   c <C>
//   tol <tol>
//   machines <count>
//   machine <k> pair <a> <b>      (ovo16)   |   machine <k> bit <j>  (bitbank4)
//   converged 0|1
//   bias <b>
//   sv_count <m>
//   sv <weight> <d floats>        (m lines)
//   ...
//   end
//
// All floats use shortest round-trip formatting, so reloading reproduces
// decision values exactly.

namespace {

constexpr const char* kMagic = "svmrx-model";
constexpr int kVersion = 1;

std::string kernel_name(KernelKind k) {
  return k == KernelKind::Poly2 ? "poly2" : "rbf";
}

std::string technique_name(Technique t) {
  return t == Technique::Ovo16 ? "ovo16" : "bitbank4";
}

// Reads one nonempty line and splits it into tokens.
class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  std::vector<std::string> next(const std::string& context) {
    std::string line;
    while (std::getline(in_, line)) {
      std::istringstream ss(line);
      std::vector<std::string> tokens;
      std::string t;
      while (ss >> t) tokens.push_back(t);
      if (!tokens.empty()) return tokens;
    }
    throw IoError("model parse: unexpected end of file while reading " + context);
  }

  // Like next(), but verifies the leading keyword.
  std::vector<std::string> expect(const std::string& keyword, std::size_t ntokens) {
    auto tokens = next(keyword);
    if (tokens[0] != keyword || tokens.size() != ntokens)
      throw IoError("model parse: expected '" + keyword + "' record");
    return tokens;
  }

 private:
  std::istream& in_;
};

}  // namespace

void save_model(const ReceiverModel& m, std::ostream& out) {
  out << kMagic << ' ' << kVersion << '\n';
  out << "technique " << technique_name(m.technique) << '\n';
  out << "kernel " << kernel_name(m.kernel.kind) << ' ' << format_double(m.kernel.scale)
      << '\n';
  out << "adc_bits " << m.adc_bits << '\n';
  out << "feature_dim " << m.feature_dim << '\n';
  out << "c " << format_double(m.c) << '\n';
  out << "tol " << format_double(m.tol) << '\n';
  out << "machines " << m.machines.size() << '\n';
  for (std::size_t k = 0; k < m.machines.size(); ++k) {
    const BinaryModel& mach = m.machines[k];
    if (m.technique == Technique::Ovo16)
      out << "machine " << k << " pair " << m.class_pairs[k].first << ' '
          << m.class_pairs[k].second << '\n';
    else
      out << "machine " << k << " bit " << m.class_pairs[k].first << '\n';
    out << "converged " << (mach.converged ? 1 : 0) << '\n';
    out << "bias " << format_double(mach.bias) << '\n';
    out << "sv_count " << mach.support_vectors.size() << '\n';
    for (std::size_t i = 0; i < mach.support_vectors.size(); ++i) {
      out << "sv " << format_double(mach.weights[i]);
      for (double f : mach.support_vectors[i]) out << ' ' << format_double(f);
      out << '\n';
    }
  }
  out << "end\n";
  if (!out) throw IoError("model write failed");
}

void save_model(const ReceiverModel& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  save_model(m, out);
}

ReceiverModel load_model(std::istream& in) {
  LineReader r(in);

  auto header = r.next("header");
  if (header.size() != 2 || header[0] != kMagic)
    throw IoError("model parse: bad magic");
  if (parse_u64(header[1]) != static_cast<std::uint64_t>(kVersion))
    throw IoError("model parse: unsupported version " + header[1]);

  ReceiverModel m;
  auto tech = r.expect("technique", 2);
  if (tech[1] == "ovo16")
    m.technique = Technique::Ovo16;
  else if (tech[1] == "bitbank4")
    m.technique = Technique::BitBank4;
  else
    throw IoError("model parse: unknown technique " + tech[1]);

  auto kern = r.expect("kernel", 3);
  if (kern[1] == "poly2")
    m.kernel.kind = KernelKind::Poly2;
  else if (kern[1] == "rbf")
    m.kernel.kind = KernelKind::Rbf;
  else
    throw IoError("model parse: unknown kernel " + kern[1]);
  m.kernel.scale = parse_double(kern[2]);

  m.adc_bits = static_cast<int>(parse_u64(r.expect("adc_bits", 2)[1]));
  m.feature_dim = parse_u64(r.expect("feature_dim", 2)[1]);
  m.c = parse_double(r.expect("c", 2)[1]);
  m.tol = parse_double(r.expect("tol", 2)[1]);

  const std::uint64_t count = parse_u64(r.expect("machines", 2)[1]);
  const std::uint64_t expected =
      m.technique == Technique::Ovo16 ? kNumClasses * (kNumClasses - 1) / 2 : kInfoBits;
  if (count != expected)
    throw IoError("model parse: machine count " + std::to_string(count) +
                  " does not match technique");

  for (std::uint64_t k = 0; k < count; ++k) {
    auto mach_hdr = r.next("machine header");
    if (mach_hdr[0] != "machine" || parse_u64(mach_hdr[1]) != k)
      throw IoError("model parse: expected machine " + std::to_string(k));
    if (m.technique == Technique::Ovo16) {
      if (mach_hdr.size() != 5 || mach_hdr[2] != "pair")
        throw IoError("model parse: bad ovo machine header");
      m.class_pairs.emplace_back(static_cast<int>(parse_u64(mach_hdr[3])),
                                 static_cast<int>(parse_u64(mach_hdr[4])));
    } else {
      if (mach_hdr.size() != 4 || mach_hdr[2] != "bit")
        throw IoError("model parse: bad bit-bank machine header");
      m.class_pairs.emplace_back(static_cast<int>(parse_u64(mach_hdr[3])), -1);
    }

    BinaryModel mach;
    mach.kernel = m.kernel;
    mach.converged = parse_u64(r.expect("converged", 2)[1]) != 0;
    mach.bias = parse_double(r.expect("bias", 2)[1]);
    const std::uint64_t svs = parse_u64(r.expect("sv_count", 2)[1]);
    mach.support_vectors.reserve(svs);
    mach.weights.reserve(svs);
    for (std::uint64_t i = 0; i < svs; ++i) {
      auto sv = r.next("support vector");
      if (sv[0] != "sv" || sv.size() != 2 + m.feature_dim)
        throw IoError("model parse: bad sv record");
      mach.weights.push_back(parse_double(sv[1]));
      FeatureVector f(m.feature_dim);
      for (std::size_t d = 0; d < m.feature_dim; ++d) f[d] = parse_double(sv[2 + d]);
      mach.support_vectors.push_back(std::move(f));
    }
    m.machines.push_back(std::move(mach));
  }

  if (r.next("trailer")[0] != "end") throw IoError("model parse: missing end record");
  return m;
}

ReceiverModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model file: " + path);
  return load_model(in);
}

}  // namespace svmrx
