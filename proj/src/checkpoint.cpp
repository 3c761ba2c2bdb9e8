#include "rnnsig/checkpoint.hpp"

#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <string>

#include "rnnsig/error.hpp"

namespace rnnsig {

namespace {

constexpr const char* kMagic = "rnnsig-params v1";

void write_block(std::ostream& out, const char* name, std::size_t rows, std::size_t cols,
                 std::span<const double> data) {
  out << name << ' ' << rows << ' ' << cols;
  for (std::size_t k = 0; k < data.size(); ++k) out << (k % cols == 0 ? "\n  " : " ") << data[k];
  out << '\n';
}

std::size_t read_size(std::istream& in, const std::string& key) {
  std::string word;
  std::size_t v = 0;
  require(static_cast<bool>(in >> word) && word == key, "checkpoint: expected '" + key + "'");
  require(static_cast<bool>(in >> v), "checkpoint: bad value for '" + key + "'");
  return v;
}

std::vector<double> read_block(std::istream& in, const std::string& key, std::size_t rows, std::size_t cols) {
  std::string word;
  std::size_t r = 0, c = 0;
  require(static_cast<bool>(in >> word) && word == key, "checkpoint: expected block '" + key + "'");
  require(static_cast<bool>(in >> r >> c) && r == rows && c == cols,
          "checkpoint: block '" + key + "' has the wrong shape");
  std::vector<double> data(rows * cols);
  for (double& v : data) require(static_cast<bool>(in >> v), "checkpoint: block '" + key + "' is truncated");
  return data;
}

}  // namespace

void write_params(std::ostream& out, const RnnParams& p) {
  p.validate();
  const auto old = out.precision(17);
  out << kMagic << '\n'
      << "activation " << p.activation.name() << '\n'
      << "hidden " << p.hidden() << '\n'
      << "input " << p.input() << '\n'
      << "output " << p.output() << '\n';
  write_block(out, "U", p.hidden(), p.hidden(), p.U.data());
  write_block(out, "V", p.hidden(), p.input(), p.V.data());
  write_block(out, "b", p.hidden(), 1, p.b);
  write_block(out, "psi", p.output(), p.hidden(), p.psi.data());
  write_block(out, "h0", p.hidden(), 1, p.h0);
  out.precision(old);
}

RnnParams read_params(std::istream& in) {
  std::string line;
  while (std::getline(in, line) && line.find_first_not_of(" \t\r") == std::string::npos) {
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  require(line == kMagic, "checkpoint: missing header '" + std::string(kMagic) + "'");
  std::string word, act;
  require(static_cast<bool>(in >> word >> act) && word == "activation", "checkpoint: expected 'activation'");
  const Activation activation = Activation::parse(act);
  const std::size_t e = read_size(in, "hidden");
  const std::size_t d = read_size(in, "input");
  const std::size_t p = read_size(in, "output");
  require(e > 0 && d > 0 && p > 0, "checkpoint: sizes must be positive");
  RnnParams params{Matrix(e, e, read_block(in, "U", e, e)),
                   Matrix(e, d, read_block(in, "V", e, d)),
                   read_block(in, "b", e, 1),
                   Matrix(p, e, read_block(in, "psi", p, e)),
                   read_block(in, "h0", e, 1),
                   activation};
  params.validate();
  return params;
}

void save_params(const std::filesystem::path& file, const RnnParams& params) {
  std::ofstream out(file);
  require(static_cast<bool>(out), "checkpoint: cannot write " + file.string());
  write_params(out, params);
}

RnnParams load_params(const std::filesystem::path& file) {
  std::ifstream in(file);
  require(static_cast<bool>(in), "checkpoint: cannot read " + file.string());
  return read_params(in);
}

}  // namespace rnnsig
