#pragma once

// Plain-text parameter checkpoints.
//
//   rnnsig-params v1
//   activation tanh
//   hidden 8
//   input 2
//   output 1
//   U 8 8 <64 numbers, row-major>
//   V 8 2 <16 numbers>
//   b 8 1 <8 numbers>
//   psi 1 8 <8 numbers>
//   h0 8 1 <8 numbers>
//
// Numbers are whitespace separated and written with 17 significant digits, so
// a save/load round trip is exact.

#include <filesystem>
#include <iosfwd>

#include "rnnsig/rnn.hpp"

namespace rnnsig {

void write_params(std::ostream& out, const RnnParams& params);
RnnParams read_params(std::istream& in);

void save_params(const std::filesystem::path& file, const RnnParams& params);
RnnParams load_params(const std::filesystem::path& file);

}  // namespace rnnsig
