#pragma once

#include "gmlm/tensor.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace gmlm {

/// "GTEN1" single-tensor binary format:
/// magic "GTEN1\0", u8 order r, r little-endian u64 dims, prod(dims)
/// little-endian f64 values in vec order.
void write_gten(std::ostream& os, const Tensor& t);
Tensor read_gten(std::istream& is);
void write_gten_file(const std::string& path, const Tensor& t);
Tensor read_gten_file(const std::string& path);

/// "GTDS1" stacked-dataset variant: magic "GTDS1\0", little-endian u64 n,
/// u8 order r, r little-endian u64 dims, then n tensors' values contiguously.
void write_gtds(std::ostream& os, const std::vector<Tensor>& ts);
std::vector<Tensor> read_gtds(std::istream& is);
void write_gtds_file(const std::string& path, const std::vector<Tensor>& ts);
std::vector<Tensor> read_gtds_file(const std::string& path);

}  // namespace gmlm
