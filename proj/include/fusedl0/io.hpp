#pragma once

#include <stdexcept>
#include <string>

#include "fusedl0/model.hpp"

namespace fusedl0 {

// input that cannot be parsed (CLI exit code 2)
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// structurally valid input with mismatched shapes (CLI exit code 3)
struct DimensionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// one value per line; '#' starts a comment, blank lines are skipped
Vector read_vector_csv(const std::string& path);
void write_vector_csv(const std::string& path, const Vector& v);

// comma-separated rows
Matrix read_dense_csv(const std::string& path);

// Matrix Market coordinate real general/symmetric
SpMatrix read_matrix_market(const std::string& path);

// .mtx goes through the Matrix Market reader, anything else through CSV
DesignMatrix read_design(const std::string& path);

// FNV-1a over the raw bytes of A and b, as a hex string
std::string instance_hash(const DesignMatrix& A, const Vector& b);

std::string format_double(double v);  // shortest 17-significant-digit form

}  // namespace fusedl0
