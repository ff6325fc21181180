#pragma once

#include <stdexcept>
#include <string>

namespace hamnn {

// Dimension or shape disagreement between tensors.
class shape_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Config file failed to parse or validate. Carries every violation found.
class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// File I/O and format problems (missing columns, unparsable cells, ...).
class io_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hamnn
