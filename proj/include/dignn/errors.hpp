// Copyright 2026 The dignn Authors. Apache 2.0 License.
// Exception hierarchy shared by every module.

#pragma once

#include <stdexcept>
#include <string>

namespace dignn {

class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define DIGNN_ERROR_CLASS(Name, tag) \
  class Name : public Error {        \
   public:                           \
    explicit Name(const std::string& message) : Error(tag, message) {} \
  };

DIGNN_ERROR_CLASS(ShapeError, "shape")
DIGNN_ERROR_CLASS(ConfigError, "config")
DIGNN_ERROR_CLASS(DataError, "data")
DIGNN_ERROR_CLASS(DomainError, "domain")
DIGNN_ERROR_CLASS(ContractError, "contract")
DIGNN_ERROR_CLASS(TrainingError, "training")
DIGNN_ERROR_CLASS(GenerationError, "generation")
DIGNN_ERROR_CLASS(UsageError, "usage")

#undef DIGNN_ERROR_CLASS

}  // namespace dignn
