#pragma once

#include <stdexcept>
#include <string>

namespace rotlab {

enum class ErrorKind {
  InvalidArgument,
  Config,
  SearchExhausted,
  Closing,
  Certification,
  Integrator,
};

// Every library failure carries a kind (mapped to a CLI exit code) and the
// name of the stage that gave up.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string stage, const std::string& what)
      : std::runtime_error(stage.empty() ? what : stage + ": " + what),
        kind_(kind),
        stage_(std::move(stage)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& stage() const noexcept { return stage_; }

 private:
  ErrorKind kind_;
  std::string stage_;
};

inline int exit_code_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::Config:
    case ErrorKind::InvalidArgument:
      return 2;
    case ErrorKind::SearchExhausted:
      return 3;
    case ErrorKind::Closing:
      return 4;
    case ErrorKind::Certification:
      return 5;
    case ErrorKind::Integrator:
      return 1;
  }
  return 1;
}

}  // namespace rotlab
