#pragma once

#include <stdexcept>
#include <string>

namespace aoisched {

// Invalid user input: config files, traces, flags. Maps to CLI exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A queue whose traffic intensity reaches 1, so its waiting time is undefined.
class StabilityError : public std::runtime_error {
 public:
  StabilityError(std::string resource, double intensity)
      : std::runtime_error(resource + " is unstable (traffic intensity " +
                           std::to_string(intensity) + " >= 1)"),
        resource_(std::move(resource)),
        intensity_(intensity) {}

  const std::string& resource() const noexcept { return resource_; }
  double intensity() const noexcept { return intensity_; }

 private:
  std::string resource_;
  double intensity_;
};

// No schedule satisfies the stability margin for the given arrival rates.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace aoisched
