#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace owc {

/// Invalid or inconsistent run configuration. Maps to CLI exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// File-system or format failure; the message names the offending file.
/// Maps to CLI exit code 3.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A file-backed tracker has no prediction row for some sample ids.
/// Maps to CLI exit code 4.
class MissingPredictionsError : public std::runtime_error {
public:
    explicit MissingPredictionsError(std::vector<int> ids);
    const std::vector<int>& ids() const { return ids_; }

private:
    std::vector<int> ids_;
};

}  // namespace owc
