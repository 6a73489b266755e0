#ifndef CBMF_ERRORS_HPP
#define CBMF_ERRORS_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

namespace cbmf {

/// Base class for every error thrown by this library.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Bad user-supplied parameter (fractions out of range, k > |points|, ...).
class ParameterError : public Error {
public:
  explicit ParameterError(const std::string& what) : Error(what) {}
};

/// Malformed input line; carries the 1-based line number and the offending text.
class ParseError : public Error {
public:
  ParseError(std::size_t line, const std::string& text, const std::string& reason)
      : Error("parse error at line " + std::to_string(line) + ": " + reason +
              " [" + text + "]"),
        line_(line), text_(text) {}
  std::size_t line() const { return line_; }
  const std::string& text() const { return text_; }

private:
  std::size_t line_;
  std::string text_;
};

/// A (user, item) pair seen twice.
class DuplicateRatingError : public Error {
public:
  DuplicateRatingError(std::int64_t user, std::int64_t item)
      : Error("duplicate rating for user " + std::to_string(user) +
              ", item " + std::to_string(item)),
        user_(user), item_(item) {}
  std::int64_t user() const { return user_; }
  std::int64_t item() const { return item_; }

private:
  std::int64_t user_;
  std::int64_t item_;
};

/// Training diverged; carries the epoch at which the objective became non-finite.
class TrainingError : public Error {
public:
  TrainingError(int epoch, const std::string& what)
      : Error(what + " (epoch " + std::to_string(epoch) + ")"), epoch_(epoch) {}
  int epoch() const { return epoch_; }

private:
  int epoch_;
};

/// An incoming rating that cannot be integrated (unknown entity or duplicate).
class RejectionError : public Error {
public:
  explicit RejectionError(const std::string& what) : Error(what) {}
};

/// Snapshot file is damaged (length or checksum mismatch).
class IntegrityError : public Error {
public:
  explicit IntegrityError(const std::string& what) : Error(what) {}
};

/// Snapshot format version is not the one this build understands.
class VersionError : public Error {
public:
  VersionError(const std::string& found, const std::string& expected)
      : Error("snapshot version mismatch: found \"" + found +
              "\", expected \"" + expected + "\"") {}
};

}  // namespace cbmf

#endif  // CBMF_ERRORS_HPP
