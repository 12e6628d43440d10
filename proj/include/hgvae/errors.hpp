#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hgvae {

/// Invalid or inconsistent configuration (CLI exit code 1).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Anything wrong with input data on disk or in memory (CLI exit code 2).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MissingFileError : public DataError {
 public:
  explicit MissingFileError(const std::string& path)
      : DataError("missing file: " + path), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

/// Malformed content at a specific file location.
class ParseError : public DataError {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& what)
      : DataError(file + ":" + std::to_string(line) + ": " + what), file_(file), line_(line) {}
  const std::string& file() const { return file_; }
  std::size_t line() const { return line_; }

 private:
  std::string file_;
  std::size_t line_;
};

/// Declared node count disagrees with the number of feature rows.
class ShapeMismatchError : public ParseError {
 public:
  using ParseError::ParseError;
};

/// Edge endpoint outside its declared node type's id range.
class DanglingEdgeError : public ParseError {
 public:
  using ParseError::ParseError;
};

/// A meta-path that does not fit the graph schema.
class SchemaError : public DataError {
 public:
  using DataError::DataError;
};

/// Training produced a non-finite loss (CLI exit code 3).
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& component, int epoch, const std::string& what)
      : std::runtime_error("epoch " + std::to_string(epoch) + ": " + component + " diverged: " + what),
        component_(component),
        epoch_(epoch) {}
  const std::string& component() const { return component_; }
  int epoch() const { return epoch_; }

 private:
  std::string component_;
  int epoch_;
};

}  // namespace hgvae
