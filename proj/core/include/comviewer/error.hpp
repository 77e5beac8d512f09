#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace comviewer {

/// Error categories shared by the library and the HTTP layer.
enum class ErrorCode {
  bad_request,
  not_found,
  upstream_llm,
  stale_view,
  internal,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string detail = {})
      : std::runtime_error(message), code_(code), detail_(std::move(detail)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

class NotFound : public Error {
 public:
  explicit NotFound(const std::string& what, std::string detail = {})
      : Error(ErrorCode::not_found, what, std::move(detail)) {}
};

class BadRequest : public Error {
 public:
  explicit BadRequest(const std::string& what, std::string detail = {})
      : Error(ErrorCode::bad_request, what, std::move(detail)) {}
};

class StaleView : public Error {
 public:
  explicit StaleView(const std::string& what, std::string detail = {})
      : Error(ErrorCode::stale_view, what, std::move(detail)) {}
};

class UpstreamError : public Error {
 public:
  explicit UpstreamError(const std::string& what, std::string detail = {})
      : Error(ErrorCode::upstream_llm, what, std::move(detail)) {}
};

}  // namespace comviewer
