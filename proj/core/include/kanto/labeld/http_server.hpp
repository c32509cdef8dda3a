#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "kanto/labeld/label_service.hpp"

namespace kanto::labeld {

struct ServerOptions {
  std::string host = "127.0.0.1";
  int port = 8765;                 // 0 picks a free port
  std::filesystem::path ui_dir;    // static bundle; empty serves a placeholder page
};

/// HTTP front end of a LabelService. JSON errors have the shape
/// {"error": {"code", "message"}}.
class HttpServer {
 public:
  HttpServer(LabelService& service, ServerOptions options);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds and starts serving on a background thread; returns the port.
  /// Throws ErrorCode::io if the port cannot be bound.
  int start();
  /// Blocks until stop() is called from elsewhere.
  void wait();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace kanto::labeld
