#include "kanto/labeld/http_server.hpp"

#include <sys/socket.h>

#include <chrono>
#include <ctime>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "kanto/error.hpp"

namespace kanto::labeld {

using ordered_json = nlohmann::ordered_json;

namespace {

constexpr const char* kPlaceholderPage = R"(<!doctype html>
<html><head><meta charset="utf-8"><title>kanto labeld</title></head>
<body><h1>kanto labeld</h1>
<p>No UI bundle is installed. The review API is available under <code>/api/</code>.</p>
</body></html>
)";

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::not_found: return 404;
    case ErrorCode::validation:
    case ErrorCode::parse:
    case ErrorCode::parameter:
    case ErrorCode::range: return 400;
    case ErrorCode::conflict:
    case ErrorCode::state: return 409;
    default: return 500;
  }
}

void send_json(httplib::Response& res, const ordered_json& j, int status = 200) {
  res.status = status;
  res.set_content(j.dump(), "application/json; charset=utf-8");
}

void send_error(httplib::Response& res, int status, const std::string& code, const std::string& message) {
  ordered_json j;
  j["error"] = {{"code", code}, {"message", message}};
  send_json(res, j, status);
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::size_t query_size(const httplib::Request& req, const char* key, std::size_t fallback) {
  if (!req.has_param(key)) return fallback;
  const std::string v = req.get_param_value(key);
  std::size_t used = 0;
  long long n = 0;
  try {
    n = std::stoll(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size() || v.empty()) throw Error(ErrorCode::validation, std::string(key) + " must be an integer");
  if (n < 0) throw Error(ErrorCode::validation, std::string(key) + " must not be negative");
  return static_cast<std::size_t>(n);
}

int parse_label(const std::string& s) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::validation, "cluster label must be an integer");
}

}  // namespace

struct HttpServer::Impl {
  LabelService& service;
  ServerOptions options;
  httplib::Server server;
  std::thread thread;

  Impl(LabelService& s, ServerOptions o) : service(s), options(std::move(o)) {}

  void routes() {
    server.set_socket_options([](socket_t sock) {
      int yes = 1;
      setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
    });
    server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
      try {
        std::rethrow_exception(ep);
      } catch (const Error& e) {
        send_error(res, http_status(e.code()), to_string(e.code()), e.what());
      } catch (const std::exception& e) {
        send_error(res, 500, "internal", e.what());
      } catch (...) {
        send_error(res, 500, "internal", "unknown error");
      }
    });
    server.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
      if (!res.body.empty()) return;
      if (res.status == 404)
        send_error(res, 404, "not_found", "no route for " + req.method + " " + req.path);
      else
        send_error(res, res.status, "http", httplib::status_message(res.status));
    });

    server.Get("/api/health", [this](const httplib::Request&, httplib::Response& res) {
      ordered_json j;
      j["version"] = kServiceVersion;
      j["revision"] = service.revision();
      send_json(res, j);
    });

    server.Get("/api/individuals", [this](const httplib::Request&, httplib::Response& res) {
      ordered_json out = ordered_json::array();
      for (const auto& s : service.individuals())
        out.push_back({{"id", s.id}, {"song_count", s.song_count}, {"cluster_count", s.cluster_count},
                       {"noise_count", s.noise_count}});
      send_json(res, out);
    });

    server.Get(R"(/api/individuals/([^/]+)/clusters)", [this](const httplib::Request& req, httplib::Response& res) {
      ordered_json out = ordered_json::array();
      for (const auto& c : service.clusters(req.matches[1]))
        out.push_back({{"label", c.label}, {"size", c.size}, {"exemplar_song_ids", c.exemplar_song_ids}});
      send_json(res, out);
    });

    server.Get(R"(/api/clusters/([^/]+)/([^/]+)/items)", [this](const httplib::Request& req, httplib::Response& res) {
      const int label = parse_label(req.matches[2]);
      const auto page = service.items(req.matches[1], label, query_size(req, "page", 1),
                                      query_size(req, "page_size", 50));
      ordered_json items = ordered_json::array();
      for (const auto& it : page.items)
        items.push_back({{"song_id", it.song_id}, {"unit_count", it.unit_count},
                         {"label_source", to_string(it.label_source)}});
      ordered_json out;
      out["items"] = std::move(items);
      out["page"] = page.page;
      out["page_size"] = page.page_size;
      out["total"] = page.total;
      out["total_pages"] = page.total_pages;
      send_json(res, out);
    });

    server.Get(R"(/api/spectrogram/(.+)\.png)", [this](const httplib::Request& req, httplib::Response& res) {
      const auto png = service.spectrogram_png(req.matches[1]);
      res.set_content(std::string(png.begin(), png.end()), "image/png");
    });

    server.Post("/api/edits", [this](const httplib::Request& req, httplib::Response& res) {
      LabelEdit e = edit_from_json(req.body);
      if (e.timestamp.empty()) e.timestamp = utc_now();
      const std::size_t index = service.apply(e);
      ordered_json out;
      out["applied"] = true;
      out["journal_index"] = index;
      send_json(res, out);
    });

    server.Post("/api/export", [this](const httplib::Request&, httplib::Response& res) {
      ordered_json out;
      out["snapshot_version"] = service.export_reviewed();
      send_json(res, out);
    });

    if (!options.ui_dir.empty() && server.set_mount_point("/", options.ui_dir.string())) return;
    server.Get("/", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(kPlaceholderPage, "text/html; charset=utf-8");
    });
  }
};

HttpServer::HttpServer(LabelService& service, ServerOptions options)
    : impl_(std::make_unique<Impl>(service, std::move(options))) {
  impl_->routes();
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::start() {
  auto& s = impl_->server;
  int port = impl_->options.port;
  if (port == 0) {
    port = s.bind_to_any_port(impl_->options.host);
    if (port < 0) throw Error(ErrorCode::io, "cannot bind " + impl_->options.host);
  } else if (!s.bind_to_port(impl_->options.host, port)) {
    throw Error(ErrorCode::io, "cannot listen on " + impl_->options.host + ":" + std::to_string(port) +
                                   " (port busy or not permitted)");
  }
  impl_->thread = std::thread([&s] { s.listen_after_bind(); });
  s.wait_until_ready();
  return port;
}

void HttpServer::wait() {
  if (impl_->thread.joinable()) impl_->thread.join();
}

void HttpServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace kanto::labeld
