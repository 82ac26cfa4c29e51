// flexkitd: HTTP front end for the flexkit service.
//
// Environment:
//   FLEXKIT_BIND        host:port to listen on (default 127.0.0.1:8080)
//   FLEXKIT_DATA_DIR    store directory (default ./flexkit-data)
//   FLEXKIT_LOG_LEVEL   debug | info | warn | error (default info)
//   FLEXKIT_API_TOKEN   if set, required as "Authorization: Bearer <token>"
//   FLEXKIT_STATIC_DIR  optional directory served under /

#include <httplib.h>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdlib>
#include <iostream>
#include <mutex>

#include "flexkit/error.hpp"
#include "flexkit/service.hpp"
#include "flexkit/storage.hpp"

using namespace flexkit;

namespace {

enum class Level { debug = 0, info = 1, warn = 2, error = 3 };

std::string env_or(const char* name, std::string fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : fallback;
}

Level parse_level(const std::string& text) {
  if (text == "debug") return Level::debug;
  if (text == "warn") return Level::warn;
  if (text == "error") return Level::error;
  return Level::info;
}

std::string_view level_name(Level l) {
  switch (l) {
    case Level::debug: return "debug";
    case Level::info: return "info";
    case Level::warn: return "warn";
    case Level::error: return "error";
  }
  return "info";
}

class Logger {
 public:
  explicit Logger(Level min) : min_(min) {}

  void log(Level level, Json fields) {
    if (level < min_) return;
    const auto now = std::chrono::system_clock::now();
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count();
    Json line;
    line["ts"] = format_rfc3339(secs);
    line["level"] = level_name(level);
    for (auto& [k, v] : fields.items()) line[k] = v;
    std::lock_guard lock(mutex_);
    std::cerr << line.dump() << '\n';
  }

 private:
  Level min_;
  std::mutex mutex_;
};

Request to_request(const httplib::Request& req) {
  Request r;
  r.method = req.method;
  r.path = req.path;
  r.body = req.body;
  for (const auto& [k, v] : req.params) r.query.emplace(k, v);
  for (const auto& [k, v] : req.headers) {
    std::string name = k;
    std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::tolower(c); });
    r.headers.emplace(std::move(name), v);
  }
  return r;
}

}  // namespace

int main() {
  const std::string bind = env_or("FLEXKIT_BIND", "127.0.0.1:8080");
  const std::string data_dir = env_or("FLEXKIT_DATA_DIR", "flexkit-data");
  Logger logger(parse_level(env_or("FLEXKIT_LOG_LEVEL", "info")));

  const auto colon = bind.rfind(':');
  if (colon == std::string::npos) {
    std::cerr << "FLEXKIT_BIND must be host:port\n";
    return 2;
  }
  const std::string host = bind.substr(0, colon);
  int port = 0;
  try {
    port = std::stoi(bind.substr(colon + 1));
  } catch (const std::exception&) {
    std::cerr << "FLEXKIT_BIND must be host:port\n";
    return 2;
  }

  try {
    Store store(data_dir);
    ServiceOptions options;
    if (const auto token = env_or("FLEXKIT_API_TOKEN", ""); !token.empty()) options.api_token = token;
    Service service(store, options);

    httplib::Server server;
    if (const auto dir = env_or("FLEXKIT_STATIC_DIR", ""); !dir.empty()) server.set_mount_point("/", dir);

    auto handler = [&](const httplib::Request& req, httplib::Response& res) {
      const auto start = std::chrono::steady_clock::now();
      const Response out = service.handle(to_request(req));
      res.status = out.status;
      res.set_content(out.body, out.content_type);
      const auto ms =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
      logger.log(out.status >= 500 ? Level::error : out.status >= 400 ? Level::warn : Level::info,
                 {{"method", req.method}, {"path", req.path}, {"status", out.status}, {"ms", ms},
                  {"bytes", out.body.size()}});
    };
    const std::string pattern = R"(/v1(/.*)?)";
    server.Get(pattern, handler);
    server.Post(pattern, handler);
    server.Put(pattern, handler);
    server.Delete(pattern, handler);

    logger.log(Level::info, {{"msg", "listening"}, {"bind", bind}, {"data_dir", data_dir}});
    if (!server.listen(host, port)) {
      logger.log(Level::error, {{"msg", "cannot listen"}, {"bind", bind}});
      return 1;
    }
  } catch (const Error& e) {
    logger.log(Level::error, {{"msg", e.what()}, {"code", to_string(e.code())}});
    return 1;
  }
  return 0;
}
