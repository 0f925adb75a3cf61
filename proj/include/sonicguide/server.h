#ifndef SONICGUIDE_SERVER_H_
#define SONICGUIDE_SERVER_H_

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "sonicguide/session.h"

namespace sonicguide {

inline constexpr std::string_view kDefaultAddress = "127.0.0.1:7853";

struct Address {
  std::string host;
  int port = 0;
};

// "host:port"; throws ValidationError.
Address parse_address(std::string_view text);

// SONIC_GUIDE_ADDR when set, otherwise kDefaultAddress.
std::string default_address();

struct ServerConfig {
  Address address{"127.0.0.1", 7853};  // port 0 picks a free port
  SessionConfig session;               // template for every connection
  std::optional<std::filesystem::path> log_dir;  // one JSON-lines file per session
  std::size_t audio_queue_blocks = 64;  // audio beyond this is dropped, control never
  std::size_t max_line_bytes = 1 << 16;
  bool handle_signals = false;  // stop on SIGINT / SIGTERM
};

// Local guidance server speaking the JSON-lines protocol. One session per
// connection; the first client message must be hello.
class Server {
 public:
  explicit Server(ServerConfig cfg);  // binds immediately; throws IoError
  ~Server();

  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  int port() const;

  // Accepts connections until stop(). Joins all connection threads on exit.
  void run();

  // Thread-safe; closes the listener and every open connection.
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace sonicguide

#endif  // SONICGUIDE_SERVER_H_
