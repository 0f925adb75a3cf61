#include "sonicguide/server.h"

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <deque>
#include <list>
#include <mutex>
#include <thread>
#include <utility>

#include <boost/asio.hpp>

#include "sonicguide/error.h"
#include "sonicguide/protocol.h"

namespace sonicguide {

namespace asio = boost::asio;
using tcp = asio::ip::tcp;

Address parse_address(std::string_view text) {
  const auto colon = text.rfind(':');
  if (colon == std::string_view::npos || colon == 0)
    throw ValidationError("address must be host:port, got '" + std::string(text) + "'");
  Address a{std::string(text.substr(0, colon)), 0};
  const std::string port(text.substr(colon + 1));
  std::size_t used = 0;
  try {
    a.port = std::stoi(port, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (port.empty() || used != port.size() || a.port < 0 || a.port > 65535)
    throw ValidationError("bad port in address '" + std::string(text) + "'");
  return a;
}

std::string default_address() {
  const char* env = std::getenv("SONIC_GUIDE_ADDR");
  return env != nullptr && *env != '\0' ? std::string(env) : std::string(kDefaultAddress);
}

namespace {

// Outgoing lines for one connection. Audio is dropped once `capacity` audio
// lines are waiting; control messages are always queued.
class OutQueue {
 public:
  explicit OutQueue(std::size_t capacity) : capacity_(capacity) {}

  void push(std::string line, bool audio) {
    {
      std::lock_guard lock(mu_);
      if (closed_) return;
      if (audio && audio_waiting_ >= capacity_) return;
      if (audio) ++audio_waiting_;
      lines_.emplace_back(std::move(line), audio);
    }
    cv_.notify_one();
  }

  std::optional<std::string> pop() {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return closed_ || !lines_.empty(); });
    if (lines_.empty()) return std::nullopt;
    auto [line, audio] = std::move(lines_.front());
    lines_.pop_front();
    if (audio) --audio_waiting_;
    return std::move(line);
  }

  // Lines already queued are still delivered.
  void close() {
    {
      std::lock_guard lock(mu_);
      closed_ = true;
    }
    cv_.notify_all();
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<std::pair<std::string, bool>> lines_;
  std::size_t capacity_;
  std::size_t audio_waiting_ = 0;
  bool closed_ = false;
};

struct Connection {
  explicit Connection(tcp::socket s) : socket(std::move(s)) {}
  tcp::socket socket;
  std::thread thread;
  std::atomic<bool> done{false};
};

std::string make_session_id(int n) {
  const auto now = std::chrono::system_clock::now().time_since_epoch();
  return "s" + std::to_string(std::chrono::duration_cast<std::chrono::seconds>(now).count()) +
         "-" + std::to_string(n);
}

}  // namespace

struct Server::Impl {
  explicit Impl(ServerConfig c) : cfg(std::move(c)), acceptor(io) {}

  void accept_next();
  void reap();
  void serve(Connection& conn, int id);

  ServerConfig cfg;
  asio::io_context io;
  tcp::acceptor acceptor;
  std::optional<asio::signal_set> signals;
  std::mutex mu;
  std::list<std::shared_ptr<Connection>> connections;
  int next_id = 1;
  bool stopping = false;
};

Server::Server(ServerConfig cfg) : impl_(std::make_unique<Impl>(std::move(cfg))) {
  impl_->cfg.session.validate();
  try {
    const tcp::endpoint endpoint(asio::ip::make_address(impl_->cfg.address.host),
                                 static_cast<unsigned short>(impl_->cfg.address.port));
    impl_->acceptor.open(endpoint.protocol());
    impl_->acceptor.set_option(tcp::acceptor::reuse_address(true));
    impl_->acceptor.bind(endpoint);
    impl_->acceptor.listen();
  } catch (const boost::system::system_error& e) {
    throw IoError("cannot listen on " + impl_->cfg.address.host + ":" +
                  std::to_string(impl_->cfg.address.port) + ": " + e.what());
  }
  if (impl_->cfg.log_dir) std::filesystem::create_directories(*impl_->cfg.log_dir);
}

Server::~Server() {
  stop();
  for (auto& c : impl_->connections)
    if (c->thread.joinable()) c->thread.join();
}

int Server::port() const { return impl_->acceptor.local_endpoint().port(); }

void Server::run() {
  if (impl_->cfg.handle_signals) {
    impl_->signals.emplace(impl_->io, SIGINT, SIGTERM);
    impl_->signals->async_wait([this](const boost::system::error_code& ec, int) {
      if (!ec) stop();
    });
  }
  impl_->accept_next();
  impl_->io.run();
  std::list<std::shared_ptr<Connection>> remaining;
  {
    std::lock_guard lock(impl_->mu);
    remaining.swap(impl_->connections);
  }
  for (auto& c : remaining)
    if (c->thread.joinable()) c->thread.join();
}

void Server::stop() {
  {
    std::lock_guard lock(impl_->mu);
    if (impl_->stopping) return;
    impl_->stopping = true;
    for (auto& c : impl_->connections) {
      boost::system::error_code ec;
      c->socket.shutdown(tcp::socket::shutdown_both, ec);
    }
  }
  asio::post(impl_->io, [impl = impl_.get()] {
    boost::system::error_code ec;
    impl->acceptor.close(ec);
    if (impl->signals) impl->signals->cancel(ec);
  });
}

void Server::Impl::reap() {
  for (auto it = connections.begin(); it != connections.end();) {
    if ((*it)->done) {
      (*it)->thread.join();
      it = connections.erase(it);
    } else {
      ++it;
    }
  }
}

void Server::Impl::accept_next() {
  acceptor.async_accept([this](const boost::system::error_code& ec, tcp::socket socket) {
    if (ec) return;  // listener closed
    std::lock_guard lock(mu);
    reap();
    if (stopping) return;
    auto conn = std::make_shared<Connection>(std::move(socket));
    const int id = next_id++;
    conn->thread = std::thread([this, conn, id] {
      serve(*conn, id);
      conn->done = true;
    });
    connections.push_back(conn);
    accept_next();
  });
}

void Server::Impl::serve(Connection& conn, int id) {
  using namespace protocol;
  OutQueue out(cfg.audio_queue_blocks);
  std::thread writer([&] {
    while (auto line = out.pop()) {
      boost::system::error_code ec;
      asio::write(conn.socket, asio::buffer(*line), ec);
      if (ec) break;
    }
  });
  const auto send = [&](const ServerMessage& m) { out.push(encode(m) + "\n", false); };

  std::unique_ptr<Session> session;
  std::size_t reported = 0;
  asio::streambuf buffer(cfg.max_line_bytes);
  bool open = true;
  while (open) {
    boost::system::error_code ec;
    const std::size_t n = asio::read_until(conn.socket, buffer, '\n', ec);
    if (ec == asio::error::not_found) {
      send(Error{"line too long", true});
      break;
    }
    if (ec) break;
    std::string line(asio::buffers_begin(buffer.data()),
                     asio::buffers_begin(buffer.data()) + static_cast<std::ptrdiff_t>(n));
    buffer.consume(n);
    while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) line.pop_back();
    if (line.empty()) continue;

    ClientMessage message;
    try {
      message = decode_client(line);
    } catch (const ParseError& e) {
      send(Error{e.what(), false});
      continue;
    }

    try {
      if (const auto* hello = std::get_if<Hello>(&message)) {
        if (hello->version != kVersion) {
          send(Error{"protocol version mismatch: server speaks version " +
                         std::to_string(kVersion),
                     true});
          break;
        }
        if (session) {
          send(Error{"session already started", false});
          continue;
        }
        SessionConfig sc = cfg.session;
        if (hello->mode) sc.mode = *hello->mode;
        sc.session_id = make_session_id(id);
        std::shared_ptr<SessionLogWriter> log;
        if (cfg.log_dir)
          log = std::make_shared<SessionLogWriter>(*cfg.log_dir / (sc.session_id + ".jsonl"));
        const int rate = static_cast<int>(sc.synth.sample_rate);
        session = std::make_unique<Session>(
            sc,
            [&out, rate](std::int64_t seq, double, std::span<const float> frames) {
              out.push(encode(ServerMessage{make_audio(seq, rate, frames)}) + "\n", true);
            },
            log);
        session->set_event_sink([&](const EarconEvent& e) { send(protocol::Event{e}); });
        send(Welcome{kVersion, sc.session_id, rate, sc.synth.block_size, sc.mode});
        continue;
      }
      if (!session) {
        send(Error{"expected hello", true});
        break;
      }
      std::visit(
          [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, Pos>) {
              const UpdateResult r = session->update_position(m.t, m.p);
              if (!r.accepted) send(Error{"position rejected: " + r.reason, false});
            } else if constexpr (std::is_same_v<T, StartTrial>) {
              const TrialDescriptor d = session->start_trial(
                  TrialSpec{m.mode, m.start_distance, m.seed, m.radius, m.t});
              send(TrialStarted{d.trial, d.t, d.mode, d.start, d.target_radius, d.seed});
            } else if constexpr (std::is_same_v<T, Abort>) {
              if (!session->abort_trial()) send(Error{"no active trial", false});
            } else if constexpr (std::is_same_v<T, End>) {
              session->finish(m.t.value_or(session->last_time().value_or(0.0)));
              open = false;
            }
          },
          message);
    } catch (const ConflictError& e) {
      send(Error{e.what(), false});
    } catch (const ValidationError& e) {
      send(Error{e.what(), false});
    } catch (const IoError& e) {
      send(Error{e.what(), true});
      open = false;
    }
    if (session) {
      const auto& trials = session->trials();
      for (; reported < trials.size(); ++reported) send(make_trial_result(trials[reported]));
    }
  }

  if (session && open) {
    // Client went away: close the log with whatever audio is already due.
    try {
      session->finish(session->last_time().value_or(0.0));
    } catch (const std::exception&) {
    }
  }
  out.close();
  writer.join();
  boost::system::error_code ec;
  conn.socket.shutdown(tcp::socket::shutdown_both, ec);
  conn.socket.close(ec);
}

}  // namespace sonicguide
