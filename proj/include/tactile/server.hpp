#pragma once

// Network front end of the processing service.
//
// One listening port accepts two transports and tells them apart by the first
// octets a client sends:
//   * raw TCP: newline-delimited JSON both ways;
//   * WebSocket (an HTTP "GET" upgrade): one JSON message per text frame,
//     for browser clients.
// Each connection owns a SessionEngine whose handlers run serialized on the
// connection's strand; connections share only the catalogs, the log store and
// the optional grid sink.

#include <cstdint>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>

#include "tactile/session_engine.hpp"

namespace tactile::service {

class ServeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ServerOptions {
  std::string bind_address = "0.0.0.0";
  std::uint16_t port = 0;  // 0 picks an ephemeral port
  // Session time runs this many times faster than wall-clock time.
  double speed = 1.0;
  int threads = 2;
  EngineOptions engine;
};

class Server {
 public:
  // Binds immediately; throws ServeError when the port is unavailable.
  Server(ServerOptions options, std::shared_ptr<const Catalogs> catalogs, LogStore& store,
         GridSink* sink = nullptr);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  std::uint16_t port() const;

  void start();  // runs the worker threads in the background
  void stop();
  void wait();   // blocks until stop() or the io context runs dry

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Streams every grid as a 43-octet wire frame to a TCP peer, with a sequence
// number that wraps modulo 256. Write failures disable the sink.
class WireSink : public GridSink {
 public:
  // `endpoint` is "host:port". Throws ServeError when the peer is unreachable.
  explicit WireSink(const std::string& endpoint);
  ~WireSink() override;

  void emit(const MotorGrid& grid) override;
  bool healthy() const;
  std::uint64_t frames_sent() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace tactile::service
