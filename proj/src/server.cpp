#include "tactile/server.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <deque>
#include <iostream>
#include <thread>
#include <vector>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "tactile/sleeve_wire.hpp"

namespace tactile::service {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;
using nlohmann::json;

namespace {

constexpr std::size_t kMaxLine = 1 << 20;

class Connection : public std::enable_shared_from_this<Connection> {
 public:
  Connection(tcp::socket socket, std::shared_ptr<const Catalogs> catalogs,
             const EngineOptions& engine_options, LogStore* store, GridSink* sink,
             std::string id, double speed)
      : socket_(std::move(socket)),
        timer_(socket_.get_executor()),
        engine_(std::move(catalogs), engine_options, store, sink, std::move(id)),
        speed_(speed),
        epoch_(std::chrono::steady_clock::now()) {}

  void start() {
    net::dispatch(socket_.get_executor(), [self = shared_from_this()] { self->detect(); });
  }

 private:
  double now_ms() const {
    const auto elapsed = std::chrono::steady_clock::now() - epoch_;
    return std::chrono::duration<double, std::milli>(elapsed).count() * speed_;
  }

  // First octets decide the transport.
  void detect() {
    socket_.async_read_some(
        buffer_.prepare(4096), [self = shared_from_this()](beast::error_code ec, std::size_t n) {
          if (ec) return self->close();
          self->buffer_.commit(n);
          const std::string head = beast::buffers_to_string(self->buffer_.data());
          const std::string get = "GET ";
          if (head.size() < get.size() && get.compare(0, head.size(), head) == 0) {
            return self->detect();
          }
          if (head.rfind(get, 0) == 0) return self->upgrade();
          self->line_buf_ = head;
          self->buffer_.consume(self->buffer_.size());
          self->drain_lines();
          self->read_raw();
        });
  }

  void upgrade() {
    http::async_read(socket_, buffer_, request_,
                     [self = shared_from_this()](beast::error_code ec, std::size_t) {
                       if (ec) return self->close();
                       self->ws_.emplace(std::move(self->socket_));
                       self->ws_->text(true);
                       self->ws_->async_accept(self->request_, [self](beast::error_code ec2) {
                         if (ec2) return self->close();
                         self->buffer_.consume(self->buffer_.size());
                         self->read_ws();
                       });
                     });
  }

  void read_raw() {
    socket_.async_read_some(net::buffer(chunk_),
                            [self = shared_from_this()](beast::error_code ec, std::size_t n) {
                              if (ec) return self->close();
                              self->line_buf_.append(self->chunk_.data(), n);
                              self->drain_lines();
                              if (self->line_buf_.size() > kMaxLine) {
                                self->line_buf_.clear();
                                self->skip_to_newline_ = true;
                                self->send({json{{"type", "error"}, {"message", "line too long"}}});
                              }
                              if (!self->closed_) self->read_raw();
                            });
  }

  void read_ws() {
    ws_->async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return self->close();
      self->line_buf_ = beast::buffers_to_string(self->buffer_.data());
      self->buffer_.consume(self->buffer_.size());
      self->line_buf_.push_back('\n');
      self->drain_lines();
      if (!self->closed_) self->read_ws();
    });
  }

  void drain_lines() {
    std::size_t pos = 0;
    if (skip_to_newline_) {
      pos = line_buf_.find('\n');
      if (pos == std::string::npos) {
        line_buf_.clear();
        return reschedule();
      }
      line_buf_.erase(0, pos + 1);
      skip_to_newline_ = false;
    }
    while ((pos = line_buf_.find('\n')) != std::string::npos) {
      std::string line = line_buf_.substr(0, pos);
      line_buf_.erase(0, pos + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.find_first_not_of(" \t") == std::string::npos) continue;
      send(engine_.handle_line(line, now_ms()));
    }
    reschedule();
  }

  void reschedule() {
    if (closed_) return;
    const auto deadline = engine_.next_deadline_ms();
    if (!deadline) {
      timer_.cancel();
      return;
    }
    const double wall_ms = *deadline / speed_;
    timer_.expires_at(epoch_ + std::chrono::microseconds(
                                   static_cast<std::int64_t>(std::ceil(wall_ms * 1000.0))));
    timer_.async_wait([self = shared_from_this()](beast::error_code ec) {
      if (ec || self->closed_) return;
      self->send(self->engine_.on_timer(self->now_ms()));
      self->reschedule();
    });
  }

  void send(const std::vector<json>& messages) {
    if (closed_) return;
    for (const auto& m : messages) {
      std::string text = m.dump();
      if (!ws_) text.push_back('\n');
      outbox_.push_back(std::move(text));
    }
    if (!writing_ && !outbox_.empty()) write_next();
  }

  void write_next() {
    writing_ = true;
    auto on_written = [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return self->close();
      self->outbox_.pop_front();
      if (self->outbox_.empty()) {
        self->writing_ = false;
      } else {
        self->write_next();
      }
    };
    if (ws_) {
      ws_->async_write(net::buffer(outbox_.front()), std::move(on_written));
    } else {
      net::async_write(socket_, net::buffer(outbox_.front()), std::move(on_written));
    }
  }

  void close() {
    if (closed_) return;
    closed_ = true;
    engine_.abort(now_ms());
    timer_.cancel();
    beast::error_code ignored;
    if (ws_) {
      beast::get_lowest_layer(*ws_).shutdown(tcp::socket::shutdown_both, ignored);
      beast::get_lowest_layer(*ws_).close(ignored);
    } else {
      socket_.shutdown(tcp::socket::shutdown_both, ignored);
      socket_.close(ignored);
    }
  }

  tcp::socket socket_;
  std::optional<websocket::stream<tcp::socket>> ws_;
  net::steady_timer timer_;
  SessionEngine engine_;
  double speed_;
  std::chrono::steady_clock::time_point epoch_;

  beast::flat_buffer buffer_;
  http::request<http::string_body> request_;
  std::array<char, 4096> chunk_{};
  std::string line_buf_;
  std::deque<std::string> outbox_;
  bool writing_ = false;
  bool closed_ = false;
  bool skip_to_newline_ = false;
};

}  // namespace

struct Server::Impl {
  Impl(ServerOptions opts, std::shared_ptr<const Catalogs> cats, LogStore& log_store,
       GridSink* grid_sink)
      : options(std::move(opts)),
        catalogs(std::move(cats)),
        store(log_store),
        sink(grid_sink),
        acceptor(ioc) {
    if (!(options.speed > 0.0)) throw ServeError("speed must be positive");
    beast::error_code ec;
    const auto address = net::ip::make_address(options.bind_address, ec);
    if (ec) throw ServeError("bad bind address '" + options.bind_address + "'");
    const tcp::endpoint endpoint(address, options.port);
    acceptor.open(endpoint.protocol(), ec);
    if (!ec) acceptor.set_option(net::socket_base::reuse_address(true), ec);
    if (!ec) acceptor.bind(endpoint, ec);
    if (!ec) acceptor.listen(net::socket_base::max_listen_connections, ec);
    if (ec) {
      throw ServeError("cannot listen on port " + std::to_string(options.port) + ": " +
                       ec.message());
    }
  }

  void accept() {
    acceptor.async_accept(net::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
      if (ec) {
        if (ec == net::error::operation_aborted) return;
      } else {
        const std::string id = "c" + std::to_string(++connection_counter);
        std::make_shared<Connection>(std::move(socket), catalogs, options.engine, &store, sink, id,
                                     options.speed)
            ->start();
      }
      accept();
    });
  }

  ServerOptions options;
  std::shared_ptr<const Catalogs> catalogs;
  LogStore& store;
  GridSink* sink;
  net::io_context ioc;
  tcp::acceptor acceptor;
  std::vector<std::thread> workers;
  std::atomic<int> connection_counter{0};
};

Server::Server(ServerOptions options, std::shared_ptr<const Catalogs> catalogs, LogStore& store,
               GridSink* sink)
    : impl_(std::make_unique<Impl>(std::move(options), std::move(catalogs), store, sink)) {}

Server::~Server() {
  stop();
  wait();
}

std::uint16_t Server::port() const { return impl_->acceptor.local_endpoint().port(); }

void Server::start() {
  impl_->accept();
  const int threads = std::max(1, impl_->options.threads);
  for (int i = 0; i < threads; ++i) {
    impl_->workers.emplace_back([this] { impl_->ioc.run(); });
  }
}

void Server::stop() {
  net::post(impl_->ioc, [this] {
    beast::error_code ignored;
    impl_->acceptor.close(ignored);
  });
  impl_->ioc.stop();
}

void Server::wait() {
  for (auto& t : impl_->workers) {
    if (t.joinable()) t.join();
  }
  impl_->workers.clear();
}

struct WireSink::Impl {
  net::io_context ioc;
  tcp::socket socket{ioc};
  mutable std::mutex mutex;
  std::uint8_t seq = 0;
  std::uint64_t sent = 0;
  bool healthy = true;
};

WireSink::WireSink(const std::string& endpoint) : impl_(std::make_unique<Impl>()) {
  const auto colon = endpoint.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == endpoint.size()) {
    throw ServeError("wire sink must be host:port, got '" + endpoint + "'");
  }
  try {
    tcp::resolver resolver(impl_->ioc);
    net::connect(impl_->socket,
                 resolver.resolve(endpoint.substr(0, colon), endpoint.substr(colon + 1)));
    impl_->socket.set_option(tcp::no_delay(true));
  } catch (const boost::system::system_error& e) {
    throw ServeError("cannot reach wire sink " + endpoint + ": " + e.what());
  }
}

WireSink::~WireSink() {
  beast::error_code ignored;
  impl_->socket.close(ignored);
}

void WireSink::emit(const MotorGrid& grid) {
  std::lock_guard lock(impl_->mutex);
  if (!impl_->healthy) return;
  const wire::WireFrame frame = wire::encode_wireframe(grid, impl_->seq);
  beast::error_code ec;
  net::write(impl_->socket, net::buffer(frame), ec);
  if (ec) {
    impl_->healthy = false;
    std::cerr << "wire sink disabled: " << ec.message() << '\n';
    return;
  }
  ++impl_->seq;
  ++impl_->sent;
}

bool WireSink::healthy() const {
  std::lock_guard lock(impl_->mutex);
  return impl_->healthy;
}

std::uint64_t WireSink::frames_sent() const {
  std::lock_guard lock(impl_->mutex);
  return impl_->sent;
}

}  // namespace tactile::service
