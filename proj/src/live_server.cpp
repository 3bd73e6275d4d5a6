#include <chrono>
#include <condition_variable>
#include <deque>
#include <set>

#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/signal_set.hpp>
#include <boost/asio/strand.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "cohaptics/live_server.hpp"

namespace cohaptics {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

namespace {

class WsClient;

// State touched only from the I/O thread, except where noted.
struct Hub {
  Hub(net::io_context& ctx, std::size_t limit) : ioc(ctx), queue_limit(limit) {}

  net::io_context& ioc;
  std::size_t queue_limit;
  std::set<std::shared_ptr<WsClient>> clients;
  std::atomic<std::size_t> client_count{0};
  std::atomic<std::int64_t>* tick = nullptr;

  std::mutex inbox_mutex;  // shared with the sim thread
  std::vector<InputMessage> inbox;

  void post_input(InputMessage msg) {
    std::lock_guard lock(inbox_mutex);
    inbox.push_back(std::move(msg));
  }
  std::vector<InputMessage> take_inputs() {
    std::lock_guard lock(inbox_mutex);
    return std::exchange(inbox, {});
  }
};

class WsClient : public std::enable_shared_from_this<WsClient> {
 public:
  WsClient(tcp::socket&& socket, Hub& hub) : ws_(std::move(socket)), hub_(hub) {}

  void run(http::request<http::string_body> req) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.text(true);
    ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) {
      if (ec) return;
      self->hub_.clients.insert(self);
      self->hub_.client_count = self->hub_.clients.size();
      self->read();
    });
  }

  // Drop-oldest: the frame currently being written is never dropped.
  void send(std::shared_ptr<const std::string> msg) {
    if (closed_) return;
    const std::size_t in_flight = writing_ ? 1 : 0;
    while (queue_.size() >= hub_.queue_limit + in_flight && queue_.size() > in_flight) {
      queue_.erase(queue_.begin() + static_cast<std::ptrdiff_t>(in_flight));
    }
    queue_.push_back(std::move(msg));
    if (!writing_) write();
  }

  void close() {
    if (closed_) return;
    closed_ = true;
    beast::error_code ec;
    beast::get_lowest_layer(ws_).socket().close(ec);
  }

 private:
  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return self->drop();
      const std::string text = beast::buffers_to_string(self->buffer_.data());
      self->buffer_.consume(self->buffer_.size());
      try {
        self->hub_.post_input(parse_input(text));
      } catch (const ProtocolError& e) {
        const Json err = {{"type", "error"}, {"protocol_version", kProtocolVersion},
                          {"message", e.what()}};
        self->send(std::make_shared<const std::string>(err.dump()));
      }
      self->read();
    });
  }

  void write() {
    writing_ = true;
    ws_.async_write(net::buffer(*queue_.front()),
                    [self = shared_from_this()](beast::error_code ec, std::size_t) {
                      self->queue_.pop_front();
                      self->writing_ = false;
                      if (ec) return self->drop();
                      if (!self->queue_.empty()) self->write();
                    });
  }

  void drop() {
    closed_ = true;
    hub_.clients.erase(shared_from_this());
    hub_.client_count = hub_.clients.size();
  }

  websocket::stream<beast::tcp_stream> ws_;
  beast::flat_buffer buffer_;
  std::deque<std::shared_ptr<const std::string>> queue_;
  bool writing_ = false;
  bool closed_ = false;
  Hub& hub_;
};

class HttpClient : public std::enable_shared_from_this<HttpClient> {
 public:
  HttpClient(tcp::socket&& socket, Hub& hub) : stream_(std::move(socket)), hub_(hub) {}

  void run() {
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, req_,
                     [self = shared_from_this()](beast::error_code ec, std::size_t) {
                       if (!ec) self->handle();
                     });
  }

 private:
  void handle() {
    if (websocket::is_upgrade(req_)) {
      if (req_.target() == "/stream") {
        stream_.expires_never();
        std::make_shared<WsClient>(stream_.release_socket(), hub_)->run(std::move(req_));
        return;
      }
      return respond(http::status::not_found, "text/plain", "unknown endpoint\n");
    }
    if (req_.method() == http::verb::get && req_.target() == "/health") {
      const Json body = {{"status", "ok"},
                         {"version", kServerVersion},
                         {"protocol_version", kProtocolVersion},
                         {"tick", hub_.tick->load()},
                         {"clients", hub_.client_count.load()}};
      return respond(http::status::ok, "application/json", body.dump());
    }
    respond(http::status::not_found, "text/plain", "unknown endpoint\n");
  }

  void respond(http::status status, const char* type, std::string body) {
    auto res = std::make_shared<http::response<http::string_body>>(status, req_.version());
    res->set(http::field::server, "cohaptics");
    res->set(http::field::content_type, type);
    res->set(http::field::access_control_allow_origin, "*");
    res->keep_alive(false);
    res->body() = std::move(body);
    res->prepare_payload();
    http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code, std::size_t) {
      beast::error_code ec;
      self->stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
    });
  }

  beast::tcp_stream stream_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> req_;
  Hub& hub_;
};

}  // namespace

struct LiveServer::Impl {
  Impl(LiveSession s, ServerOptions o)
      : session(std::move(s)), options(std::move(o)), acceptor(ioc), hub(ioc, options.client_queue) {}

  LiveSession session;
  ServerOptions options;
  net::io_context ioc;
  tcp::acceptor acceptor;
  Hub hub;
  std::thread io_thread;
  std::thread sim_thread;
  std::atomic<bool> stopping{false};
  bool started = false;
  std::mutex stop_mutex;
  std::condition_variable stop_cv;
  bool stop_requested = false;
  std::optional<net::signal_set> signals;

  void accept() {
    acceptor.async_accept(net::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
      if (ec) return;
      std::make_shared<HttpClient>(std::move(socket), hub)->run();
      accept();
    });
  }

  void broadcast(std::string text) {
    auto msg = std::make_shared<const std::string>(std::move(text));
    net::post(ioc, [this, msg] {
      for (const auto& c : std::vector(hub.clients.begin(), hub.clients.end())) c->send(msg);
    });
  }

  void simulate(std::atomic<std::int64_t>& tick) {
    using clock = std::chrono::steady_clock;
    const auto period = std::chrono::duration_cast<clock::duration>(
        std::chrono::duration<double>(1.0 / options.tick_rate));
    const auto frame_period = std::chrono::duration_cast<clock::duration>(
        std::chrono::duration<double>(1.0 / options.broadcast_rate));
    auto next_tick = clock::now();
    auto next_frame = next_tick;
    while (!stopping) {
      for (auto& msg : hub.take_inputs()) session.submit(msg);
      const StreamFrame frame = session.tick();
      tick = session.ticks();
      const auto now = clock::now();
      if (now >= next_frame) {
        broadcast(encode(frame));
        next_frame += frame_period;
        if (next_frame < now) next_frame = now + frame_period;
      }
      next_tick += period;
      // Far behind (debugger, suspended process): resynchronise, never burst.
      if (clock::now() - next_tick > std::chrono::milliseconds(500)) next_tick = clock::now();
      std::this_thread::sleep_until(next_tick);
    }
  }
};

LiveServer::LiveServer(LiveSession session, ServerOptions options)
    : impl_(std::make_unique<Impl>(std::move(session), std::move(options))) {
  impl_->hub.tick = &tick_;
}

LiveServer::~LiveServer() { stop(); }

void LiveServer::start() {
  auto& im = *impl_;
  if (im.started) return;
  if (!(im.options.tick_rate > 0.0) || !(im.options.broadcast_rate > 0.0) || im.options.client_queue == 0) {
    throw ConfigError("server: rates and client queue must be positive");
  }
  beast::error_code ec;
  const auto address = net::ip::make_address(im.options.address, ec);
  if (ec) throw ConfigError("server: bad address '" + im.options.address + "'");
  const tcp::endpoint endpoint(address, im.options.port);
  im.acceptor.open(endpoint.protocol(), ec);
  if (!ec) im.acceptor.set_option(net::socket_base::reuse_address(true), ec);
  if (!ec) im.acceptor.bind(endpoint, ec);
  if (!ec) im.acceptor.listen(net::socket_base::max_listen_connections, ec);
  if (ec) {
    throw Error("cannot listen on " + im.options.address + ":" + std::to_string(im.options.port) +
                ": " + ec.message());
  }
  im.started = true;
  im.accept();
  im.io_thread = std::thread([&im] {
    auto guard = net::make_work_guard(im.ioc);
    im.ioc.run();
  });
  im.sim_thread = std::thread([this] { impl_->simulate(tick_); });
}

void LiveServer::stop() {
  auto& im = *impl_;
  if (!im.started) return;
  im.started = false;
  im.stopping = true;
  if (im.sim_thread.joinable()) im.sim_thread.join();
  net::post(im.ioc, [&im] {
    beast::error_code ec;
    im.acceptor.close(ec);
    for (const auto& c : std::vector(im.hub.clients.begin(), im.hub.clients.end())) c->close();
    im.hub.clients.clear();
    if (im.signals) im.signals->cancel();
    im.ioc.stop();
  });
  if (im.io_thread.joinable()) im.io_thread.join();
  {
    std::lock_guard lock(im.stop_mutex);
    im.stop_requested = true;
  }
  im.stop_cv.notify_all();
}

void LiveServer::wait() {
  auto& im = *impl_;
  net::post(im.ioc, [&im] {
    im.signals.emplace(im.ioc, SIGINT, SIGTERM);
    im.signals->async_wait([&im](beast::error_code ec, int) {
      if (ec) return;
      std::lock_guard lock(im.stop_mutex);
      im.stop_requested = true;
      im.stop_cv.notify_all();
    });
  });
  std::unique_lock lock(im.stop_mutex);
  im.stop_cv.wait(lock, [&im] { return im.stop_requested; });
}

unsigned short LiveServer::port() const {
  beast::error_code ec;
  const auto ep = impl_->acceptor.local_endpoint(ec);
  return ec ? impl_->options.port : ep.port();
}

std::size_t LiveServer::clients() const { return impl_->hub.client_count.load(); }

}  // namespace cohaptics
