#include "gsphys/session/server.hpp"

#include <chrono>
#include <deque>
#include <mutex>
#include <thread>
#include <vector>

#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/post.hpp>
#include <boost/asio/strand.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <json.hpp>

namespace gsphys::session {
namespace {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;
using Bytes = std::shared_ptr<const std::vector<std::uint8_t>>;

std::string error_message(const std::string& what) {
  return nlohmann::json{{"type", "error"}, {"message", what}}.dump();
}

class Client : public std::enable_shared_from_this<Client> {
 public:
  using Handler = std::function<void(const std::shared_ptr<Client>&, std::string)>;
  using Closed = std::function<void(const Client*)>;

  Client(tcp::socket socket, Handler on_text, Closed on_close)
      : ws_(std::move(socket)), on_text_(std::move(on_text)), on_close_(std::move(on_close)) {}

  // `hello` is queued before anything else can be written.
  void start(std::string hello, Bytes latest) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept([self = shared_from_this(), hello = std::move(hello), latest](beast::error_code ec) mutable {
      if (ec) return self->close();
      self->accepted_ = true;
      self->text_.push_back(std::move(hello));
      if (latest) self->frame_ = std::move(latest);
      self->write_next();
      self->read();
    });
  }

  void send_text(std::string text) {
    asio::post(ws_.get_executor(), [self = shared_from_this(), text = std::move(text)]() mutable {
      self->text_.push_back(std::move(text));
      self->write_next();
    });
  }

  // Replaces any frame not yet written.
  void send_frame(Bytes frame) {
    asio::post(ws_.get_executor(), [self = shared_from_this(), frame = std::move(frame)]() mutable {
      self->frame_ = std::move(frame);
      self->write_next();
    });
  }

  void shutdown() {
    asio::post(ws_.get_executor(), [self = shared_from_this()] {
      beast::error_code ec;
      beast::get_lowest_layer(self->ws_).socket().close(ec);
    });
  }

 private:
  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return self->close();
      if (self->ws_.got_text()) {
        self->on_text_(self, beast::buffers_to_string(self->buffer_.data()));
      } else {
        self->text_.push_back(error_message("commands must be text messages"));
        self->write_next();
      }
      self->buffer_.consume(self->buffer_.size());
      self->read();
    });
  }

  void write_next() {
    if (writing_ || closed_ || !accepted_) return;
    if (!text_.empty()) {
      writing_ = true;
      out_text_ = std::move(text_.front());
      text_.pop_front();
      ws_.text(true);
      ws_.async_write(asio::buffer(out_text_), [self = shared_from_this()](beast::error_code ec, std::size_t) {
        self->wrote(ec);
      });
    } else if (frame_) {
      writing_ = true;
      out_frame_ = std::move(frame_);
      frame_.reset();
      ws_.binary(true);
      ws_.async_write(asio::buffer(*out_frame_), [self = shared_from_this()](beast::error_code ec, std::size_t) {
        self->wrote(ec);
      });
    }
  }

  void wrote(beast::error_code ec) {
    writing_ = false;
    out_frame_.reset();
    if (ec) return close();
    write_next();
  }

  void close() {
    if (closed_) return;
    closed_ = true;
    beast::error_code ignored;
    beast::get_lowest_layer(ws_).socket().close(ignored);
    on_close_(this);
  }

  websocket::stream<beast::tcp_stream> ws_;
  beast::flat_buffer buffer_;
  Handler on_text_;
  Closed on_close_;
  std::deque<std::string> text_;
  std::string out_text_;
  Bytes frame_;
  Bytes out_frame_;
  bool accepted_ = false;
  bool writing_ = false;
  bool closed_ = false;
};

}  // namespace

struct SessionServer::Impl {
  Impl(spec::SimSpec spec, GaussianSet scene, ServerOptions opts)
      : session(std::move(spec), std::move(scene)), options(std::move(opts)), acceptor(io) {}

  Session session;
  ServerOptions options;
  asio::io_context io;
  tcp::acceptor acceptor;
  std::thread net_thread;
  std::thread loop_thread;
  std::atomic<bool> running{false};

  // Guards the session's simulator against HELLO generation racing a tick.
  std::mutex sim_mutex;
  mutable std::mutex clients_mutex;
  std::vector<std::shared_ptr<Client>> clients;
  Bytes latest;

  mutable std::mutex stats_mutex;
  LoopStats stats;

  void accept() {
    acceptor.async_accept(asio::make_strand(io), [this](beast::error_code ec, tcp::socket socket) {
      if (ec) {
        if (running) accept();
        return;
      }
      auto client = std::make_shared<Client>(
          std::move(socket), [this](const std::shared_ptr<Client>& c, std::string text) { on_text(c, text); },
          [this](const Client* c) { remove(c); });
      std::string hello;
      {
        std::lock_guard lock(sim_mutex);
        hello = session.hello();
      }
      Bytes current;
      {
        std::lock_guard lock(clients_mutex);
        clients.push_back(client);
        current = latest;
      }
      client->start(std::move(hello), std::move(current));
      accept();
    });
  }

  void on_text(const std::shared_ptr<Client>& client, const std::string& text) {
    try {
      session.submit(parse_command(text));
    } catch (const Error& e) {
      client->send_text(error_message(e.what()));
    }
  }

  void remove(const Client* c) {
    std::lock_guard lock(clients_mutex);
    std::erase_if(clients, [c](const auto& p) { return p.get() == c; });
  }

  void broadcast_text(const std::string& text) {
    std::lock_guard lock(clients_mutex);
    for (auto& c : clients) c->send_text(text);
  }

  void loop() {
    using clock = std::chrono::steady_clock;
    const auto period = std::chrono::duration_cast<clock::duration>(std::chrono::duration<double>(1.0 / session.fps()));
    auto next = clock::now();
    while (running) {
      const auto t0 = clock::now();
      std::optional<Session::Tick> tick;
      Bytes bytes;
      try {
        std::lock_guard lock(sim_mutex);
        tick = session.tick();
        if (tick && tick->has_frame) bytes = std::make_shared<const std::vector<std::uint8_t>>(session.encode(*tick));
      } catch (const Error& e) {
        broadcast_text(error_message(e.what()));
        running = false;
        break;
      }
      if (tick) {
        for (const auto& err : tick->errors) broadcast_text(error_message(err));
      }
      if (bytes) {
        std::lock_guard lock(clients_mutex);
        latest = bytes;
        for (auto& c : clients) c->send_frame(bytes);
      }
      if (bytes) {
        std::lock_guard lock(stats_mutex);
        ++stats.frames;
        stats.busy_s += std::chrono::duration<double>(clock::now() - t0).count();
      }
      // Never try to catch up on missed frames.
      next = std::max(next + period, clock::now());
      while (running && clock::now() < next) {
        std::this_thread::sleep_for(std::min<clock::duration>(next - clock::now(), std::chrono::milliseconds(20)));
      }
    }
  }
};

SessionServer::SessionServer(spec::SimSpec spec, GaussianSet scene, ServerOptions options)
    : impl_(std::make_unique<Impl>(std::move(spec), std::move(scene), std::move(options))) {}

SessionServer::~SessionServer() { stop(); }

void SessionServer::start() {
  if (impl_->running) return;
  auto& im = *impl_;
  beast::error_code ec;
  const auto address = asio::ip::make_address(im.options.address, ec);
  if (ec) throw Error(Errc::config, "bad listen address '" + im.options.address + "'");
  const tcp::endpoint endpoint(address, im.options.port);
  im.acceptor.open(endpoint.protocol(), ec);
  if (!ec) im.acceptor.set_option(asio::socket_base::reuse_address(true), ec);
  if (!ec) im.acceptor.bind(endpoint, ec);
  if (!ec) im.acceptor.listen(asio::socket_base::max_listen_connections, ec);
  if (ec) {
    beast::error_code ignored;
    im.acceptor.close(ignored);
    throw Error(Errc::io, "cannot listen on " + im.options.address + ":" + std::to_string(im.options.port) + ": " +
                              ec.message());
  }
  im.running = true;
  im.accept();
  im.net_thread = std::thread([&im] { im.io.run(); });
  im.loop_thread = std::thread([&im] { im.loop(); });
}

void SessionServer::stop() {
  auto& im = *impl_;
  im.running = false;
  if (im.loop_thread.joinable()) im.loop_thread.join();
  if (im.net_thread.joinable()) {
    asio::post(im.io, [&im] {
      beast::error_code ignored;
      im.acceptor.close(ignored);
    });
    {
      std::lock_guard lock(im.clients_mutex);
      for (auto& c : im.clients) c->shutdown();
    }
    // Give pending closes a moment, then stop regardless.
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
    im.io.stop();
    im.net_thread.join();
  }
  std::lock_guard lock(im.clients_mutex);
  im.clients.clear();
}

unsigned short SessionServer::port() const {
  beast::error_code ec;
  const auto ep = impl_->acceptor.local_endpoint(ec);
  return ec ? 0 : ep.port();
}

std::size_t SessionServer::client_count() const {
  std::lock_guard lock(impl_->clients_mutex);
  return impl_->clients.size();
}

LoopStats SessionServer::stats() const {
  std::lock_guard lock(impl_->stats_mutex);
  return impl_->stats;
}

}  // namespace gsphys::session
