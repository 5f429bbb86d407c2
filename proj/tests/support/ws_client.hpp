#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

namespace gsphys::testing {

/// Minimal blocking websocket client for protocol tests.
class WsClient {
 public:
  struct Message {
    bool text = false;
    std::string data;
    std::vector<std::uint8_t> bytes() const { return {data.begin(), data.end()}; }
  };

  WsClient(const std::string& host, unsigned short port) : ws_(io_) {
    namespace asio = boost::asio;
    asio::ip::tcp::resolver resolver(io_);
    boost::beast::get_lowest_layer(ws_).connect(resolver.resolve(host, std::to_string(port)));
    ws_.handshake(host + ":" + std::to_string(port), "/");
  }

  ~WsClient() {
    boost::beast::error_code ec;
    ws_.close(boost::beast::websocket::close_code::normal, ec);
  }

  void send(const std::string& text) {
    ws_.text(true);
    ws_.write(boost::asio::buffer(text));
  }

  /// Next message, or nothing when none arrives within `timeout`.
  std::optional<Message> receive(std::chrono::milliseconds timeout) {
    buffer_.consume(buffer_.size());
    bool done = false;
    boost::beast::error_code result;
    ws_.async_read(buffer_, [&](boost::beast::error_code ec, std::size_t) {
      done = true;
      result = ec;
    });
    io_.restart();
    io_.run_for(timeout);
    if (!done) {
      // Abandon the read; the stream is unusable afterwards.
      boost::beast::get_lowest_layer(ws_).socket().cancel();
      io_.restart();
      io_.run();
      broken_ = true;
      return std::nullopt;
    }
    if (result) return std::nullopt;
    return Message{ws_.got_text(), boost::beast::buffers_to_string(buffer_.data())};
  }

  bool broken() const { return broken_; }

 private:
  boost::asio::io_context io_;
  boost::beast::websocket::stream<boost::beast::tcp_stream> ws_;
  boost::beast::flat_buffer buffer_;
  bool broken_ = false;
};

}  // namespace gsphys::testing
