#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <string>

#include "gsphys/session/session.hpp"

namespace gsphys::session {

struct ServerOptions {
  std::string address = "127.0.0.1";
  unsigned short port = 0;  // 0 picks a free port
};

struct LoopStats {
  std::uint64_t frames = 0;
  double busy_s = 0.0;  // step + skin + encode time summed over frames
};

/// Websocket front end of one Session. A single loop thread ticks the
/// session at its fps and hands each encoded frame to every client's
/// latest-frame slot; slow clients skip frames. Network I/O runs on a
/// separate thread.
class SessionServer {
 public:
  SessionServer(spec::SimSpec spec, GaussianSet scene, ServerOptions options = {});
  ~SessionServer();
  SessionServer(const SessionServer&) = delete;
  SessionServer& operator=(const SessionServer&) = delete;

  /// Binds and starts both threads. Throws Errc::io when the port is taken.
  void start();
  void stop();

  unsigned short port() const;
  std::size_t client_count() const;
  LoopStats stats() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace gsphys::session
