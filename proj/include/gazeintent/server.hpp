#pragma once

#include "gazeintent/service.hpp"

#include <cstdint>
#include <memory>
#include <string>

namespace gazeintent {

struct ServerOptions {
    std::string host = "127.0.0.1";
    std::uint16_t port = 8765;  ///< 0 picks a free port
    unsigned threads = 1;
};

/// HTTP + WebSocket front end. Plain GET /health, /models and /shapes;
/// any path accepts a WebSocket upgrade and runs one SessionHandler per
/// connection.
class Server {
public:
    Server(ServerOptions options, std::shared_ptr<const ModelStore> store);
    ~Server();
    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;

    /// Binds and starts serving on background threads.
    void start();
    /// Blocks until stop() is called from another thread or a signal handler.
    void wait();
    void stop();

    /// Bound port, valid after start().
    std::uint16_t port() const;
    std::size_t active_sessions() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace gazeintent
