#pragma once

#include <cstdint>
#include <memory>
#include <string>

namespace scensim {

/// Minimal WebSocket server that pushes text frames to whoever is
/// connected. No client is fine; frames are simply dropped.
class WebSocketBroadcastServer {
public:
    WebSocketBroadcastServer(const std::string& host, std::uint16_t port);
    ~WebSocketBroadcastServer();

    std::uint16_t bound_port() const;
    void broadcast_text(const std::string& text);
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

std::string sha1_hex_digest_base64(const std::string& input);

} // namespace scensim
