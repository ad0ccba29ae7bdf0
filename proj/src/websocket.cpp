#include "scensim/websocket.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstring>
#include <map>
#include <mutex>
#include <thread>
#include <vector>

#include "scensim/error.hpp"

namespace scensim {

namespace {

// SHA-1 (FIPS 180-1), enough for the WebSocket accept key.
struct Sha1 {
    std::uint32_t h[5] = {0x67452301, 0xEFCDAB89, 0x98BADCFE, 0x10325476, 0xC3D2E1F0};

    static std::uint32_t rol(std::uint32_t v, int s) { return (v << s) | (v >> (32 - s)); }

    void block(const unsigned char* p) {
        std::uint32_t w[80];
        for (int i = 0; i < 16; ++i)
            w[i] = (std::uint32_t(p[i * 4]) << 24) | (std::uint32_t(p[i * 4 + 1]) << 16) |
                   (std::uint32_t(p[i * 4 + 2]) << 8) | std::uint32_t(p[i * 4 + 3]);
        for (int i = 16; i < 80; ++i) w[i] = rol(w[i - 3] ^ w[i - 8] ^ w[i - 14] ^ w[i - 16], 1);
        std::uint32_t a = h[0], b = h[1], c = h[2], d = h[3], e = h[4];
        for (int i = 0; i < 80; ++i) {
            std::uint32_t f, k;
            if (i < 20) { f = (b & c) | ((~b) & d); k = 0x5A827999; }
            else if (i < 40) { f = b ^ c ^ d; k = 0x6ED9EBA1; }
            else if (i < 60) { f = (b & c) | (b & d) | (c & d); k = 0x8F1BBCDC; }
            else { f = b ^ c ^ d; k = 0xCA62C1D6; }
            std::uint32_t t = rol(a, 5) + f + e + k + w[i];
            e = d; d = c; c = rol(b, 30); b = a; a = t;
        }
        h[0] += a; h[1] += b; h[2] += c; h[3] += d; h[4] += e;
    }

    std::vector<unsigned char> digest(const std::string& input) {
        std::vector<unsigned char> data(input.begin(), input.end());
        std::uint64_t bits = data.size() * 8ull;
        data.push_back(0x80);
        while (data.size() % 64 != 56) data.push_back(0);
        for (int i = 7; i >= 0; --i) data.push_back(static_cast<unsigned char>(bits >> (i * 8)));
        for (size_t i = 0; i < data.size(); i += 64) block(data.data() + i);
        std::vector<unsigned char> out(20);
        for (int i = 0; i < 5; ++i) {
            out[i * 4] = static_cast<unsigned char>(h[i] >> 24);
            out[i * 4 + 1] = static_cast<unsigned char>(h[i] >> 16);
            out[i * 4 + 2] = static_cast<unsigned char>(h[i] >> 8);
            out[i * 4 + 3] = static_cast<unsigned char>(h[i]);
        }
        return out;
    }
};

std::string base64(const std::vector<unsigned char>& data) {
    static const char* alphabet =
        "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    size_t i = 0;
    while (i + 2 < data.size()) {
        std::uint32_t v = (data[i] << 16) | (data[i + 1] << 8) | data[i + 2];
        out += alphabet[(v >> 18) & 63];
        out += alphabet[(v >> 12) & 63];
        out += alphabet[(v >> 6) & 63];
        out += alphabet[v & 63];
        i += 3;
    }
    if (i + 1 == data.size()) {
        std::uint32_t v = data[i] << 16;
        out += alphabet[(v >> 18) & 63];
        out += alphabet[(v >> 12) & 63];
        out += "==";
    } else if (i + 2 == data.size()) {
        std::uint32_t v = (data[i] << 16) | (data[i + 1] << 8);
        out += alphabet[(v >> 18) & 63];
        out += alphabet[(v >> 12) & 63];
        out += alphabet[(v >> 6) & 63];
        out += "=";
    }
    return out;
}

bool send_all(int fd, const char* data, size_t n) {
    size_t sent = 0;
    while (sent < n) {
        ssize_t w = ::send(fd, data + sent, n - sent, MSG_NOSIGNAL);
        if (w <= 0) return false;
        sent += static_cast<size_t>(w);
    }
    return true;
}

} // namespace

std::string sha1_hex_digest_base64(const std::string& input) {
    Sha1 sha;
    return base64(sha.digest(input));
}

struct WebSocketBroadcastServer::Impl {
    int listen_fd = -1;
    std::uint16_t port = 0;
    std::thread acceptor;
    std::mutex mutex;
    std::map<int, int> clients; // fd -> fd (set-like)
    bool down = false;

    void accept_loop() {
        for (;;) {
            int fd = ::accept(listen_fd, nullptr, nullptr);
            if (fd < 0) return;
            if (!handshake(fd)) {
                ::close(fd);
                continue;
            }
            std::lock_guard<std::mutex> lock(mutex);
            if (down) {
                ::close(fd);
                return;
            }
            clients[fd] = fd;
        }
    }

    bool handshake(int fd) {
        std::string request;
        char buf[512];
        while (request.find("\r\n\r\n") == std::string::npos) {
            ssize_t r = ::recv(fd, buf, sizeof(buf), 0);
            if (r <= 0) return false;
            request.append(buf, static_cast<size_t>(r));
            if (request.size() > 16384) return false;
        }
        size_t keyPos = request.find("Sec-WebSocket-Key:");
        if (keyPos == std::string::npos) return false;
        keyPos += std::strlen("Sec-WebSocket-Key:");
        while (keyPos < request.size() && request[keyPos] == ' ') ++keyPos;
        size_t end = request.find("\r\n", keyPos);
        std::string key = request.substr(keyPos, end - keyPos);
        std::string accept =
            sha1_hex_digest_base64(key + "258EAFA5-E914-47DA-95CA-C5AB0DC85B11");
        std::string response = "HTTP/1.1 101 Switching Protocols\r\n"
                               "Upgrade: websocket\r\n"
                               "Connection: Upgrade\r\n"
                               "Sec-WebSocket-Accept: " + accept + "\r\n\r\n";
        return send_all(fd, response.data(), response.size());
    }

    void broadcast(const std::string& text) {
        std::string frame;
        frame += static_cast<char>(0x81); // FIN + text
        if (text.size() < 126) {
            frame += static_cast<char>(text.size());
        } else if (text.size() <= 0xFFFF) {
            frame += static_cast<char>(126);
            frame += static_cast<char>((text.size() >> 8) & 0xFF);
            frame += static_cast<char>(text.size() & 0xFF);
        } else {
            frame += static_cast<char>(127);
            for (int i = 7; i >= 0; --i)
                frame += static_cast<char>((static_cast<std::uint64_t>(text.size()) >> (i * 8)) &
                                           0xFF);
        }
        frame += text;
        std::lock_guard<std::mutex> lock(mutex);
        for (auto it = clients.begin(); it != clients.end();) {
            if (!send_all(it->first, frame.data(), frame.size())) {
                ::close(it->first);
                it = clients.erase(it);
            } else {
                ++it;
            }
        }
    }

    void stop() {
        {
            std::lock_guard<std::mutex> lock(mutex);
            if (down) return;
            down = true;
        }
        if (listen_fd >= 0) ::shutdown(listen_fd, SHUT_RDWR);
        if (acceptor.joinable()) acceptor.join();
        if (listen_fd >= 0) {
            ::close(listen_fd);
            listen_fd = -1;
        }
        std::lock_guard<std::mutex> lock(mutex);
        for (auto& [fd, _] : clients) ::close(fd);
        clients.clear();
    }
};

WebSocketBroadcastServer::WebSocketBroadcastServer(const std::string& host, std::uint16_t port)
    : impl_(std::make_unique<Impl>()) {
    impl_->listen_fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (impl_->listen_fd < 0) throw Error(ErrorCode::SinkFailure, "socket() failed");
    int one = 1;
    ::setsockopt(impl_->listen_fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (host.empty() || host == "localhost" || ::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1)
        addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    if (::bind(impl_->listen_fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 ||
        ::listen(impl_->listen_fd, 8) != 0) {
        ::close(impl_->listen_fd);
        throw Error(ErrorCode::SinkFailure,
                    "websocket sink cannot listen on port " + std::to_string(port));
    }
    socklen_t len = sizeof(addr);
    ::getsockname(impl_->listen_fd, reinterpret_cast<sockaddr*>(&addr), &len);
    impl_->port = ntohs(addr.sin_port);
    impl_->acceptor = std::thread([impl = impl_.get()] { impl->accept_loop(); });
}

WebSocketBroadcastServer::~WebSocketBroadcastServer() { stop(); }

std::uint16_t WebSocketBroadcastServer::bound_port() const { return impl_->port; }

void WebSocketBroadcastServer::broadcast_text(const std::string& text) {
    impl_->broadcast(text);
}

void WebSocketBroadcastServer::stop() { impl_->stop(); }

} // namespace scensim
