#include "scensim/transport.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstring>

namespace scensim {

// ---------------------------------------------------------------------------
// In-process transport

class InProcHub::Channel : public ClientChannel {
public:
    Channel(InProcHub* hub, std::uint64_t conn) : hub_(hub), conn_(conn) {}

    void send(const RtiMessage& message) override {
        std::string frame = message.to_frame();
        InProcHub* hub = nullptr;
        {
            std::lock_guard<std::mutex> lock(mutex_);
            if (closed_to_hub_) throw Error(ErrorCode::ConnectFailure, "channel is closed");
            hub = hub_;
        }
        if (!hub) throw Error(ErrorCode::ConnectFailure, "coordinator endpoint is gone");
        hub->enqueue_from_client(conn_, InboundEvent{conn_, std::move(frame), false});
    }

    RecvResult receive(std::chrono::milliseconds timeout) override {
        auto frame = from_hub_.pop(timeout);
        if (!frame) {
            if (from_hub_.closed()) return {RecvStatus::Closed, {}};
            return {RecvStatus::Timeout, {}};
        }
        if (frame->empty()) return {RecvStatus::Closed, {}};
        return {RecvStatus::Message, RtiMessage::from_frame(*frame)};
    }

    void close() override {
        InProcHub* hub = nullptr;
        {
            std::lock_guard<std::mutex> lock(mutex_);
            if (closed_to_hub_) return;
            closed_to_hub_ = true;
            hub = hub_;
        }
        from_hub_.close();
        if (hub) hub->enqueue_from_client(conn_, InboundEvent{conn_, "", true});
    }

    void deliver(std::string frame) { from_hub_.push(std::move(frame)); }
    void drop_endpoint() {
        std::lock_guard<std::mutex> lock(mutex_);
        hub_ = nullptr;
    }
    void close_from_hub() { from_hub_.close(); }

private:
    std::mutex mutex_;
    InProcHub* hub_;
    std::uint64_t conn_;
    bool closed_to_hub_ = false;
    BlockingQueue<std::string> from_hub_;
};

InProcHub::InProcHub() = default;

InProcHub::InProcHub(std::uint64_t scheduleSeed) : interleave_(true), rng_(scheduleSeed) {
    pump_ = std::thread([this] { pump_loop(); });
}

InProcHub::~InProcHub() { shutdown(); }

ClientChannelPtr InProcHub::connect() {
    std::lock_guard<std::mutex> lock(mutex_);
    auto conn = next_conn_++;
    auto channel = std::make_shared<Channel>(this, conn);
    channels_[conn] = channel;
    return channel;
}

void InProcHub::enqueue_from_client(std::uint64_t conn, InboundEvent event) {
    if (!interleave_) {
        inbox_.push(std::move(event));
        return;
    }
    {
        std::lock_guard<std::mutex> lock(mutex_);
        staged_[conn].push_back(std::move(event));
    }
    staged_cv_.notify_one();
}

void InProcHub::pump_loop() {
    std::unique_lock<std::mutex> lock(mutex_);
    for (;;) {
        staged_cv_.wait(lock, [this] {
            if (stop_pump_) return true;
            for (const auto& [_, q] : staged_)
                if (!q.empty()) return true;
            return false;
        });
        if (stop_pump_) return;
        std::vector<std::uint64_t> ready;
        for (const auto& [conn, q] : staged_)
            if (!q.empty()) ready.push_back(conn);
        std::uint64_t pick = ready[rng_() % ready.size()];
        InboundEvent event = std::move(staged_[pick].front());
        staged_[pick].pop_front();
        lock.unlock();
        inbox_.push(std::move(event));
        lock.lock();
    }
}

std::optional<InboundEvent> InProcHub::next_event(std::chrono::milliseconds timeout) {
    return inbox_.pop(timeout);
}

std::optional<InboundEvent> InProcHub::poll_event() { return inbox_.try_pop(); }

void InProcHub::send(std::uint64_t conn, const std::string& frame) {
    std::shared_ptr<Channel> channel;
    {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = channels_.find(conn);
        if (it == channels_.end()) return;
        channel = it->second;
    }
    channel->deliver(frame);
}

void InProcHub::close_connection(std::uint64_t conn) {
    std::shared_ptr<Channel> channel;
    {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = channels_.find(conn);
        if (it == channels_.end()) return;
        channel = it->second;
    }
    channel->close_from_hub();
}

void InProcHub::shutdown() {
    std::map<std::uint64_t, std::shared_ptr<Channel>> channels;
    {
        std::lock_guard<std::mutex> lock(mutex_);
        channels = channels_;
        stop_pump_ = true;
    }
    staged_cv_.notify_all();
    if (pump_.joinable()) pump_.join();
    for (auto& [_, channel] : channels) {
        channel->drop_endpoint();
        channel->close_from_hub();
    }
    inbox_.close();
}

// ---------------------------------------------------------------------------
// TCP transport

namespace {

bool read_exact(int fd, char* out, size_t n) {
    size_t got = 0;
    while (got < n) {
        ssize_t r = ::recv(fd, out + got, n - got, 0);
        if (r <= 0) return false;
        got += static_cast<size_t>(r);
    }
    return true;
}

bool write_all(int fd, const char* data, size_t n) {
    size_t sent = 0;
    while (sent < n) {
        ssize_t w = ::send(fd, data + sent, n - sent, MSG_NOSIGNAL);
        if (w <= 0) return false;
        sent += static_cast<size_t>(w);
    }
    return true;
}

std::optional<std::string> read_frame(int fd) {
    char header[4];
    if (!read_exact(fd, header, 4)) return std::nullopt;
    std::uint32_t n = (static_cast<std::uint32_t>(static_cast<unsigned char>(header[0])) << 24) |
                      (static_cast<std::uint32_t>(static_cast<unsigned char>(header[1])) << 16) |
                      (static_cast<std::uint32_t>(static_cast<unsigned char>(header[2])) << 8) |
                      static_cast<std::uint32_t>(static_cast<unsigned char>(header[3]));
    if (n > (1u << 26)) return std::nullopt; // oversized frame: treat as protocol failure
    std::string body(n, '\0');
    if (n > 0 && !read_exact(fd, body.data(), n)) return std::nullopt;
    return body;
}

} // namespace

TcpServerEndpoint::TcpServerEndpoint(std::uint16_t port) {
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0) throw Error(ErrorCode::ConnectFailure, "socket() failed");
    int one = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = htons(port);
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
        ::close(listen_fd_);
        throw Error(ErrorCode::ConnectFailure,
                    "bind() failed on port " + std::to_string(port) + ": " + std::strerror(errno));
    }
    socklen_t len = sizeof(addr);
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
    if (::listen(listen_fd_, 64) != 0) {
        ::close(listen_fd_);
        throw Error(ErrorCode::ConnectFailure, "listen() failed");
    }
    acceptor_ = std::thread([this] { accept_loop(); });
}

TcpServerEndpoint::~TcpServerEndpoint() { shutdown(); }

void TcpServerEndpoint::accept_loop() {
    for (;;) {
        int fd = ::accept(listen_fd_, nullptr, nullptr);
        if (fd < 0) return; // listener closed
        int one = 1;
        ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
        std::uint64_t id;
        std::shared_ptr<Conn> conn;
        {
            std::lock_guard<std::mutex> lock(mutex_);
            if (down_) {
                ::close(fd);
                return;
            }
            id = next_conn_++;
            conn = std::make_shared<Conn>();
            conn->fd = fd;
            conns_[id] = conn;
        }
        conn->reader = std::thread([this, id, fd] { reader_loop(id, fd); });
    }
}

void TcpServerEndpoint::reader_loop(std::uint64_t id, int fd) {
    for (;;) {
        auto frame = read_frame(fd);
        if (!frame) {
            inbox_.push(InboundEvent{id, "", true});
            return;
        }
        inbox_.push(InboundEvent{id, std::move(*frame), false});
    }
}

std::optional<InboundEvent> TcpServerEndpoint::next_event(std::chrono::milliseconds timeout) {
    return inbox_.pop(timeout);
}

std::optional<InboundEvent> TcpServerEndpoint::poll_event() { return inbox_.try_pop(); }

void TcpServerEndpoint::send(std::uint64_t conn, const std::string& frame) {
    std::shared_ptr<Conn> c;
    {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = conns_.find(conn);
        if (it == conns_.end()) return;
        c = it->second;
    }
    std::string wire = frame_with_length(frame);
    std::lock_guard<std::mutex> lock(c->write_mutex);
    if (c->fd >= 0) write_all(c->fd, wire.data(), wire.size());
}

void TcpServerEndpoint::close_connection(std::uint64_t conn) {
    std::shared_ptr<Conn> c;
    {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = conns_.find(conn);
        if (it == conns_.end()) return;
        c = it->second;
    }
    std::lock_guard<std::mutex> lock(c->write_mutex);
    if (c->fd >= 0) ::shutdown(c->fd, SHUT_RDWR);
}

void TcpServerEndpoint::shutdown() {
    std::map<std::uint64_t, std::shared_ptr<Conn>> conns;
    {
        std::lock_guard<std::mutex> lock(mutex_);
        if (down_) return;
        down_ = true;
        conns = conns_;
    }
    // Wake the acceptor first; the fd is closed only after the thread that
    // reads it is gone.
    if (listen_fd_ >= 0) ::shutdown(listen_fd_, SHUT_RDWR);
    if (acceptor_.joinable()) acceptor_.join();
    if (listen_fd_ >= 0) {
        ::close(listen_fd_);
        listen_fd_ = -1;
    }
    for (auto& [_, c] : conns) {
        {
            std::lock_guard<std::mutex> lock(c->write_mutex);
            if (c->fd >= 0) ::shutdown(c->fd, SHUT_RDWR);
        }
        if (c->reader.joinable()) c->reader.join();
        std::lock_guard<std::mutex> lock(c->write_mutex);
        if (c->fd >= 0) {
            ::close(c->fd);
            c->fd = -1;
        }
    }
    {
        std::lock_guard<std::mutex> lock(mutex_);
        conns_.clear();
    }
    inbox_.close();
}

namespace {

class TcpClientChannel : public ClientChannel {
public:
    TcpClientChannel(const std::string& host, std::uint16_t port) {
        fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
        if (fd_ < 0) throw Error(ErrorCode::ConnectFailure, "socket() failed");
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_port = htons(port);
        if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
            if (host == "localhost") {
                addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
            } else {
                ::close(fd_);
                throw Error(ErrorCode::ConnectFailure, "unsupported host '" + host + "'");
            }
        }
        if (::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
            ::close(fd_);
            fd_ = -1;
            throw Error(ErrorCode::ConnectFailure,
                        "connect to " + host + ":" + std::to_string(port) + " failed");
        }
        int one = 1;
        ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    }

    ~TcpClientChannel() override { close(); }

    void send(const RtiMessage& message) override {
        std::string wire = frame_with_length(message.to_frame());
        std::lock_guard<std::mutex> lock(write_mutex_);
        if (fd_ < 0 || !write_all(fd_, wire.data(), wire.size()))
            throw Error(ErrorCode::ConnectFailure, "send failed; connection is down");
    }

    RecvResult receive(std::chrono::milliseconds timeout) override {
        if (fd_ < 0) return {RecvStatus::Closed, {}};
        pollfd pfd{fd_, POLLIN, 0};
        int r = ::poll(&pfd, 1, static_cast<int>(timeout.count()));
        if (r == 0) return {RecvStatus::Timeout, {}};
        if (r < 0) return {RecvStatus::Closed, {}};
        auto frame = read_frame(fd_);
        if (!frame) return {RecvStatus::Closed, {}};
        return {RecvStatus::Message, RtiMessage::from_frame(*frame)};
    }

    void close() override {
        std::lock_guard<std::mutex> lock(write_mutex_);
        if (fd_ >= 0) {
            ::shutdown(fd_, SHUT_RDWR);
            ::close(fd_);
            fd_ = -1;
        }
    }

private:
    int fd_ = -1;
    std::mutex write_mutex_;
};

} // namespace

ClientChannelPtr connect_tcp(const std::string& host, std::uint16_t port) {
    return std::make_shared<TcpClientChannel>(host, port);
}

} // namespace scensim
