#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "scensim/wire.hpp"

namespace scensim {

enum class RecvStatus { Message, Closed, Timeout };

struct RecvResult {
    RecvStatus status = RecvStatus::Closed;
    RtiMessage message;
};

/// Federate-side duplex connection to the coordinator. Reliable and FIFO
/// per direction.
class ClientChannel {
public:
    virtual ~ClientChannel() = default;
    virtual void send(const RtiMessage& message) = 0;
    virtual RecvResult receive(std::chrono::milliseconds timeout) = 0;
    virtual void close() = 0;
};

using ClientChannelPtr = std::shared_ptr<ClientChannel>;

/// One inbound item on the coordinator side: a frame from a connection, or
/// notice that the connection went away.
struct InboundEvent {
    std::uint64_t conn = 0;
    std::string frame;
    bool closed = false;
};

/// Coordinator-side endpoint multiplexing all connections into one ordered
/// inbox.
class ServerEndpoint {
public:
    virtual ~ServerEndpoint() = default;

    /// Next event, blocking up to `timeout`. nullopt = nothing arrived.
    virtual std::optional<InboundEvent> next_event(std::chrono::milliseconds timeout) = 0;

    /// Non-blocking: pops an already-buffered event if there is one.
    virtual std::optional<InboundEvent> poll_event() = 0;

    virtual void send(std::uint64_t conn, const std::string& frame) = 0;
    virtual void close_connection(std::uint64_t conn) = 0;
    virtual void shutdown() = 0;
};

template <typename T>
class BlockingQueue {
public:
    void push(T item) {
        {
            std::lock_guard<std::mutex> lock(mutex_);
            if (closed_) return;
            items_.push_back(std::move(item));
        }
        cv_.notify_one();
    }

    std::optional<T> pop(std::chrono::milliseconds timeout) {
        std::unique_lock<std::mutex> lock(mutex_);
        if (!cv_.wait_for(lock, timeout, [this] { return !items_.empty() || closed_; }))
            return std::nullopt;
        if (items_.empty()) return std::nullopt; // closed and drained
        T item = std::move(items_.front());
        items_.pop_front();
        return item;
    }

    std::optional<T> try_pop() {
        std::lock_guard<std::mutex> lock(mutex_);
        if (items_.empty()) return std::nullopt;
        T item = std::move(items_.front());
        items_.pop_front();
        return item;
    }

    void close() {
        {
            std::lock_guard<std::mutex> lock(mutex_);
            closed_ = true;
        }
        cv_.notify_all();
    }

    bool closed() const {
        std::lock_guard<std::mutex> lock(mutex_);
        return closed_;
    }

private:
    mutable std::mutex mutex_;
    std::condition_variable cv_;
    std::deque<T> items_;
    bool closed_ = false;
};

/// In-process transport: every connection is a pair of frame queues. With a
/// schedule seed set, client-to-coordinator frames pass through a pump that
/// repeatedly forwards the head frame of a randomly chosen connection,
/// randomizing interleaving while keeping each connection FIFO. Shut down
/// (and destroy) only after every client thread stopped sending.
class InProcHub : public ServerEndpoint {
public:
    InProcHub();
    explicit InProcHub(std::uint64_t scheduleSeed);
    ~InProcHub() override;

    ClientChannelPtr connect();

    std::optional<InboundEvent> next_event(std::chrono::milliseconds timeout) override;
    std::optional<InboundEvent> poll_event() override;
    void send(std::uint64_t conn, const std::string& frame) override;
    void close_connection(std::uint64_t conn) override;
    void shutdown() override;

private:
    class Channel;
    friend class Channel;

    void enqueue_from_client(std::uint64_t conn, InboundEvent event);
    void pump_loop();

    std::mutex mutex_;
    std::uint64_t next_conn_ = 1;
    std::map<std::uint64_t, std::shared_ptr<Channel>> channels_;
    BlockingQueue<InboundEvent> inbox_;

    // Randomized-schedule mode.
    bool interleave_ = false;
    std::mt19937_64 rng_;
    std::map<std::uint64_t, std::deque<InboundEvent>> staged_;
    std::condition_variable staged_cv_;
    bool stop_pump_ = false;
    std::thread pump_;
};

/// TCP endpoint: length-prefixed frames, one reader thread per connection.
class TcpServerEndpoint : public ServerEndpoint {
public:
    explicit TcpServerEndpoint(std::uint16_t port);
    ~TcpServerEndpoint() override;

    std::uint16_t bound_port() const { return port_; }

    std::optional<InboundEvent> next_event(std::chrono::milliseconds timeout) override;
    std::optional<InboundEvent> poll_event() override;
    void send(std::uint64_t conn, const std::string& frame) override;
    void close_connection(std::uint64_t conn) override;
    void shutdown() override;

private:
    struct Conn {
        int fd = -1;
        std::thread reader;
        std::mutex write_mutex;
    };

    void accept_loop();
    void reader_loop(std::uint64_t id, int fd);

    int listen_fd_ = -1;
    std::uint16_t port_ = 0;
    std::thread acceptor_;
    std::mutex mutex_;
    std::uint64_t next_conn_ = 1;
    std::map<std::uint64_t, std::shared_ptr<Conn>> conns_;
    BlockingQueue<InboundEvent> inbox_;
    bool down_ = false;
};

ClientChannelPtr connect_tcp(const std::string& host, std::uint16_t port);

} // namespace scensim
