#pragma once

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "qshard/wire.hpp"

namespace qshard {

/// Multi-process transport over loopback TCP: one process per rank, one
/// full-duplex connection per rank pair. Rank r listens on base_port + r and
/// accepts from every higher rank; connectors identify themselves with a
/// 4-byte rank hello before frames flow.
class SocketTransport final : public Transport {
public:
    SocketTransport(int nranks, int rank, int base_port) : n_(nranks), rank_(rank) {
        fds_.assign(n_, -1);
        if (n_ == 1) return;

        const int listen_fd = make_listener(base_port + rank_);
        // Deterministic dialing order keeps setup free of accept races:
        // connect downward first, then accept the higher ranks.
        for (int peer = 0; peer < rank_; ++peer) fds_[peer] = dial(base_port + peer);
        for (int peer = rank_ + 1; peer < n_; ++peer) {
            int fd = ::accept(listen_fd, nullptr, nullptr);
            if (fd < 0) throw TransportError("socket: accept failed");
            set_nodelay(fd);
            std::uint8_t hello[4];
            read_exact(fd, hello, 4);
            const auto who = static_cast<int>(wire::detail::get_u32(hello));
            if (who <= rank_ || who >= n_) throw TransportError("socket: bad hello rank");
            if (fds_[who] != -1) throw TransportError("socket: duplicate hello");
            fds_[who] = fd;
        }
        ::close(listen_fd);
    }

    ~SocketTransport() override {
        for (int fd : fds_)
            if (fd >= 0) ::close(fd);
    }

    SocketTransport(const SocketTransport&) = delete;
    SocketTransport& operator=(const SocketTransport&) = delete;

    int rank() const override { return rank_; }
    int size() const override { return n_; }

    void send(int peer, std::uint32_t tag, std::span<const cxd> data) override {
        const auto bytes = wire::encode_frame(tag, data);
        write_exact(fd_for(peer), bytes.data(), bytes.size());
    }

    void recv(int peer, std::uint32_t tag, std::span<cxd> out) override {
        const int fd = fd_for(peer);
        std::uint8_t header[wire::header_bytes];
        read_exact(fd, header, sizeof header);
        const wire::FrameHeader h = wire::decode_header({header, sizeof header});
        if (h.tag != tag) throw TransportError("socket recv: tag mismatch");
        if (h.length != out.size()) throw TransportError("socket recv: length mismatch");
        std::vector<std::uint8_t> payload(out.size() * 16);
        read_exact(fd, payload.data(), payload.size());
        wire::decode_payload(payload, out);
    }

private:
    int fd_for(int peer) const {
        if (peer < 0 || peer >= n_ || peer == rank_) throw TransportError("socket: peer out of range");
        return fds_[peer];
    }

    static void set_nodelay(int fd) {
        int one = 1;
        ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    }

    static int make_listener(int port) {
        int fd = ::socket(AF_INET, SOCK_STREAM, 0);
        if (fd < 0) throw TransportError("socket: create failed");
        int one = 1;
        ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
        addr.sin_port = htons(static_cast<std::uint16_t>(port));
        if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0)
            throw TransportError("socket: bind to port " + std::to_string(port) + " failed");
        if (::listen(fd, 64) != 0) throw TransportError("socket: listen failed");
        return fd;
    }

    int dial(int port) const {
        const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(20);
        while (true) {
            int fd = ::socket(AF_INET, SOCK_STREAM, 0);
            if (fd < 0) throw TransportError("socket: create failed");
            sockaddr_in addr{};
            addr.sin_family = AF_INET;
            addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
            addr.sin_port = htons(static_cast<std::uint16_t>(port));
            if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0) {
                set_nodelay(fd);
                std::uint8_t hello[4];
                wire::detail::put_u32(hello, static_cast<std::uint32_t>(rank_));
                write_exact(fd, hello, 4);
                return fd;
            }
            ::close(fd);
            if (std::chrono::steady_clock::now() > deadline)
                throw TransportError("socket: could not reach port " + std::to_string(port));
            std::this_thread::sleep_for(std::chrono::milliseconds(5));
        }
    }

    static void read_exact(int fd, std::uint8_t* buf, std::size_t len) {
        std::size_t got = 0;
        while (got < len) {
            const ssize_t r = ::read(fd, buf + got, len - got);
            if (r == 0) throw TransportError("socket: peer closed connection");
            if (r < 0) {
                if (errno == EINTR) continue;
                throw TransportError(std::string("socket read: ") + std::strerror(errno));
            }
            got += static_cast<std::size_t>(r);
        }
    }

    static void write_exact(int fd, const std::uint8_t* buf, std::size_t len) {
        std::size_t put = 0;
        while (put < len) {
            const ssize_t w = ::write(fd, buf + put, len - put);
            if (w < 0) {
                if (errno == EINTR) continue;
                throw TransportError(std::string("socket write: ") + std::strerror(errno));
            }
            put += static_cast<std::size_t>(w);
        }
    }

    int n_;
    int rank_;
    std::vector<int> fds_;
};

/// Fork one worker process per rank and run `body` in each over a socket
/// mesh. Must be called before the calling process starts any threads.
/// Returns once every worker has exited; throws if any worker failed.
inline void run_ranks_socket(int nranks, int base_port, const std::function<void(Transport&)>& body) {
    if (nranks < 1) throw ConfigError("run_ranks_socket: need at least one rank");
    std::vector<pid_t> children;
    children.reserve(nranks);
    for (int r = 0; r < nranks; ++r) {
        const pid_t pid = ::fork();
        if (pid < 0) throw TransportError("fork failed");
        if (pid == 0) {
            int code = 0;
            try {
                SocketTransport tr(nranks, r, base_port);
                body(tr);
            } catch (const std::exception& e) {
                std::fprintf(stderr, "rank %d: %s\n", r, e.what());
                code = 1;
            }
            std::fflush(nullptr);
            ::_exit(code);
        }
        children.push_back(pid);
    }
    int failures = 0;
    for (pid_t pid : children) {
        int status = 0;
        ::waitpid(pid, &status, 0);
        if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) ++failures;
    }
    if (failures > 0)
        throw TransportError(std::to_string(failures) + " socket rank(s) failed");
}

} // namespace qshard
