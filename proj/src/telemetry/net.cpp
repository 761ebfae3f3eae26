#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <fstream>
#include <system_error>

#include "dtinsight/telemetry.hpp"

namespace dtinsight::telemetry {

namespace {

[[noreturn]] void throw_errno(const std::string& what) {
    throw std::system_error(errno, std::generic_category(), what);
}

struct AddrInfo {
    addrinfo* head = nullptr;
    ~AddrInfo() {
        if (head) freeaddrinfo(head);
    }
};

void resolve(const HostPort& hp, bool passive, AddrInfo& out) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    if (passive) hints.ai_flags = AI_PASSIVE;
    const std::string port = std::to_string(hp.port);
    const char* host = hp.host.empty() ? nullptr : hp.host.c_str();
    if (int rc = getaddrinfo(host, port.c_str(), &hints, &out.head); rc != 0)
        throw std::system_error(std::make_error_code(std::errc::host_unreachable),
                                "resolve " + hp.host + ": " + gai_strerror(rc));
}

}  // namespace

HostPort parse_host_port(std::string_view text) {
    auto colon = text.rfind(':');
    if (colon == std::string_view::npos) throw std::invalid_argument("expected host:port, got '" + std::string(text) + "'");
    HostPort hp;
    hp.host = std::string(text.substr(0, colon));
    auto portText = text.substr(colon + 1);
    unsigned port = 0;
    auto [ptr, ec] = std::from_chars(portText.data(), portText.data() + portText.size(), port);
    if (ec != std::errc{} || ptr != portText.data() + portText.size() || port > 65535 || portText.empty())
        throw std::invalid_argument("invalid port in '" + std::string(text) + "'");
    hp.port = static_cast<std::uint16_t>(port);
    return hp;
}

// ---------------------------------------------------------------------------

TcpIngest::TcpIngest(Hub& hub, const HostPort& bind) : hub_(hub) {
    AddrInfo ai;
    resolve(bind, true, ai);
    int lastErr = 0;
    for (addrinfo* a = ai.head; a; a = a->ai_next) {
        int fd = ::socket(a->ai_family, a->ai_socktype | SOCK_CLOEXEC, a->ai_protocol);
        if (fd < 0) {
            lastErr = errno;
            continue;
        }
        int one = 1;
        ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
        if (::bind(fd, a->ai_addr, a->ai_addrlen) == 0 && ::listen(fd, 16) == 0) {
            listenFd_ = fd;
            break;
        }
        lastErr = errno;
        ::close(fd);
    }
    if (listenFd_ < 0)
        throw std::system_error(lastErr, std::generic_category(),
                                "ingest listen on " + bind.host + ":" + std::to_string(bind.port));

    sockaddr_storage addr{};
    socklen_t len = sizeof addr;
    ::getsockname(listenFd_, reinterpret_cast<sockaddr*>(&addr), &len);
    if (addr.ss_family == AF_INET)
        port_ = ntohs(reinterpret_cast<sockaddr_in*>(&addr)->sin_port);
    else
        port_ = ntohs(reinterpret_cast<sockaddr_in6*>(&addr)->sin6_port);

    acceptThread_ = std::thread([this] { accept_loop(); });
}

TcpIngest::~TcpIngest() { stop(); }

void TcpIngest::accept_loop() {
    while (!stopping_) {
        pollfd p{listenFd_, POLLIN, 0};
        int rc = ::poll(&p, 1, 100);
        if (rc <= 0) continue;
        sockaddr_storage peer{};
        socklen_t len = sizeof peer;
        int fd = ::accept4(listenFd_, reinterpret_cast<sockaddr*>(&peer), &len, SOCK_CLOEXEC);
        if (fd < 0) continue;

        char host[NI_MAXHOST] = "?", serv[NI_MAXSERV] = "?";
        getnameinfo(reinterpret_cast<sockaddr*>(&peer), len, host, sizeof host, serv, sizeof serv,
                    NI_NUMERICHOST | NI_NUMERICSERV);
        std::string source = std::string("tcp:") + host + ":" + serv;

        std::lock_guard lk(connMu_);
        if (stopping_) {
            ::close(fd);
            break;
        }
        connFds_.push_back(fd);
        connThreads_.emplace_back([this, fd, source] { serve_connection(fd, source); });
    }
}

void TcpIngest::serve_connection(int fd, std::string source) {
    std::string buffer;
    char chunk[16384];
    for (;;) {
        ssize_t n = ::recv(fd, chunk, sizeof chunk, 0);
        if (n <= 0) break;
        buffer.append(chunk, static_cast<std::size_t>(n));
        std::size_t start = 0;
        for (;;) {
            auto nl = buffer.find('\n', start);
            if (nl == std::string::npos) break;
            std::string_view line(buffer.data() + start, nl - start);
            if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
            if (!line.empty()) hub_.ingest_line(line, source);
            start = nl + 1;
        }
        buffer.erase(0, start);
    }
    if (!buffer.empty()) hub_.ingest_line(buffer, source);

    std::lock_guard lk(connMu_);
    std::erase(connFds_, fd);
    ::close(fd);
}

void TcpIngest::stop() {
    if (stopping_.exchange(true)) return;
    if (acceptThread_.joinable()) acceptThread_.join();
    if (listenFd_ >= 0) ::close(listenFd_);
    listenFd_ = -1;
    std::vector<std::thread> threads;
    {
        std::lock_guard lk(connMu_);
        for (int fd : connFds_) ::shutdown(fd, SHUT_RDWR);
        threads = std::move(connThreads_);
    }
    for (auto& t : threads)
        if (t.joinable()) t.join();
}

// ---------------------------------------------------------------------------

std::pair<std::filesystem::path, double> parse_replay_spec(std::string_view spec) {
    auto colon = spec.rfind(':');
    if (colon != std::string_view::npos) {
        auto tail = spec.substr(colon + 1);
        double speed = 0;
        auto [ptr, ec] = std::from_chars(tail.data(), tail.data() + tail.size(), speed);
        if (ec == std::errc{} && ptr == tail.data() + tail.size() && !tail.empty()) {
            if (speed < 0) throw std::invalid_argument("replay speed must be >= 0");
            return {std::filesystem::path(std::string(spec.substr(0, colon))), speed};
        }
    }
    return {std::filesystem::path(std::string(spec)), 1.0};
}

Replay::Replay(Hub& hub, std::filesystem::path file, double speed)
    : hub_(hub), file_(std::move(file)), speed_(speed) {
    if (!std::filesystem::is_regular_file(file_))
        throw std::system_error(std::make_error_code(std::errc::no_such_file_or_directory),
                                "replay file " + file_.string());
    thread_ = std::thread([this] { run(); });
}

Replay::~Replay() {
    stop();
    if (thread_.joinable()) thread_.join();
}

void Replay::run() {
    std::ifstream in(file_);
    const std::string source = "replay:" + file_.string();
    std::string line;
    std::optional<double> firstTs;
    const auto wallStart = std::chrono::steady_clock::now();
    while (!stopping_ && std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (speed_ > 0) {
            auto parsed = parse_line(line);
            if (const auto* s = std::get_if<Sample>(&parsed)) {
                if (!firstTs) firstTs = s->ts;
                auto due = wallStart + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                           std::chrono::duration<double>((s->ts - *firstTs) / speed_));
                std::unique_lock lk(mu_);
                cv_.wait_until(lk, due, [&] { return stopping_.load(); });
                if (stopping_) break;
            }
        }
        hub_.ingest_line(line, source);
    }
    finished_ = true;
    cv_.notify_all();
}

void Replay::wait() {
    if (thread_.joinable()) thread_.join();
}

void Replay::stop() {
    {
        std::lock_guard lk(mu_);
        stopping_ = true;
    }
    cv_.notify_all();
}

// ---------------------------------------------------------------------------

TcpLineWriter::TcpLineWriter(const HostPort& target, int attempts, std::chrono::milliseconds backoff) {
    int lastErr = ECONNREFUSED;
    for (int attempt = 0; attempt < std::max(attempts, 1) && fd_ < 0; ++attempt) {
        if (attempt > 0) std::this_thread::sleep_for(backoff);
        AddrInfo ai;
        try {
            resolve(target, false, ai);
        } catch (const std::system_error&) {
            lastErr = EHOSTUNREACH;
            continue;
        }
        for (addrinfo* a = ai.head; a; a = a->ai_next) {
            int fd = ::socket(a->ai_family, a->ai_socktype | SOCK_CLOEXEC, a->ai_protocol);
            if (fd < 0) continue;
            if (::connect(fd, a->ai_addr, a->ai_addrlen) == 0) {
                int one = 1;
                ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
                fd_ = fd;
                break;
            }
            lastErr = errno;
            ::close(fd);
        }
    }
    if (fd_ < 0)
        throw std::system_error(lastErr, std::generic_category(),
                                "connect to " + target.host + ":" + std::to_string(target.port));
}

TcpLineWriter::~TcpLineWriter() {
    try {
        flush();
    } catch (const std::system_error&) {
    }
    if (fd_ >= 0) ::close(fd_);
}

void TcpLineWriter::write_line(std::string_view line) {
    pending_.append(line);
    pending_ += '\n';
    if (pending_.size() >= 64 * 1024) flush();
}

void TcpLineWriter::flush() {
    std::size_t off = 0;
    while (off < pending_.size()) {
        ssize_t n = ::send(fd_, pending_.data() + off, pending_.size() - off, MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR) continue;
            pending_.clear();
            throw_errno("send");
        }
        off += static_cast<std::size_t>(n);
    }
    pending_.clear();
}

}  // namespace dtinsight::telemetry
