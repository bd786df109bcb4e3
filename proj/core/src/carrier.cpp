#include "sqs/carrier.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <mutex>

#include "sqs/errors.hpp"

namespace sqs {
namespace {

constexpr std::uint32_t kMaxFrameBytes = 1u << 26;  // 64 MiB sanity cap

// One direction of the in-process link.
struct Queue {
  std::mutex mutex;
  std::condition_variable ready;
  std::deque<std::vector<std::uint8_t>> frames;
  bool closed = false;

  void push(std::vector<std::uint8_t> frame) {
    {
      std::lock_guard<std::mutex> lock(mutex);
      if (closed) throw IoError("in-process link: peer endpoint is gone");
      frames.push_back(std::move(frame));
    }
    ready.notify_one();
  }

  std::vector<std::uint8_t> pop() {
    std::unique_lock<std::mutex> lock(mutex);
    ready.wait(lock, [this] { return !frames.empty() || closed; });
    if (frames.empty()) throw IoError("in-process link: closed with no pending frames");
    std::vector<std::uint8_t> frame = std::move(frames.front());
    frames.pop_front();
    return frame;
  }

  void close() {
    {
      std::lock_guard<std::mutex> lock(mutex);
      closed = true;
    }
    ready.notify_all();
  }
};

struct Link {
  Queue a_to_b;
  Queue b_to_a;
};

class InProcessCarrier final : public Carrier {
 public:
  InProcessCarrier(std::shared_ptr<Link> link, bool is_a)
      : link_(std::move(link)), is_a_(is_a) {}

  ~InProcessCarrier() override {
    // Wake a peer blocked on us; both directions stop accepting frames.
    link_->a_to_b.close();
    link_->b_to_a.close();
  }

  void send(const std::vector<std::uint8_t>& frame) override {
    outgoing().push(frame);
  }

  std::vector<std::uint8_t> receive() override { return incoming().pop(); }

 private:
  Queue& outgoing() { return is_a_ ? link_->a_to_b : link_->b_to_a; }
  Queue& incoming() { return is_a_ ? link_->b_to_a : link_->a_to_b; }

  std::shared_ptr<Link> link_;
  bool is_a_;
};

void write_all(int fd, const std::uint8_t* data, std::size_t size) {
  while (size > 0) {
    const ssize_t n = ::write(fd, data, size);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw IoError(std::string("socket write failed: ") + std::strerror(errno));
    }
    data += n;
    size -= static_cast<std::size_t>(n);
  }
}

void read_exact(int fd, std::uint8_t* data, std::size_t size) {
  while (size > 0) {
    const ssize_t n = ::read(fd, data, size);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw IoError(std::string("socket read failed: ") + std::strerror(errno));
    }
    if (n == 0) throw IoError("socket closed by peer");
    data += n;
    size -= static_cast<std::size_t>(n);
  }
}

class SocketCarrier final : public Carrier {
 public:
  explicit SocketCarrier(int fd) : fd_(fd) {}
  ~SocketCarrier() override {
    if (fd_ >= 0) ::close(fd_);
  }

  void send(const std::vector<std::uint8_t>& frame) override {
    if (frame.size() > kMaxFrameBytes) throw IoError("frame exceeds the size cap");
    std::uint8_t prefix[4];
    const auto size = static_cast<std::uint32_t>(frame.size());
    prefix[0] = static_cast<std::uint8_t>(size >> 24);
    prefix[1] = static_cast<std::uint8_t>(size >> 16);
    prefix[2] = static_cast<std::uint8_t>(size >> 8);
    prefix[3] = static_cast<std::uint8_t>(size);
    write_all(fd_, prefix, 4);
    if (!frame.empty()) write_all(fd_, frame.data(), frame.size());
  }

  std::vector<std::uint8_t> receive() override {
    std::uint8_t prefix[4];
    read_exact(fd_, prefix, 4);
    const std::uint32_t size = (static_cast<std::uint32_t>(prefix[0]) << 24) |
                               (static_cast<std::uint32_t>(prefix[1]) << 16) |
                               (static_cast<std::uint32_t>(prefix[2]) << 8) |
                               static_cast<std::uint32_t>(prefix[3]);
    if (size > kMaxFrameBytes) throw IoError("incoming frame exceeds the size cap");
    std::vector<std::uint8_t> frame(size);
    if (size > 0) read_exact(fd_, frame.data(), size);
    return frame;
  }

 private:
  int fd_;
};

sockaddr_in make_address(const std::string& host, std::uint16_t port) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    throw IoError("cannot parse IPv4 address: " + host);
  }
  return addr;
}

}  // namespace

std::pair<std::unique_ptr<Carrier>, std::unique_ptr<Carrier>> make_in_process_link() {
  auto link = std::make_shared<Link>();
  return {std::make_unique<InProcessCarrier>(link, true),
          std::make_unique<InProcessCarrier>(link, false)};
}

std::unique_ptr<Carrier> make_socket_carrier(int fd) {
  if (fd < 0) throw std::invalid_argument("make_socket_carrier: bad descriptor");
  int flag = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &flag, sizeof flag);
  return std::make_unique<SocketCarrier>(fd);
}

int listen_on(const std::string& host, std::uint16_t port) {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw IoError(std::string("socket() failed: ") + std::strerror(errno));
  int reuse = 1;
  ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &reuse, sizeof reuse);
  sockaddr_in addr = make_address(host, port);
  if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
    const int err = errno;
    ::close(fd);
    throw IoError(std::string("bind failed: ") + std::strerror(err));
  }
  if (::listen(fd, 1) != 0) {
    const int err = errno;
    ::close(fd);
    throw IoError(std::string("listen failed: ") + std::strerror(err));
  }
  return fd;
}

std::uint16_t bound_port(int listen_fd) {
  sockaddr_in addr{};
  socklen_t len = sizeof addr;
  if (::getsockname(listen_fd, reinterpret_cast<sockaddr*>(&addr), &len) != 0) {
    throw IoError(std::string("getsockname failed: ") + std::strerror(errno));
  }
  return ntohs(addr.sin_port);
}

int accept_one(int listen_fd) {
  for (;;) {
    const int fd = ::accept(listen_fd, nullptr, nullptr);
    if (fd >= 0) return fd;
    if (errno == EINTR) continue;
    throw IoError(std::string("accept failed: ") + std::strerror(errno));
  }
}

int connect_to(const std::string& host, std::uint16_t port) {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw IoError(std::string("socket() failed: ") + std::strerror(errno));
  sockaddr_in addr = make_address(host, port);
  if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
    const int err = errno;
    ::close(fd);
    throw IoError(std::string("connect failed: ") + std::strerror(err));
  }
  return fd;
}

}  // namespace sqs
