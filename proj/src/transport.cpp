#include "kexlab/transport.hpp"

#include "kexlab/errors.hpp"

#include <cerrno>
#include <cstring>
#include <deque>

#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

namespace kexlab::transport {

namespace {

struct SharedHooks {
  Interceptor interceptor;

  void apply(Direction d, wire::Frame& f) const {
    if (interceptor) interceptor(d, f);
  }
};

class MemoryEndpoint final : public Endpoint {
 public:
  MemoryEndpoint(std::shared_ptr<std::deque<wire::Frame>> inbox, std::shared_ptr<std::deque<wire::Frame>> outbox,
                 std::shared_ptr<SharedHooks> hooks, Direction dir)
      : inbox_(std::move(inbox)), outbox_(std::move(outbox)), hooks_(std::move(hooks)), dir_(dir) {}

  void send(wire::Frame frame) override {
    hooks_->apply(dir_, frame);
    // Encode once so oversized frames fail here exactly as on a socket.
    (void)wire::encode_frame(frame);
    outbox_->push_back(std::move(frame));
  }

  std::optional<wire::Frame> try_receive() override {
    if (inbox_->empty()) return std::nullopt;
    wire::Frame f = std::move(inbox_->front());
    inbox_->pop_front();
    return f;
  }

 private:
  std::shared_ptr<std::deque<wire::Frame>> inbox_;
  std::shared_ptr<std::deque<wire::Frame>> outbox_;
  std::shared_ptr<SharedHooks> hooks_;
  Direction dir_;
};

class FileDescriptor {
 public:
  explicit FileDescriptor(int fd = -1) : fd_(fd) {}
  FileDescriptor(const FileDescriptor&) = delete;
  FileDescriptor& operator=(const FileDescriptor&) = delete;
  ~FileDescriptor() {
    if (fd_ >= 0) ::close(fd_);
  }
  int get() const noexcept { return fd_; }

 private:
  int fd_;
};

class SocketEndpoint final : public Endpoint {
 public:
  SocketEndpoint(int fd, std::shared_ptr<SharedHooks> hooks, Direction dir)
      : fd_(fd), hooks_(std::move(hooks)), dir_(dir) {}

  void send(wire::Frame frame) override {
    hooks_->apply(dir_, frame);
    const auto bytes = wire::encode_frame(frame);
    std::size_t off = 0;
    while (off < bytes.size()) {
      ssize_t n = ::send(fd_.get(), bytes.data() + off, bytes.size() - off, MSG_NOSIGNAL);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw Error(Errc::TransportError, std::string("send failed: ") + std::strerror(errno));
      }
      off += static_cast<std::size_t>(n);
    }
  }

  std::optional<wire::Frame> try_receive() override {
    if (auto f = decoder_.next()) return f;
    std::uint8_t buf[4096];
    while (true) {
      pollfd p{fd_.get(), POLLIN, 0};
      int ready = ::poll(&p, 1, 0);
      if (ready < 0 && errno == EINTR) continue;
      if (ready <= 0 || !(p.revents & POLLIN)) break;
      ssize_t n = ::recv(fd_.get(), buf, sizeof buf, 0);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) break;
      decoder_.feed(std::span<const std::uint8_t>(buf, static_cast<std::size_t>(n)));
    }
    return decoder_.next();
  }

 private:
  FileDescriptor fd_;
  std::shared_ptr<SharedHooks> hooks_;
  Direction dir_;
  wire::FrameDecoder decoder_;
};

}  // namespace

Link make_link(TransportKind kind, Interceptor interceptor) {
  auto hooks = std::make_shared<SharedHooks>(SharedHooks{std::move(interceptor)});
  if (kind == TransportKind::Memory) {
    auto a_to_b = std::make_shared<std::deque<wire::Frame>>();
    auto b_to_a = std::make_shared<std::deque<wire::Frame>>();
    return {std::make_unique<MemoryEndpoint>(b_to_a, a_to_b, hooks, Direction::AToB),
            std::make_unique<MemoryEndpoint>(a_to_b, b_to_a, hooks, Direction::BToA)};
  }
  int fds[2];
  if (::socketpair(AF_UNIX, SOCK_STREAM, 0, fds) != 0)
    throw Error(Errc::TransportError, std::string("socketpair failed: ") + std::strerror(errno));
  return {std::make_unique<SocketEndpoint>(fds[0], hooks, Direction::AToB),
          std::make_unique<SocketEndpoint>(fds[1], hooks, Direction::BToA)};
}

}  // namespace kexlab::transport
