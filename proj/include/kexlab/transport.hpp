#pragma once

// Duplex frame channels. The in-memory link and the local stream-socket
// link carry byte-identical frames; per-direction order is preserved.

#include "kexlab/config.hpp"
#include "kexlab/wire.hpp"

#include <functional>
#include <memory>
#include <optional>

namespace kexlab::transport {

enum class Direction { AToB, BToA };

// Sees every frame before it is transmitted and may rewrite it (an active
// adversary) or only read it (a passive tap).
using Interceptor = std::function<void(Direction, wire::Frame&)>;

class Endpoint {
 public:
  virtual ~Endpoint() = default;
  virtual void send(wire::Frame frame) = 0;
  // Next frame already delivered to this endpoint, if any. Never blocks.
  virtual std::optional<wire::Frame> try_receive() = 0;
};

struct Link {
  std::unique_ptr<Endpoint> a;
  std::unique_ptr<Endpoint> b;
};

// Throws Error(TransportError) if the socket pair cannot be created.
Link make_link(TransportKind kind, Interceptor interceptor = {});

}  // namespace kexlab::transport
