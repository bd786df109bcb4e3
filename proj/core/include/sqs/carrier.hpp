#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace sqs {

// Blocking, frame-oriented, bidirectional message channel between the two
// session endpoints. A frame is an opaque byte payload; framing overhead
// (length prefixes) belongs to the carrier, not the payload.
class Carrier {
 public:
  virtual ~Carrier() = default;

  virtual void send(const std::vector<std::uint8_t>& frame) = 0;
  // Blocks for the next frame; throws IoError when the peer is gone.
  virtual std::vector<std::uint8_t> receive() = 0;
};

// Creates a connected pair of in-process endpoints backed by two mutex-
// guarded queues. Either endpoint outliving the other is safe: receive on
// a torn-down link throws IoError.
std::pair<std::unique_ptr<Carrier>, std::unique_ptr<Carrier>> make_in_process_link();

// TCP carrier: every frame travels as a 4-byte big-endian length prefix
// followed by the payload; partial reads/writes are handled internally.
// Takes ownership of a connected socket descriptor.
std::unique_ptr<Carrier> make_socket_carrier(int fd);

// Minimal TCP plumbing for the two endpoints and for tests.
// listen_on returns a listening descriptor bound to host:port (port 0
// picks an ephemeral port; bound_port reports the actual one).
int listen_on(const std::string& host, std::uint16_t port);
std::uint16_t bound_port(int listen_fd);
int accept_one(int listen_fd);  // blocks; closes nothing on failure
int connect_to(const std::string& host, std::uint16_t port);

}  // namespace sqs
