#pragma once

// Canonical byte serialization and message framing.
//
// Frame:   u32 big-endian payload length | u8 message type | payload
// Payload: fields in declaration order; integers big-endian fixed width;
//          rationals as two length-prefixed (u32) decimal ASCII strings,
//          numerator (with leading '-' when negative) then denominator.
// Values are normalized before encoding, so equal values always produce
// identical bytes.

#include "kexlab/expander.hpp"
#include "kexlab/protocol.hpp"

#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace kexlab::wire {

using Bytes = std::vector<std::uint8_t>;

enum class MessageType : std::uint8_t { AnalogSample = 1, AuthReport = 2, ExpanderMsg = 3 };

inline constexpr std::size_t kHeaderSize = 5;
inline constexpr std::uint32_t kMaxPayload = 1u << 20;

class ByteWriter {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void bytes(std::span<const std::uint8_t> v);  // u32 length prefix
  void text(std::string_view v);                // u32 length prefix
  void integer(const BigInt& v);                // decimal text
  void rational(const Rational& v);

  const Bytes& data() const noexcept { return out_; }
  Bytes take() { return std::move(out_); }

 private:
  Bytes out_;
};

// All reads throw Error(FrameError) on truncation or malformed content.
class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> in) : in_(in) {}

  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  Bytes bytes();
  std::string text();
  BigInt integer();
  Rational rational();

  bool at_end() const noexcept { return pos_ == in_.size(); }
  // Throws FrameError when bytes remain.
  void expect_end() const;

 private:
  std::span<const std::uint8_t> take(std::size_t n);

  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

struct Frame {
  MessageType type = MessageType::AnalogSample;
  Bytes payload;

  friend bool operator==(const Frame&, const Frame&) = default;
};

Bytes encode_frame(const Frame& frame);

// Incremental decoder for a byte stream; tolerates arbitrary split points.
class FrameDecoder {
 public:
  void feed(std::span<const std::uint8_t> bytes);
  // Next complete frame, if any. Throws FrameError on an unknown type or an
  // oversized length.
  std::optional<Frame> next();
  std::size_t buffered() const noexcept { return buffer_.size(); }

 private:
  std::deque<std::uint8_t> buffer_;
};

// ANALOG_SAMPLE: u64 round | u8 phase | rational u_c | rational i_c | u64 t
Frame encode_sample(const protocol::TranscriptEntry& entry);
protocol::TranscriptEntry decode_sample(const Frame& frame);

// EXPANDER_MSG: u8 sender | u64 k_first | u8 has_modulus | [integer modulus]
//               | u32 count | count x integer
Frame encode_expander(const expander::ExpanderMessage& msg);
expander::ExpanderMessage decode_expander(const Frame& frame);

}  // namespace kexlab::wire
