#include "kexlab/wire.hpp"

#include "kexlab/errors.hpp"

#include <algorithm>

namespace kexlab::wire {

void ByteWriter::u32(std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out_.push_back(static_cast<std::uint8_t>(v >> shift));
}

void ByteWriter::u64(std::uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8) out_.push_back(static_cast<std::uint8_t>(v >> shift));
}

void ByteWriter::bytes(std::span<const std::uint8_t> v) {
  u32(static_cast<std::uint32_t>(v.size()));
  out_.insert(out_.end(), v.begin(), v.end());
}

void ByteWriter::text(std::string_view v) {
  u32(static_cast<std::uint32_t>(v.size()));
  out_.insert(out_.end(), v.begin(), v.end());
}

void ByteWriter::integer(const BigInt& v) { text(v.str()); }

void ByteWriter::rational(const Rational& v) {
  integer(boost::multiprecision::numerator(v));
  integer(boost::multiprecision::denominator(v));
}

std::span<const std::uint8_t> ByteReader::take(std::size_t n) {
  if (in_.size() - pos_ < n) throw Error(Errc::FrameError, "truncated payload");
  auto s = in_.subspan(pos_, n);
  pos_ += n;
  return s;
}

std::uint8_t ByteReader::u8() { return take(1)[0]; }

std::uint32_t ByteReader::u32() {
  std::uint32_t v = 0;
  for (auto b : take(4)) v = (v << 8) | b;
  return v;
}

std::uint64_t ByteReader::u64() {
  std::uint64_t v = 0;
  for (auto b : take(8)) v = (v << 8) | b;
  return v;
}

Bytes ByteReader::bytes() {
  auto n = u32();
  auto s = take(n);
  return Bytes(s.begin(), s.end());
}

std::string ByteReader::text() {
  auto n = u32();
  auto s = take(n);
  return std::string(s.begin(), s.end());
}

BigInt ByteReader::integer() {
  std::string t = text();
  std::string_view digits = t;
  if (!digits.empty() && digits.front() == '-') digits.remove_prefix(1);
  // Canonical form only: no sign on zero, no leading zeros.
  const bool ok = !digits.empty() && std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; }) &&
                  (digits.size() == 1 || digits.front() != '0') && !(t.front() == '-' && digits == "0");
  if (!ok) throw Error(Errc::FrameError, "non-canonical integer '" + t + "'");
  return BigInt(t);
}

Rational ByteReader::rational() {
  BigInt num = integer();
  BigInt den = integer();
  if (den <= 0) throw Error(Errc::FrameError, "denominator must be positive");
  Rational r(num, den);
  if (boost::multiprecision::denominator(r) != den) throw Error(Errc::FrameError, "rational not in lowest terms");
  return r;
}

void ByteReader::expect_end() const {
  if (pos_ != in_.size()) throw Error(Errc::FrameError, "trailing bytes in payload");
}

Bytes encode_frame(const Frame& frame) {
  if (frame.payload.size() > kMaxPayload) throw Error(Errc::FrameError, "payload exceeds frame limit");
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(frame.payload.size()));
  w.u8(static_cast<std::uint8_t>(frame.type));
  Bytes out = w.take();
  out.insert(out.end(), frame.payload.begin(), frame.payload.end());
  return out;
}

void FrameDecoder::feed(std::span<const std::uint8_t> bytes) { buffer_.insert(buffer_.end(), bytes.begin(), bytes.end()); }

std::optional<Frame> FrameDecoder::next() {
  if (buffer_.size() < kHeaderSize) return std::nullopt;
  std::uint32_t len = 0;
  for (std::size_t i = 0; i < 4; ++i) len = (len << 8) | buffer_[i];
  const std::uint8_t type = buffer_[4];
  if (len > kMaxPayload) throw Error(Errc::FrameError, "frame length " + std::to_string(len) + " exceeds limit");
  if (type < 1 || type > 3) throw Error(Errc::FrameError, "unknown message type " + std::to_string(type));
  if (buffer_.size() < kHeaderSize + len) return std::nullopt;
  Frame f{static_cast<MessageType>(type), Bytes(buffer_.begin() + kHeaderSize, buffer_.begin() + kHeaderSize + len)};
  buffer_.erase(buffer_.begin(), buffer_.begin() + kHeaderSize + len);
  return f;
}

namespace {

void expect_type(const Frame& frame, MessageType t) {
  if (frame.type != t) throw Error(Errc::FrameError, "unexpected message type");
}

}  // namespace

Frame encode_sample(const protocol::TranscriptEntry& e) {
  ByteWriter w;
  w.u64(e.round_k);
  w.u8(static_cast<std::uint8_t>(e.phase));
  w.rational(e.observation.u_c.value());
  w.rational(e.observation.i_c.value());
  w.u64(e.t);
  return {MessageType::AnalogSample, w.take()};
}

protocol::TranscriptEntry decode_sample(const Frame& frame) {
  expect_type(frame, MessageType::AnalogSample);
  ByteReader r(frame.payload);
  protocol::TranscriptEntry e;
  e.round_k = r.u64();
  const auto phase = r.u8();
  if (phase > 2) throw Error(Errc::FrameError, "bad phase byte");
  e.phase = static_cast<protocol::Phase>(phase);
  e.observation.u_c = circuit::Voltage(r.rational());
  e.observation.i_c = circuit::Current(r.rational());
  e.t = r.u64();
  r.expect_end();
  return e;
}

Frame encode_expander(const expander::ExpanderMessage& msg) {
  ByteWriter w;
  w.u8(static_cast<std::uint8_t>(msg.sender));
  w.u64(msg.k_first);
  w.u8(msg.modulus ? 1 : 0);
  if (msg.modulus) w.integer(*msg.modulus);
  w.u32(static_cast<std::uint32_t>(msg.x_list.size()));
  for (const auto& x : msg.x_list) w.integer(x);
  return {MessageType::ExpanderMsg, w.take()};
}

expander::ExpanderMessage decode_expander(const Frame& frame) {
  expect_type(frame, MessageType::ExpanderMsg);
  ByteReader r(frame.payload);
  expander::ExpanderMessage msg;
  const auto sender = r.u8();
  if (sender > 1) throw Error(Errc::FrameError, "bad sender byte");
  msg.sender = static_cast<protocol::Role>(sender);
  msg.k_first = r.u64();
  const auto has_modulus = r.u8();
  if (has_modulus > 1) throw Error(Errc::FrameError, "bad modulus flag");
  if (has_modulus) msg.modulus = r.integer();
  const auto count = r.u32();
  for (std::uint32_t i = 0; i < count; ++i) msg.x_list.push_back(r.integer());
  r.expect_end();
  return msg;
}

}  // namespace kexlab::wire
