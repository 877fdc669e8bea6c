#pragma once

// Current-injection attack on the wire node and the authenticated
// end-to-end comparison that detects it. With an ideal wire the cable model
// is the identity: both ends must report the same voltage and current.

#include "kexlab/circuit.hpp"
#include "kexlab/protocol.hpp"
#include "kexlab/wire.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace kexlab::defense {

using circuit::Current;
using circuit::LineObservation;
using circuit::LoopParams;
using protocol::Phase;
using protocol::Role;

struct EndObservations {
  LineObservation alice_end;  // current leaving Alice's R_S toward the node
  LineObservation bob_end;    // current entering Bob's R_S from the node
};

// Nodal solve with a current source at the wire node. Same node voltage at
// both ends; bob_end.i - alice_end.i == i_inject.
EndObservations solve_loop_with_injection(const LoopParams& params, const Current& i_inject);

struct EndpointReport {
  Role party = Role::Alice;
  std::uint64_t round_k = 0;
  Phase phase = Phase::Baseline;
  circuit::Voltage u_end;
  Current i_end;
  std::vector<std::uint8_t> auth_tag;

  friend bool operator==(const EndpointReport&, const EndpointReport&) = default;
};

// u8 party | u64 round | u8 phase | rational u_end | rational i_end
wire::Bytes canonical_fields(const EndpointReport& report);

// Tags the report with HMAC-<digest> truncated to 16 bytes. auth_key must be
// at least 16 bytes (Error(InvalidArgument) otherwise).
EndpointReport make_report(Role party, std::uint64_t round_k, Phase phase, const LineObservation& observation,
                           std::span<const std::uint8_t> auth_key, std::string_view digest = "SHA256");

// Recomputes the tag over the current field values.
void retag(EndpointReport& report, std::span<const std::uint8_t> auth_key, std::string_view digest = "SHA256");

bool verify_tag(const EndpointReport& report, std::span<const std::uint8_t> auth_key,
                std::string_view digest = "SHA256");

enum class Reason { None, CurrentMismatch, VoltageMismatch, BadTag };

std::string_view to_string(Reason reason) noexcept;

struct DefenseVerdict {
  std::uint64_t round_k = 0;
  Phase phase = Phase::Baseline;
  bool alarm = false;
  Reason reason = Reason::None;
};

// Throws Error(RoundPhaseMismatch) when the reports are not for the same
// (round, phase) or do not come from one Alice and one Bob.
DefenseVerdict verify_round(const EndpointReport& alice_report, const EndpointReport& bob_report,
                            std::span<const std::uint8_t> auth_key, const Rational& tolerance = Rational(0),
                            std::string_view digest = "SHA256");

// AUTH_REPORT payload: canonical fields followed by the length-prefixed tag.
wire::Frame encode_report(const EndpointReport& report);
EndpointReport decode_report(const wire::Frame& frame);

// Adversary holding the auth key: rewrite a report's current so it matches
// what the receiver measured at its own end, and re-tag it.
EndpointReport forge_report(const EndpointReport& in_flight, const Current& receiver_current,
                            std::span<const std::uint8_t> auth_key, std::string_view digest = "SHA256");

}  // namespace kexlab::defense
