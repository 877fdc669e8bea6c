#include "kexlab/active_defense.hpp"

#include "kexlab/crypto.hpp"
#include "kexlab/errors.hpp"

namespace kexlab::defense {

EndObservations solve_loop_with_injection(const LoopParams& p, const Current& i_inject) {
  // Node equation: (u_a - U)/Ra' + I = (U - u_b)/Rb'  with Ra' = r_a + r_s, Rb' = r_s + r_b.
  const Rational ra = p.r_a.value() + p.r_s.value();
  const Rational rb = p.r_s.value() + p.r_b.value();
  const Rational u = (p.u_a.value() * rb + p.u_b.value() * ra + i_inject.value() * ra * rb) / (ra + rb);
  const circuit::Voltage node(u);
  return {{node, Current((p.u_a.value() - u) / ra)}, {node, Current((u - p.u_b.value()) / rb)}};
}

wire::Bytes canonical_fields(const EndpointReport& r) {
  wire::ByteWriter w;
  w.u8(static_cast<std::uint8_t>(r.party));
  w.u64(r.round_k);
  w.u8(static_cast<std::uint8_t>(r.phase));
  w.rational(r.u_end.value());
  w.rational(r.i_end.value());
  return w.take();
}

void retag(EndpointReport& report, std::span<const std::uint8_t> auth_key, std::string_view digest) {
  if (auth_key.size() < 16) throw Error(Errc::InvalidArgument, "auth_key must be at least 16 bytes");
  report.auth_tag = crypto::keyed_tag(digest, auth_key, canonical_fields(report));
}

EndpointReport make_report(Role party, std::uint64_t round_k, Phase phase, const LineObservation& observation,
                           std::span<const std::uint8_t> auth_key, std::string_view digest) {
  EndpointReport r{party, round_k, phase, observation.u_c, observation.i_c, {}};
  retag(r, auth_key, digest);
  return r;
}

bool verify_tag(const EndpointReport& report, std::span<const std::uint8_t> auth_key, std::string_view digest) {
  if (auth_key.size() < 16) return false;
  return crypto::tags_equal(report.auth_tag, crypto::keyed_tag(digest, auth_key, canonical_fields(report)));
}

std::string_view to_string(Reason reason) noexcept {
  switch (reason) {
    case Reason::None: return "NONE";
    case Reason::CurrentMismatch: return "CURRENT_MISMATCH";
    case Reason::VoltageMismatch: return "VOLTAGE_MISMATCH";
    case Reason::BadTag: return "BAD_TAG";
  }
  return "?";
}

DefenseVerdict verify_round(const EndpointReport& alice_report, const EndpointReport& bob_report,
                            std::span<const std::uint8_t> auth_key, const Rational& tolerance,
                            std::string_view digest) {
  if (alice_report.round_k != bob_report.round_k || alice_report.phase != bob_report.phase ||
      alice_report.party != Role::Alice || bob_report.party != Role::Bob)
    throw Error(Errc::RoundPhaseMismatch, "reports do not describe the same round and phase");

  DefenseVerdict v{alice_report.round_k, alice_report.phase, false, Reason::None};
  if (!verify_tag(alice_report, auth_key, digest) || !verify_tag(bob_report, auth_key, digest))
    v.reason = Reason::BadTag;
  else if (abs(Rational(alice_report.i_end.value() - bob_report.i_end.value())) > tolerance)
    v.reason = Reason::CurrentMismatch;
  else if (abs(Rational(alice_report.u_end.value() - bob_report.u_end.value())) > tolerance)
    v.reason = Reason::VoltageMismatch;
  v.alarm = v.reason != Reason::None;
  return v;
}

wire::Frame encode_report(const EndpointReport& report) {
  wire::ByteWriter w;
  auto fields = canonical_fields(report);
  wire::Bytes payload = std::move(fields);
  w.bytes(report.auth_tag);
  payload.insert(payload.end(), w.data().begin(), w.data().end());
  return {wire::MessageType::AuthReport, std::move(payload)};
}

EndpointReport decode_report(const wire::Frame& frame) {
  if (frame.type != wire::MessageType::AuthReport) throw Error(Errc::FrameError, "unexpected message type");
  wire::ByteReader r(frame.payload);
  EndpointReport out;
  const auto party = r.u8();
  if (party > 1) throw Error(Errc::FrameError, "bad party byte");
  out.party = static_cast<Role>(party);
  out.round_k = r.u64();
  const auto phase = r.u8();
  if (phase > 2) throw Error(Errc::FrameError, "bad phase byte");
  out.phase = static_cast<Phase>(phase);
  out.u_end = circuit::Voltage(r.rational());
  out.i_end = Current(r.rational());
  out.auth_tag = r.bytes();
  r.expect_end();
  return out;
}

EndpointReport forge_report(const EndpointReport& in_flight, const Current& receiver_current,
                            std::span<const std::uint8_t> auth_key, std::string_view digest) {
  EndpointReport forged = in_flight;
  forged.i_end = receiver_current;
  retag(forged, auth_key, digest);
  return forged;
}

}  // namespace kexlab::defense
