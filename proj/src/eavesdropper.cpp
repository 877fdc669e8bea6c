#include "kexlab/eavesdropper.hpp"

#include "kexlab/errors.hpp"

#include <algorithm>

namespace kexlab::eve {

using circuit::LineObservation;

XValues eve_x_values(const EveRecording& recording, std::uint64_t round_k) {
  return eve_x_values(recording.snapshot(), round_k);
}

XValues eve_x_values(const Transcript& transcript, std::uint64_t round_k) {
  auto base = transcript.find(round_k, Phase::Baseline);
  auto by_alice = transcript.find(round_k, Phase::AlicePerturb);
  auto by_bob = transcript.find(round_k, Phase::BobPerturb);
  if (!base || !by_alice || !by_bob)
    throw Error(Errc::IncompleteRound, "round " + std::to_string(round_k) + " lacks a phase");
  return {circuit::differential_slope(*base, *by_bob), circuit::differential_slope(*base, *by_alice), round_k};
}

RecoveredVoltages eve_recover_voltages(const XValues& x, const LineObservation& baseline) {
  const Rational& u = baseline.u_c.value();
  const Rational& i = baseline.i_c.value();
  return {circuit::Voltage(u + x.x_a * i), circuit::Voltage(u - x.x_b * i)};
}

namespace {

// nullopt when some round is inconsistent with the candidate.
std::optional<CrackResult> crack(const Transcript& transcript, const Rational& r_s, const CrackPalettes& palettes,
                                 std::string* why) {
  CrackResult out;
  out.complete = !transcript.empty();
  std::vector<protocol::KeyMaterial> material;
  for (std::uint64_t k : transcript.rounds()) {
    XValues x;
    try {
      x = eve_x_values(transcript, k);
    } catch (const Error& e) {
      if (e.code() != Errc::IncompleteRound) throw;
      out.complete = false;
      continue;
    }
    CrackedRound r;
    r.round_k = k;
    r.r_a = x.x_a - r_s;
    r.r_b = x.x_b - r_s;
    if (!palettes.p_a.contains(r.r_a) || !palettes.p_b.contains(r.r_b)) {
      if (why)
        *why = "round " + std::to_string(k) + ": implied (" + format_rational(r.r_a) + ", " +
               format_rational(r.r_b) + ") outside the public palettes";
      return std::nullopt;
    }
    auto volts = eve_recover_voltages(x, *transcript.find(k, Phase::Baseline));
    r.u_a = volts.u_a.value();
    r.u_b = volts.u_b.value();
    material.push_back({k, r.r_a, r.r_b});
    out.rounds.push_back(std::move(r));
  }
  out.key = protocol::derive_key(material, palettes.p_a, palettes.p_b);
  return out;
}

}  // namespace

std::optional<CrackResult> try_crack(const Transcript& transcript, const Rational& r_s_candidate,
                                     const CrackPalettes& palettes) {
  return crack(transcript, r_s_candidate, palettes, nullptr);
}

CrackResult eve_crack_with_secret(const Transcript& transcript, const circuit::Resistance& r_s,
                                  const CrackPalettes& palettes) {
  std::string why;
  auto result = crack(transcript, r_s.value(), palettes, &why);
  if (!result) throw Error(Errc::ValueNotInPalette, why);
  return std::move(*result);
}

CrackResult eve_crack_with_secret(const EveRecording& recording, const circuit::Resistance& r_s,
                                  const CrackPalettes& palettes) {
  return eve_crack_with_secret(recording.snapshot(), r_s, palettes);
}

TransientX transient_view(const EveRecording& recording, std::uint64_t round_k,
                          std::span<const TransientSample> samples) {
  if (samples.empty()) throw Error(Errc::ZeroCurrentDelta, "no samples");
  const Phase phase = samples.front().phase;
  if (phase == Phase::Baseline) throw Error(Errc::PhaseMismatch, "transient samples must come from a perturbation");
  for (const auto& s : samples)
    if (s.phase != phase) throw Error(Errc::PhaseMismatch, "transient samples mix phases");
  const auto rounds = recording.snapshot().rounds();
  if (std::find(rounds.begin(), rounds.end(), round_k) == rounds.end())
    throw Error(Errc::IncompleteRound, "round " + std::to_string(round_k) + " was not recorded");

  const LineObservation& first = samples.front().observation;
  for (const auto& s : samples.subspan(1)) {
    if (s.observation.i_c != first.i_c) return {round_k, phase, circuit::differential_slope(first, s.observation)};
  }
  throw Error(Errc::ZeroCurrentDelta, "samples carry a single current value");
}

LineObservation interpolate(const LineObservation& from, const LineObservation& to, const Rational& fraction) {
  auto lerp = [&](const Rational& a, const Rational& b) { return Rational(a + (b - a) * fraction); };
  return {circuit::Voltage(lerp(from.u_c.value(), to.u_c.value())),
          circuit::Current(lerp(from.i_c.value(), to.i_c.value()))};
}

}  // namespace kexlab::eve
