#pragma once

// Honest-party side of the resistive key exchange: round secrets, the
// three-phase measurement sequence, partner extraction and key derivation.
//
// One round runs three public phases on a single timeline:
//   BASELINE       both sources at their drawn values
//   ALICE_PERTURB  Alice shifts U_A by the public delta, then restores it
//   BOB_PERTURB    Bob shifts U_B by the public delta, then restores it
// Each party extracts the partner's resistance from its own phase and the
// partner's voltage from the shared baseline.

#include "kexlab/circuit.hpp"
#include "kexlab/palette.hpp"
#include "kexlab/random.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace kexlab::protocol {

using circuit::Current;
using circuit::LineObservation;
using circuit::Resistance;
using circuit::Voltage;

enum class Role : std::uint8_t { Alice = 0, Bob = 1 };

enum class Phase : std::uint8_t { Baseline = 0, AlicePerturb = 1, BobPerturb = 2 };

std::string_view to_string(Role role) noexcept;
std::string_view to_string(Phase phase) noexcept;
std::optional<Phase> parse_phase(std::string_view text) noexcept;

struct SharedSecret {
  // Throws Error(InvalidArgument) when auth_key is shorter than 16 bytes.
  SharedSecret(Resistance r_s, std::vector<std::uint8_t> auth_key);

  Resistance r_s;
  std::vector<std::uint8_t> auth_key;
};

struct PartySecrets {
  Resistance r;
  Voltage u;
  std::size_t r_index = 0;
};

PartySecrets draw_round_secrets(const Palette& palette_r, const Palette& palette_u, Rng& rng);
PartySecrets draw_round_secrets(const Palette& palette_r, const Palette& palette_u, std::uint64_t rng_seed);

struct TranscriptEntry {
  std::uint64_t round_k = 0;
  Phase phase = Phase::Baseline;
  LineObservation observation;
  std::uint64_t t = 0;  // position on the global timeline

  friend bool operator==(const TranscriptEntry&, const TranscriptEntry&) = default;
};

// Public record of line observations. Append-only; rounds strictly
// increase and phases within a round appear in protocol order (a round may
// be incomplete).
class Transcript {
 public:
  // Throws Error(PhaseMismatch) when the entry would break the ordering.
  void append(TranscriptEntry entry);
  void append(const Transcript& segment);

  const std::vector<TranscriptEntry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

  // Distinct round indices in order.
  std::vector<std::uint64_t> rounds() const;
  std::optional<LineObservation> find(std::uint64_t round_k, Phase phase) const;

  friend bool operator==(const Transcript&, const Transcript&) = default;

 private:
  std::vector<TranscriptEntry> entries_;
};

struct RoundObservations {
  LineObservation baseline;
  LineObservation alice_perturbed;
  LineObservation bob_perturbed;
};

struct PartnerView {
  Resistance r;
  Voltage u;

  friend bool operator==(const PartnerView&, const PartnerView&) = default;
};

struct RoundRecord {
  std::uint64_t round_k = 0;
  RoundObservations observations;
  Voltage delta_u_a;
  Voltage delta_u_b;
  PartnerView alice_view;  // Alice's extraction of (R_B, U_B)
  PartnerView bob_view;    // Bob's extraction of (R_A, U_A)
};

// Alice's direction: R_B = |dU_c/dI_c| - r_s over Alice's perturbation,
// U_B = U_c - (r_s + R_B) I_c at the baseline.
// Throws ZeroCurrentDelta, or NegativeResistance when |slope| <= r_s.
PartnerView alice_extract(const Resistance& r_s, const LineObservation& baseline,
                          const LineObservation& alice_perturbed);

// Mirror image: R_A from Bob's perturbation, U_A = U_c + (r_s + R_A) I_c.
PartnerView bob_extract(const Resistance& r_s, const LineObservation& baseline,
                        const LineObservation& bob_perturbed);

// Checks that all three observations are consistent both with the party's
// own side of the loop and with the extracted partner side (sources shifted
// by the public deltas in their phases). Throws CrossCheckFailed.
void cross_check(Role role, const Resistance& r_s, const PartySecrets& own, const PartnerView& partner,
                 const RoundObservations& obs, const Voltage& delta_u_a, const Voltage& delta_u_b,
                 const Rational& tolerance = Rational(0));

struct RoundResult {
  RoundRecord record;
  Transcript segment;
};

// Full noiseless round between two honest parties. Both deltas must be
// nonzero (Error(InvalidArgument) otherwise).
RoundResult run_round(std::uint64_t round_k, const SharedSecret& shared, const PartySecrets& alice,
                      const PartySecrets& bob, const Voltage& delta_u_a, const Voltage& delta_u_b);

struct KeyMaterial {
  std::uint64_t round_k = 0;
  Rational r_a;
  Rational r_b;
};

struct KeyProvenance {
  std::uint64_t round_k = 0;
  std::size_t r_a_index = 0;
  std::size_t r_b_index = 0;

  friend bool operator==(const KeyProvenance&, const KeyProvenance&) = default;
};

struct Key {
  BitString bits;
  std::vector<KeyProvenance> provenance;

  friend bool operator==(const Key&, const Key&) = default;
};

// Per round: index of R_A in palette_a then index of R_B in palette_b, each
// big-endian at the palette's bit width. Voltages never enter the key.
// Throws ValueNotInPalette.
Key derive_key(std::span<const KeyMaterial> material, const Palette& palette_a, const Palette& palette_b);

struct PartyConfig {
  Role role = Role::Alice;
  Palette own_r;
  Palette own_u;
  Palette partner_r;
  Palette partner_u;
  Voltage delta_u_a;
  Voltage delta_u_b;
  // Noisy measurement mode: extracted values are rounded to the nearest
  // palette member and the cross-check allows this much residual.
  bool snap_to_palette = false;
  Rational cross_check_tolerance = 0;
};

// Single party's state machine. A round is driven as
//   begin_round -> observe(BASELINE) -> observe(ALICE_PERTURB)
//   -> observe(BOB_PERTURB) -> complete_round
// with source_voltage() queried by the line before each phase.
class Party {
 public:
  enum class State { Idle, AwaitBaseline, AwaitAlicePerturb, AwaitBobPerturb, AwaitCompletion };

  Party(PartyConfig config, SharedSecret shared);

  Role role() const noexcept { return config_.role; }
  State state() const noexcept { return state_; }
  const SharedSecret& shared() const noexcept { return shared_; }
  const PartyConfig& config() const noexcept { return config_; }

  const PartySecrets& begin_round(std::uint64_t round_k, Rng& rng);
  // Deterministic variant used when secrets are chosen externally.
  const PartySecrets& begin_round(std::uint64_t round_k, PartySecrets secrets);

  const PartySecrets& secrets() const;
  std::uint64_t current_round() const noexcept { return round_k_; }

  // What this party's source outputs during the given phase.
  Voltage source_voltage(Phase phase) const;

  // Throws Error(PhaseMismatch) on an out-of-order observation.
  void observe(std::uint64_t round_k, Phase phase, const LineObservation& obs);

  // Extraction plus cross-check; appends the round to the key ledger.
  PartnerView complete_round();

  const std::vector<KeyMaterial>& key_material() const noexcept { return material_; }
  Key key(const Palette& palette_a, const Palette& palette_b) const;

 private:
  PartyConfig config_;
  SharedSecret shared_;
  State state_ = State::Idle;
  std::uint64_t round_k_ = 0;
  std::optional<PartySecrets> secrets_;
  std::optional<LineObservation> baseline_;
  std::optional<LineObservation> alice_perturbed_;
  std::optional<LineObservation> bob_perturbed_;
  std::vector<KeyMaterial> material_;
};

}  // namespace kexlab::protocol
