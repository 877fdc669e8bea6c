#pragma once

// Exact information accounting for the eavesdropper. Eve enumerates every
// candidate shared secret in the public palette, keeps those consistent
// with everything she has recorded, and reads off the implied key for
// each survivor. Entropies are Shannon entropies of that enumerated,
// uniform-prior posterior; nothing is estimated.

#include "kexlab/config.hpp"
#include "kexlab/eavesdropper.hpp"
#include "kexlab/expander.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace kexlab::entropy {

struct Candidate {
  Rational r_s;
  bool consistent = false;
  std::optional<BitString> key;  // implied key, present iff consistent
  // Round that eliminated the candidate, if any.
  std::optional<std::uint64_t> eliminated_at;
};

struct PosteriorReport {
  std::vector<Candidate> candidates;  // in P_S order
  std::vector<double> posterior;      // parallel to candidates; 0 for eliminated ones
  double h_rs_bits = 0.0;
  double h_key_bits = 0.0;
  std::uint64_t rounds_used = 0;

  std::size_t consistent_count() const;
};

// Circuit transcript: X values per complete round from the slopes.
PosteriorReport brute_force_posterior(const eve::EveRecording& recording, const Palette& p_s, const Palette& p_a,
                                      const Palette& p_b);

// Any source of X values (circuit or expander). With a modulus, implied
// randoms are reduced mod q before the palette test.
PosteriorReport brute_force_posterior(std::span<const eve::XValues> rounds, const Palette& p_s, const Palette& p_a,
                                      const Palette& p_b, const std::optional<BigInt>& modulus = {});

// X values per round from an expander exchange (pairs of messages).
std::vector<eve::XValues> x_values_from_messages(std::span<const expander::ExpanderMessage> messages);

struct EntropyPoint {
  std::uint64_t k = 0;  // rounds observed
  double h_rs_bits = 0.0;
  double h_key_bits = 0.0;
  std::uint64_t key_bit_length = 0;
  bool edge_round = false;  // round k on its own eliminated some candidate
};

// One simulation with a fixed R_S and fresh round secrets; Eve's posterior
// evaluated after each round. Honors mode, modulus, sampling and seed.
std::vector<EntropyPoint> entropy_vs_rounds(const ExperimentConfig& config, std::uint64_t max_rounds);

}  // namespace kexlab::entropy
