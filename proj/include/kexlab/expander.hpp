#pragma once

// Hardware-free equivalent of the resistive scheme: each party mails the
// list X_k = R_S + R_k (optionally mod q). It exposes exactly what the
// circuit's differential measurements expose.

#include "kexlab/eavesdropper.hpp"
#include "kexlab/rational.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace kexlab::expander {

using protocol::Role;

struct ExpanderMessage {
  Role sender = Role::Alice;
  std::uint64_t k_first = 0;  // round index of x_list[0]
  std::optional<BigInt> modulus;
  std::vector<BigInt> x_list;

  friend bool operator==(const ExpanderMessage&, const ExpanderMessage&) = default;
};

// Element-wise r_s + randoms (mod q when set). Under a modulus, q >= 2 and
// every input must lie in [0, q); Error(OutOfRange) otherwise.
ExpanderMessage expand(const BigInt& r_s, std::span<const BigInt> randoms, const std::optional<BigInt>& modulus = {},
                       Role sender = Role::Alice, std::uint64_t k_first = 0);

std::vector<BigInt> recover_partner_randoms(const ExpanderMessage& msg, const BigInt& r_s,
                                            const std::optional<BigInt>& modulus = {});

struct RoundTruth {
  std::uint64_t round_k = 0;
  BigInt r_a;
  BigInt r_b;
};

// True iff every recorded round's circuit X values equal the plain-mode
// expander sums for that round. Rounds that cannot be evaluated (missing
// phase, no matching truth, unmeasurable slope) count as a mismatch.
bool equivalence_check(const protocol::Transcript& circuit_transcript, const BigInt& r_s,
                       std::span<const RoundTruth> round_secrets);

}  // namespace kexlab::expander
