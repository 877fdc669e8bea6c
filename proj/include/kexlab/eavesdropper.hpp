#pragma once

// Passive eavesdropper. Everything here works from the public transcript
// alone; the only optional extra input is a (possibly guessed) R_S.

#include "kexlab/protocol.hpp"

#include <cstdint>
#include <optional>
#include <mutex>
#include <shared_mutex>
#include <span>
#include <utility>
#include <vector>

namespace kexlab::eve {

using protocol::Phase;
using protocol::Transcript;
using protocol::TranscriptEntry;

// Append-only store of everything seen on the line. One writer (the tap),
// any number of concurrent readers.
class EveRecording {
 public:
  EveRecording() = default;
  explicit EveRecording(Transcript transcript) : transcript_(std::move(transcript)) {}
  EveRecording(const EveRecording& other) : transcript_(other.snapshot()) {}
  EveRecording& operator=(const EveRecording& other) {
    if (this != &other) {
      Transcript copy = other.snapshot();
      std::unique_lock lock(mutex_);
      transcript_ = std::move(copy);
    }
    return *this;
  }

  void record(TranscriptEntry entry) {
    std::unique_lock lock(mutex_);
    transcript_.append(std::move(entry));
  }

  Transcript snapshot() const {
    std::shared_lock lock(mutex_);
    return transcript_;
  }

  bool empty() const {
    std::shared_lock lock(mutex_);
    return transcript_.empty();
  }

 private:
  mutable std::shared_mutex mutex_;
  Transcript transcript_;
};

struct XValues {
  Rational x_a;  // R_S + R_A
  Rational x_b;  // R_S + R_B
  std::uint64_t round_k = 0;

  friend bool operator==(const XValues&, const XValues&) = default;
};

// Throws IncompleteRound when any of the three phases is missing.
XValues eve_x_values(const EveRecording& recording, std::uint64_t round_k);
XValues eve_x_values(const Transcript& transcript, std::uint64_t round_k);

struct RecoveredVoltages {
  circuit::Voltage u_a;
  circuit::Voltage u_b;
};

// U_B = U_c - X_B I_c and U_A = U_c + X_A I_c. No knowledge of R_S needed.
RecoveredVoltages eve_recover_voltages(const XValues& x, const circuit::LineObservation& baseline);

struct CrackedRound {
  std::uint64_t round_k = 0;
  Rational r_a;
  Rational r_b;
  // Absent for expander transcripts, which carry no voltages.
  std::optional<Rational> u_a;
  std::optional<Rational> u_b;

  friend bool operator==(const CrackedRound&, const CrackedRound&) = default;
};

struct CrackResult {
  std::vector<CrackedRound> rounds;
  protocol::Key key;
  // True when the recording was nonempty and every recorded round had all
  // three phases.
  bool complete = false;
};

struct CrackPalettes {
  Palette p_a;
  Palette p_b;
};

// Retroactive crack with a known R_S. Throws ValueNotInPalette when the
// candidate is inconsistent with the transcript.
CrackResult eve_crack_with_secret(const EveRecording& recording, const circuit::Resistance& r_s,
                                  const CrackPalettes& palettes);
CrackResult eve_crack_with_secret(const Transcript& transcript, const circuit::Resistance& r_s,
                                  const CrackPalettes& palettes);

// Non-throwing variant for candidate enumeration; nullopt means the
// candidate was eliminated.
std::optional<CrackResult> try_crack(const Transcript& transcript, const Rational& r_s_candidate,
                                     const CrackPalettes& palettes);

struct TransientSample {
  Phase phase = Phase::Baseline;
  circuit::LineObservation observation;
};

struct TransientX {
  std::uint64_t round_k = 0;
  Phase phase = Phase::AlicePerturb;
  Rational x;  // X_B for Alice's phase, X_A for Bob's
};

// Slope magnitude from intermediate samples taken during one perturbation
// phase. Samples must all carry the same perturbation phase label
// (PhaseMismatch otherwise); fewer than two distinct currents gives
// ZeroCurrentDelta.
TransientX transient_view(const EveRecording& recording, std::uint64_t round_k,
                          std::span<const TransientSample> samples);

// Point on the straight path from `from` to `to`; fraction in [0, 1].
circuit::LineObservation interpolate(const circuit::LineObservation& from, const circuit::LineObservation& to,
                                     const Rational& fraction);

}  // namespace kexlab::eve
