#pragma once

// End-to-end laboratory: wires Alice, Bob and Eve together over the
// transport, runs the configured rounds, persists the public transcript and
// runs the configured analyses.

#include "kexlab/active_defense.hpp"
#include "kexlab/config.hpp"
#include "kexlab/eavesdropper.hpp"
#include "kexlab/entropy.hpp"
#include "kexlab/transcript_io.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace kexlab::experiment {

struct RoundOutcome {
  std::uint64_t round_k = 0;
  Rational r_a, u_a, r_b, u_b;                    // ground truth
  std::optional<protocol::PartnerView> alice_view;  // Alice's extraction of Bob
  std::optional<protocol::PartnerView> bob_view;    // Bob's extraction of Alice
  std::optional<eve::XValues> eve_x;
  std::optional<eve::RecoveredVoltages> eve_voltages;
  std::string error;  // empty when both parties completed the round
};

struct DefenseRecord {
  protocol::Role verifier = protocol::Role::Alice;
  defense::DefenseVerdict verdict;
};

struct ExperimentResult {
  ExperimentConfig config;
  Rational r_s;
  io::TranscriptFile transcript;
  // What Eve's passive tap captured, independently of the harness's own log.
  protocol::Transcript eve_recording;
  std::vector<expander::ExpanderMessage> eve_messages;

  std::vector<RoundOutcome> rounds;
  protocol::Key alice_key;
  protocol::Key bob_key;
  bool keys_agree = false;

  std::optional<eve::CrackResult> crack;
  bool crack_matches = false;
  std::optional<entropy::PosteriorReport> posterior;
  std::vector<DefenseRecord> defense;
  std::uint64_t forged_reports = 0;

  std::vector<std::string> errors;
  bool alarm = false;  // any defense alarm, failed round or key disagreement
};

// Throws ConfigInvalid for configurations that cannot be simulated.
ExperimentResult run_experiment(const ExperimentConfig& config);

// Structured report, one JSON object per line.
std::vector<nlohmann::ordered_json> report_records(const ExperimentResult& result);
std::string summary(const ExperimentResult& result);

// Writes <dir>/transcript.jsonl and <dir>/report.jsonl.
void write_outputs(const ExperimentResult& result, const std::filesystem::path& dir);

// Crack a persisted transcript (either mode) with a known R_S. Throws
// FormatError on a bad file, ValueNotInPalette on an inconsistent R_S.
eve::CrackResult crack_transcript(const io::TranscriptFile& file, const Rational& r_s, const PaletteSet& palettes);
eve::CrackResult replay_attack(const std::filesystem::path& transcript_path, const Rational& r_s,
                               const PaletteSet& palettes);

// Posterior over R_S from a persisted transcript, optionally after each
// prefix of rounds.
entropy::PosteriorReport transcript_posterior(const io::TranscriptFile& file, const PaletteSet& palettes,
                                              std::optional<std::uint64_t> max_rounds = {});
std::uint64_t transcript_round_count(const io::TranscriptFile& file);

}  // namespace kexlab::experiment
