#pragma once

// Experiment configuration: a flat text file of typed keys.
//
//   # comment
//   palette.rs = 1000, 2000, 3000
//   rounds:int = 10
//   mode = expander-modular
//   modulus:int = 97
//
// A key may carry an optional ":type" annotation which must agree with the
// schema type of that key (int, uint-list, rational, rational-list, real,
// enum, hex, string).

#include "kexlab/circuit.hpp"
#include "kexlab/palette.hpp"
#include "kexlab/protocol.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace kexlab {

enum class Mode { Circuit, ExpanderPlain, ExpanderModular };
enum class Compromise { None, RsBefore, RsAfter, RsAndAuthKey };
enum class Sampling { Full, Interior };
enum class TransportKind { Memory, Socket };

std::string_view to_string(Mode m) noexcept;
std::string_view to_string(Compromise c) noexcept;
std::string_view to_string(Sampling s) noexcept;
std::string_view to_string(TransportKind t) noexcept;
std::optional<Compromise> parse_compromise(std::string_view text) noexcept;

struct InjectionScenario {
  circuit::Current i_inject;
  std::vector<std::uint64_t> active_rounds;  // empty: every round
  std::vector<protocol::Phase> phases{protocol::Phase::Baseline, protocol::Phase::AlicePerturb,
                                      protocol::Phase::BobPerturb};

  bool active(std::uint64_t round_k, protocol::Phase phase) const;
};

struct NoiseConfig {
  double sigma_u = 0.0;
  double sigma_i = 0.0;

  bool enabled() const noexcept { return sigma_u > 0.0 || sigma_i > 0.0; }
};

struct ExperimentConfig {
  PaletteSet palettes{Palette({1}), Palette({1}), Palette({1}), Palette({0}), Palette({0})};
  std::uint64_t rounds = 1;
  circuit::Voltage delta_u_a{1};
  circuit::Voltage delta_u_b{1};
  Mode mode = Mode::Circuit;
  std::optional<BigInt> modulus;
  NoiseConfig noise;
  std::optional<InjectionScenario> attack;
  Compromise compromise = Compromise::None;
  std::uint64_t seed = 0;
  Sampling sampling = Sampling::Full;
  std::optional<Rational> secret_rs;               // drawn from P_S when absent
  std::optional<std::vector<std::uint8_t>> auth_key;  // drawn from the seed when absent
  std::string mac_digest = "SHA256";
  Rational defense_tolerance = 0;
  TransportKind transport = TransportKind::Memory;
  std::uint64_t entropy_cap = std::uint64_t{1} << 16;  // largest |P_S| we enumerate
};

// Throws ConfigInvalid listing every offending field.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

// Applies KEXLAB_SEED when set (ConfigInvalid if it is not a u64).
void apply_environment(ExperimentConfig& config);

// Stable textual form: one "key = value" line per schema key, sorted.
std::string canonical_text(const ExperimentConfig& config);
std::string config_hash(const ExperimentConfig& config);

}  // namespace kexlab
