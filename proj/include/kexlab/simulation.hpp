#pragma once

// Seeded choices shared by every driver of an experiment, so that the
// harness and the analyses see the same secrets for the same seed.

#include "kexlab/config.hpp"
#include "kexlab/protocol.hpp"
#include "kexlab/random.hpp"

#include <cstdint>
#include <vector>

namespace kexlab::simulation {

enum Stream : std::uint64_t {
  kSharedSecretStream = 1,
  kAuthKeyStream = 2,
  kAliceStream = 3,
  kBobStream = 4,
  kNoiseStream = 5,
};

// config.secret_rs when set, otherwise a uniform draw from P_S.
Rational shared_rs(const ExperimentConfig& config);

// config.auth_key when set, otherwise 32 seeded bytes.
std::vector<std::uint8_t> auth_key(const ExperimentConfig& config);

// Values v of `palette` with v + (s - s') in `palette` for every s, s' in
// `p_s`: drawing from this subset never lets palette edges eliminate a
// candidate shared secret.
Palette interior_palette(const Palette& palette, const Palette& p_s);

// Palettes the parties actually draw resistances from (the full public
// palettes, or their interiors under Sampling::Interior). Throws
// ConfigInvalid when the interior is empty.
Palette draw_palette_a(const ExperimentConfig& config);
Palette draw_palette_b(const ExperimentConfig& config);

Rng party_rng(const ExperimentConfig& config, protocol::Role role);

}  // namespace kexlab::simulation
