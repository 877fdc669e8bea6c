#include "kexlab/simulation.hpp"

#include "kexlab/errors.hpp"

#include <set>

namespace kexlab::simulation {

Rational shared_rs(const ExperimentConfig& config) {
  if (config.secret_rs) return *config.secret_rs;
  Rng rng(derive_seed(config.seed, {kSharedSecretStream}));
  return config.palettes.p_s[uniform_index(rng, config.palettes.p_s.size())];
}

std::vector<std::uint8_t> auth_key(const ExperimentConfig& config) {
  if (config.auth_key) return *config.auth_key;
  Rng rng(derive_seed(config.seed, {kAuthKeyStream}));
  std::vector<std::uint8_t> key(32);
  for (auto& b : key) b = static_cast<std::uint8_t>(rng() >> 56);
  return key;
}

Palette interior_palette(const Palette& palette, const Palette& p_s) {
  std::set<Rational> shifts;
  for (const auto& s : p_s.values())
    for (const auto& s2 : p_s.values()) shifts.insert(s - s2);
  std::vector<Rational> keep;
  for (const auto& v : palette.values()) {
    bool inside = true;
    for (const auto& d : shifts) {
      if (!palette.contains(v + d)) {
        inside = false;
        break;
      }
    }
    if (inside) keep.push_back(v);
  }
  if (keep.empty()) throw Error(Errc::InvalidArgument, "palette has no interior with respect to P_S");
  return Palette(std::move(keep));
}

namespace {

Palette draw_palette(const ExperimentConfig& config, const Palette& full, const char* field) {
  if (config.sampling == Sampling::Full) return full;
  try {
    return interior_palette(full, config.palettes.p_s);
  } catch (const Error& e) {
    throw ConfigInvalid(std::vector<FieldDiagnostic>{{field, e.what()}});
  }
}

}  // namespace

Palette draw_palette_a(const ExperimentConfig& config) { return draw_palette(config, config.palettes.p_a, "palette.ra"); }

Palette draw_palette_b(const ExperimentConfig& config) { return draw_palette(config, config.palettes.p_b, "palette.rb"); }

Rng party_rng(const ExperimentConfig& config, protocol::Role role) {
  return Rng(derive_seed(config.seed, {role == protocol::Role::Alice ? kAliceStream : kBobStream}));
}

}  // namespace kexlab::simulation
