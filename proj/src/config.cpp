#include "kexlab/config.hpp"

#include "kexlab/crypto.hpp"
#include "kexlab/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace kexlab {

std::string_view to_string(Mode m) noexcept {
  switch (m) {
    case Mode::Circuit: return "circuit";
    case Mode::ExpanderPlain: return "expander-plain";
    case Mode::ExpanderModular: return "expander-modular";
  }
  return "?";
}

std::string_view to_string(Compromise c) noexcept {
  switch (c) {
    case Compromise::None: return "none";
    case Compromise::RsBefore: return "rs-before";
    case Compromise::RsAfter: return "rs-after";
    case Compromise::RsAndAuthKey: return "rs-and-authkey";
  }
  return "?";
}

std::string_view to_string(Sampling s) noexcept { return s == Sampling::Full ? "full" : "interior"; }

std::string_view to_string(TransportKind t) noexcept { return t == TransportKind::Memory ? "memory" : "socket"; }

std::optional<Compromise> parse_compromise(std::string_view text) noexcept {
  for (auto c : {Compromise::None, Compromise::RsBefore, Compromise::RsAfter, Compromise::RsAndAuthKey})
    if (to_string(c) == text) return c;
  return std::nullopt;
}

bool InjectionScenario::active(std::uint64_t round_k, protocol::Phase phase) const {
  if (i_inject.value() == 0) return false;
  const bool round_ok =
      active_rounds.empty() || std::find(active_rounds.begin(), active_rounds.end(), round_k) != active_rounds.end();
  return round_ok && std::find(phases.begin(), phases.end(), phase) != phases.end();
}

namespace {

enum class KeyType { Int, UintList, Rational, RationalList, Real, Enum, Hex, String };

const std::map<std::string, KeyType, std::less<>>& schema() {
  static const std::map<std::string, KeyType, std::less<>> s = {
      {"palette.rs", KeyType::RationalList},
      {"palette.ra", KeyType::RationalList},
      {"palette.rb", KeyType::RationalList},
      {"palette.ua", KeyType::RationalList},
      {"palette.ub", KeyType::RationalList},
      {"rounds", KeyType::Int},
      {"delta.ua", KeyType::Rational},
      {"delta.ub", KeyType::Rational},
      {"mode", KeyType::Enum},
      {"modulus", KeyType::Int},
      {"noise.sigma_u", KeyType::Real},
      {"noise.sigma_i", KeyType::Real},
      {"attack.current", KeyType::Rational},
      {"attack.rounds", KeyType::UintList},
      {"attack.phases", KeyType::Enum},
      {"compromise", KeyType::Enum},
      {"seed", KeyType::Int},
      {"sampling", KeyType::Enum},
      {"secret.rs", KeyType::Rational},
      {"auth.key", KeyType::Hex},
      {"auth.mac", KeyType::String},
      {"auth.tolerance", KeyType::Rational},
      {"transport", KeyType::Enum},
      {"entropy.cap", KeyType::Int},
  };
  return s;
}

std::string_view type_name(KeyType t) {
  switch (t) {
    case KeyType::Int: return "int";
    case KeyType::UintList: return "uint-list";
    case KeyType::Rational: return "rational";
    case KeyType::RationalList: return "rational-list";
    case KeyType::Real: return "real";
    case KeyType::Enum: return "enum";
    case KeyType::Hex: return "hex";
    case KeyType::String: return "string";
  }
  return "?";
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  while (true) {
    auto comma = s.find(',');
    auto item = trim(s.substr(0, comma));
    if (!item.empty()) out.push_back(item);
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

std::optional<std::uint64_t> parse_u64(std::string_view s) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

class Collector {
 public:
  void fail(std::string field, std::string message) { diags_.push_back({std::move(field), std::move(message)}); }
  bool ok() const { return diags_.empty(); }
  std::vector<FieldDiagnostic> take() { return std::move(diags_); }

 private:
  std::vector<FieldDiagnostic> diags_;
};

std::string join_rationals(const std::vector<Rational>& values) {
  std::string out;
  for (const auto& v : values) {
    if (!out.empty()) out += ", ";
    out += format_rational(v);
  }
  return out;
}

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

ExperimentConfig parse_config(std::string_view text) {
  Collector diag;
  std::map<std::string, std::string, std::less<>> raw;

  std::size_t line_no = 0;
  for (std::string_view rest = text; !rest.empty();) {
    auto nl = rest.find('\n');
    std::string_view line = rest.substr(0, nl);
    rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      diag.fail("line " + std::to_string(line_no), "expected 'key = value'");
      continue;
    }
    std::string_view key = trim(line.substr(0, eq));
    std::string_view value = trim(line.substr(eq + 1));
    std::string_view annotated;
    if (auto colon = key.find(':'); colon != std::string_view::npos) {
      annotated = trim(key.substr(colon + 1));
      key = trim(key.substr(0, colon));
    }
    auto it = schema().find(key);
    if (it == schema().end()) {
      diag.fail(std::string(key), "unknown key");
      continue;
    }
    if (!annotated.empty() && annotated != type_name(it->second)) {
      diag.fail(std::string(key), "declared type '" + std::string(annotated) + "' but the key is of type '" +
                                      std::string(type_name(it->second)) + "'");
      continue;
    }
    if (raw.count(key)) {
      diag.fail(std::string(key), "duplicate key");
      continue;
    }
    raw.emplace(std::string(key), std::string(value));
  }

  auto get = [&](std::string_view key) -> std::optional<std::string> {
    auto it = raw.find(key);
    if (it == raw.end()) return std::nullopt;
    return it->second;
  };
  auto get_rational = [&](std::string_view key) -> std::optional<Rational> {
    auto v = get(key);
    if (!v) return std::nullopt;
    try {
      return parse_rational(*v);
    } catch (const std::exception& e) {
      diag.fail(std::string(key), e.what());
      return std::nullopt;
    }
  };
  auto get_u64 = [&](std::string_view key) -> std::optional<std::uint64_t> {
    auto v = get(key);
    if (!v) return std::nullopt;
    auto n = parse_u64(*v);
    if (!n) diag.fail(std::string(key), "expected a non-negative 64-bit integer, got '" + *v + "'");
    return n;
  };
  auto get_real = [&](std::string_view key) -> std::optional<double> {
    auto v = get(key);
    if (!v) return std::nullopt;
    char* end = nullptr;
    double d = std::strtod(v->c_str(), &end);
    if (v->empty() || end != v->c_str() + v->size() || !std::isfinite(d)) {
      diag.fail(std::string(key), "expected a finite real, got '" + *v + "'");
      return std::nullopt;
    }
    return d;
  };
  auto get_list = [&](std::string_view key) -> std::optional<std::vector<Rational>> {
    auto v = get(key);
    if (!v) return std::nullopt;
    std::vector<Rational> out;
    for (auto item : split_list(*v)) {
      try {
        out.push_back(parse_rational(item));
      } catch (const std::exception& e) {
        diag.fail(std::string(key), e.what());
        return std::nullopt;
      }
    }
    if (out.empty()) {
      diag.fail(std::string(key), "empty list");
      return std::nullopt;
    }
    return out;
  };

  ExperimentConfig cfg;

  if (auto m = get("mode")) {
    if (*m == "circuit") cfg.mode = Mode::Circuit;
    else if (*m == "expander-plain") cfg.mode = Mode::ExpanderPlain;
    else if (*m == "expander-modular") cfg.mode = Mode::ExpanderModular;
    else diag.fail("mode", "expected circuit, expander-plain or expander-modular, got '" + *m + "'");
  }
  if (auto q = get_u64("modulus")) {
    if (*q < 2) diag.fail("modulus", "must be at least 2");
    else cfg.modulus = BigInt(*q);
  }
  if (cfg.mode == Mode::ExpanderModular && !cfg.modulus) diag.fail("modulus", "required in expander-modular mode");
  if (cfg.mode != Mode::ExpanderModular && cfg.modulus) diag.fail("modulus", "only valid in expander-modular mode");

  auto make_palette = [&](std::string_view key, bool positive, bool integer,
                          const std::optional<Palette>& fallback) -> std::optional<Palette> {
    auto values = get_list(key);
    if (!values) {
      if (!get(key) && !fallback) diag.fail(std::string(key), "required");
      return fallback;
    }
    try {
      Palette p = positive ? Palette::resistances(*values) : Palette(*values);
      if (integer && !std::all_of(p.values().begin(), p.values().end(), [](const Rational& r) { return is_integer(r); }))
        throw Error(Errc::InvalidArgument, "expander palettes must be integers");
      return p;
    } catch (const Error& e) {
      diag.fail(std::string(key), e.what());
      return std::nullopt;
    }
  };

  const bool circuit = cfg.mode == Mode::Circuit;
  const bool modular = cfg.mode == Mode::ExpanderModular;
  std::optional<Palette> zero_palette = Palette({0});
  auto p_s = make_palette("palette.rs", circuit, !circuit, std::nullopt);
  std::optional<Palette> p_a, p_b;
  if (modular) {
    if (get("palette.ra") || get("palette.rb"))
      diag.fail("palette.ra", "expander-modular mode always uses the residues [0, modulus)");
    if (cfg.modulus && *cfg.modulus <= (std::uint64_t{1} << 24)) {
      p_a = Palette::range(cfg.modulus->convert_to<std::uint64_t>());
      p_b = p_a;
    } else if (cfg.modulus) {
      diag.fail("modulus", "at most 2^24 in this build");
    }
  } else {
    p_a = make_palette("palette.ra", circuit, !circuit, std::nullopt);
    p_b = make_palette("palette.rb", circuit, !circuit, std::nullopt);
  }
  auto p_ua = make_palette("palette.ua", false, false, circuit ? std::nullopt : zero_palette);
  auto p_ub = make_palette("palette.ub", false, false, circuit ? std::nullopt : zero_palette);
  if (modular && p_s && cfg.modulus) {
    if (p_s->values().front() < 0 || p_s->values().back() >= Rational(*cfg.modulus))
      diag.fail("palette.rs", "values must lie in [0, modulus)");
  }
  if (p_s && p_a && p_b && p_ua && p_ub) cfg.palettes = {*p_s, *p_a, *p_b, *p_ua, *p_ub};

  if (auto r = get_u64("rounds")) cfg.rounds = *r;
  if (auto d = get_rational("delta.ua")) {
    if (*d == 0) diag.fail("delta.ua", "must be nonzero");
    else cfg.delta_u_a = circuit::Voltage(*d);
  }
  if (auto d = get_rational("delta.ub")) {
    if (*d == 0) diag.fail("delta.ub", "must be nonzero");
    else cfg.delta_u_b = circuit::Voltage(*d);
  }

  if (auto s = get_real("noise.sigma_u")) {
    if (*s < 0) diag.fail("noise.sigma_u", "must be non-negative");
    else cfg.noise.sigma_u = *s;
  }
  if (auto s = get_real("noise.sigma_i")) {
    if (*s < 0) diag.fail("noise.sigma_i", "must be non-negative");
    else cfg.noise.sigma_i = *s;
  }
  if (cfg.noise.enabled() && !circuit) diag.fail("noise.sigma_u", "noise applies to circuit mode only");

  if (auto i = get_rational("attack.current")) {
    if (*i == 0) diag.fail("attack.current", "must be nonzero for an active scenario");
    else if (!circuit) diag.fail("attack.current", "injection applies to circuit mode only");
    else cfg.attack = InjectionScenario{circuit::Current(*i), {}, {}};
  }
  if (auto rounds = get("attack.rounds")) {
    std::vector<std::uint64_t> list;
    for (auto item : split_list(*rounds)) {
      if (auto n = parse_u64(item)) list.push_back(*n);
      else diag.fail("attack.rounds", "bad round index '" + std::string(item) + "'");
    }
    if (cfg.attack) cfg.attack->active_rounds = std::move(list);
    else diag.fail("attack.rounds", "requires attack.current");
  }
  std::vector<protocol::Phase> phases{protocol::Phase::Baseline, protocol::Phase::AlicePerturb,
                                      protocol::Phase::BobPerturb};
  if (auto ph = get("attack.phases")) {
    phases.clear();
    for (auto item : split_list(*ph)) {
      if (auto p = protocol::parse_phase(item)) phases.push_back(*p);
      else diag.fail("attack.phases", "unknown phase '" + std::string(item) + "'");
    }
    if (!cfg.attack) diag.fail("attack.phases", "requires attack.current");
  }
  if (cfg.attack) cfg.attack->phases = phases;

  if (auto c = get("compromise")) {
    if (auto parsed = parse_compromise(*c)) cfg.compromise = *parsed;
    else diag.fail("compromise", "expected none, rs-before, rs-after or rs-and-authkey");
  }
  if (auto s = get_u64("seed")) cfg.seed = *s;
  if (auto s = get("sampling")) {
    if (*s == "full") cfg.sampling = Sampling::Full;
    else if (*s == "interior") cfg.sampling = Sampling::Interior;
    else diag.fail("sampling", "expected full or interior");
  }
  if (auto rs = get_rational("secret.rs")) {
    if (p_s && !p_s->contains(*rs)) diag.fail("secret.rs", "not a member of palette.rs");
    else cfg.secret_rs = *rs;
  }
  if (auto k = get("auth.key")) {
    try {
      auto bytes = crypto::from_hex(*k);
      if (bytes.size() < 16) diag.fail("auth.key", "must be at least 16 bytes");
      else cfg.auth_key = std::move(bytes);
    } catch (const Error& e) {
      diag.fail("auth.key", e.what());
    }
  }
  if (auto m = get("auth.mac")) {
    cfg.mac_digest = *m;
    try {
      const std::uint8_t key[16] = {};
      crypto::keyed_tag(cfg.mac_digest, key, {});
    } catch (const Error&) {
      diag.fail("auth.mac", "unsupported digest '" + *m + "'");
    }
  }
  if (auto t = get_rational("auth.tolerance")) {
    if (*t < 0) diag.fail("auth.tolerance", "must be non-negative");
    else cfg.defense_tolerance = *t;
  }
  if (auto t = get("transport")) {
    if (*t == "memory") cfg.transport = TransportKind::Memory;
    else if (*t == "socket") cfg.transport = TransportKind::Socket;
    else diag.fail("transport", "expected memory or socket");
  }
  if (auto c = get_u64("entropy.cap")) cfg.entropy_cap = *c;

  // Endpoint differences carry two independent errors: sigma * sqrt(2).
  if (cfg.noise.enabled()) {
    const double floor = 6.0 * std::sqrt(2.0) * std::max(cfg.noise.sigma_u, cfg.noise.sigma_i);
    if (to_double(cfg.defense_tolerance) < floor)
      diag.fail("auth.tolerance", "must be at least 6 x propagated sigma (" + format_real(floor) + ") when noise is on");
  }

  if (!diag.ok()) throw ConfigInvalid(diag.take());
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigInvalid(std::vector<FieldDiagnostic>{{path.string(), "cannot open config file"}});
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void apply_environment(ExperimentConfig& config) {
  if (const char* env = std::getenv("KEXLAB_SEED")) {
    auto v = parse_u64(env);
    if (!v) throw ConfigInvalid(std::vector<FieldDiagnostic>{{"KEXLAB_SEED", "expected a non-negative 64-bit integer"}});
    config.seed = *v;
  }
}

std::string canonical_text(const ExperimentConfig& c) {
  std::map<std::string, std::string> kv;
  const bool modular = c.mode == Mode::ExpanderModular;
  kv["palette.rs"] = join_rationals(c.palettes.p_s.values());
  if (!modular) {
    kv["palette.ra"] = join_rationals(c.palettes.p_a.values());
    kv["palette.rb"] = join_rationals(c.palettes.p_b.values());
  }
  kv["palette.ua"] = join_rationals(c.palettes.p_ua.values());
  kv["palette.ub"] = join_rationals(c.palettes.p_ub.values());
  kv["rounds"] = std::to_string(c.rounds);
  kv["delta.ua"] = format_rational(c.delta_u_a.value());
  kv["delta.ub"] = format_rational(c.delta_u_b.value());
  kv["mode"] = std::string(to_string(c.mode));
  if (c.modulus) kv["modulus"] = c.modulus->str();
  kv["noise.sigma_u"] = format_real(c.noise.sigma_u);
  kv["noise.sigma_i"] = format_real(c.noise.sigma_i);
  if (c.attack) {
    kv["attack.current"] = format_rational(c.attack->i_inject.value());
    std::string rounds, phases;
    for (auto r : c.attack->active_rounds) rounds += (rounds.empty() ? "" : ", ") + std::to_string(r);
    for (auto p : c.attack->phases) phases += (phases.empty() ? "" : ", ") + std::string(protocol::to_string(p));
    kv["attack.rounds"] = rounds;
    kv["attack.phases"] = phases;
  }
  kv["compromise"] = std::string(to_string(c.compromise));
  kv["seed"] = std::to_string(c.seed);
  kv["sampling"] = std::string(to_string(c.sampling));
  if (c.secret_rs) kv["secret.rs"] = format_rational(*c.secret_rs);
  if (c.auth_key) kv["auth.key"] = crypto::to_hex(*c.auth_key);
  kv["auth.mac"] = c.mac_digest;
  kv["auth.tolerance"] = format_rational(c.defense_tolerance);
  kv["transport"] = std::string(to_string(c.transport));
  kv["entropy.cap"] = std::to_string(c.entropy_cap);

  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

std::string config_hash(const ExperimentConfig& config) { return crypto::sha256_hex(canonical_text(config)); }

}  // namespace kexlab
