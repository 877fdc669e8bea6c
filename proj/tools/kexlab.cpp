// kexlab: command-line front end for the key exchange laboratory.
//
// Every subcommand prints JSON report lines followed by a human summary
// (lines starting with "# ") and exits 0 on success, 1 on an alarm or a
// failed check, 2 on bad input.

#include "kexlab/errors.hpp"
#include "kexlab/experiment.hpp"
#include "kexlab/expander.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <iostream>
#include <sstream>

using namespace kexlab;
using json = nlohmann::ordered_json;

namespace {

constexpr int kOk = 0;
constexpr int kAlarm = 1;
constexpr int kBadInput = 2;

void emit(const json& j) { std::cout << j.dump() << '\n'; }

void human(const std::string& text) {
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) std::cout << "# " << line << '\n';
}

ExperimentConfig load_with_overrides(const std::string& path, const std::optional<std::uint64_t>& seed) {
  auto cfg = load_config(path);
  apply_environment(cfg);
  if (seed) cfg.seed = *seed;
  return cfg;
}

// Palettes come from any config file; only its palette, mode and modulus
// keys matter here.
PaletteSet load_palettes(const std::string& path) { return load_config(path).palettes; }

int run_and_report(const ExperimentConfig& cfg, const std::optional<std::string>& out_dir) {
  auto result = experiment::run_experiment(cfg);
  if (out_dir) experiment::write_outputs(result, *out_dir);
  for (const auto& r : experiment::report_records(result)) emit(r);
  human(experiment::summary(result));
  return result.alarm ? kAlarm : kOk;
}

json crack_json(const eve::CrackResult& crack) {
  json j;
  j["record"] = "crack";
  j["complete"] = crack.complete;
  j["key"] = crack.key.bits.to_string();
  j["bits"] = crack.key.bits.size();
  json rounds = json::array();
  for (const auto& r : crack.rounds) {
    json x;
    x["round"] = r.round_k;
    x["r_a"] = format_rational(r.r_a);
    x["r_b"] = format_rational(r.r_b);
    if (r.u_a) x["u_a"] = format_rational(*r.u_a);
    if (r.u_b) x["u_b"] = format_rational(*r.u_b);
    rounds.push_back(std::move(x));
  }
  j["rounds"] = std::move(rounds);
  return j;
}

json posterior_json(const entropy::PosteriorReport& p) {
  json j;
  j["record"] = "posterior";
  j["rounds_used"] = p.rounds_used;
  j["candidates"] = p.candidates.size();
  j["consistent"] = p.consistent_count();
  j["h_rs_bits"] = p.h_rs_bits;
  j["h_key_bits"] = p.h_key_bits;
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kexlab: resistive key exchange laboratory"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "Run an experiment from a config file");
  std::string run_config;
  std::optional<std::uint64_t> run_seed;
  std::optional<std::string> run_out;
  run->add_option("--config", run_config, "Config file")->required();
  run->add_option("--seed", run_seed, "Seed (overrides KEXLAB_SEED and the config)");
  run->add_option("--out", run_out, "Directory for transcript.jsonl and report.jsonl");

  // crack
  auto* crack = app.add_subcommand("crack", "Recover every key bit from a transcript given R_S");
  std::string crack_transcript, crack_rs, crack_palettes;
  crack->add_option("--transcript", crack_transcript, "Transcript file (JSON lines)")->required();
  crack->add_option("--rs", crack_rs, "Shared secret R_S as a rational")->required();
  crack->add_option("--palettes", crack_palettes, "Config file holding the public palettes")->required();

  // entropy
  auto* ent = app.add_subcommand("entropy", "Eve's posterior over R_S from a transcript");
  std::string ent_transcript, ent_palettes;
  bool per_round = false;
  ent->add_option("--transcript", ent_transcript, "Transcript file (JSON lines)")->required();
  ent->add_option("--palettes", ent_palettes, "Config file holding the public palettes")->required();
  ent->add_flag("--per-round", per_round, "Report after every prefix of rounds");

  // expander
  auto* exp = app.add_subcommand("expander", "Run the arithmetic key expander");
  std::string exp_rs;
  std::optional<std::string> exp_modulus;
  std::uint64_t exp_count = 0;
  std::uint64_t exp_seed = 0;
  std::uint64_t exp_range = 1000;
  std::vector<std::string> exp_values;
  exp->add_option("--rs", exp_rs, "Shared secret (integer)")->required();
  exp->add_option("--modulus", exp_modulus, "Reduce modulo q");
  exp->add_option("--count", exp_count, "Rounds to draw")->required();
  exp->add_option("--seed", exp_seed, "Seed for the drawn randoms");
  exp->add_option("--range", exp_range, "Plain mode: randoms drawn from [0, range)");
  exp->add_option("--values", exp_values, "Alice's randoms, instead of drawing them");

  // inject
  auto* inj = app.add_subcommand("inject", "Run a current-injection attack against the defense");
  std::string inj_config, inj_current;
  std::optional<std::string> inj_compromise;
  std::optional<std::uint64_t> inj_seed;
  inj->add_option("--config", inj_config, "Config file")->required();
  inj->add_option("--current", inj_current, "Injected current in amperes (rational)")->required();
  inj->add_option("--compromise", inj_compromise, "none, rs-before, rs-after or rs-and-authkey");
  inj->add_option("--seed", inj_seed, "Seed (overrides KEXLAB_SEED and the config)");

  // verify-transcript
  auto* ver = app.add_subcommand("verify-transcript", "Check that a transcript file is well formed");
  std::string ver_path;
  ver->add_option("path", ver_path, "Transcript file to check")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return run_and_report(load_with_overrides(run_config, run_seed), run_out);

    if (*crack) {
      const auto file = io::load_transcript(crack_transcript);
      const auto result = experiment::crack_transcript(file, parse_rational(crack_rs), load_palettes(crack_palettes));
      emit(crack_json(result));
      human("recovered " + std::to_string(result.key.bits.size()) + " key bit(s) over " +
            std::to_string(result.rounds.size()) + " round(s)" + (result.complete ? "" : " (incomplete transcript)"));
      return result.complete ? kOk : kAlarm;
    }

    if (*ent) {
      const auto file = io::load_transcript(ent_transcript);
      const auto pal = load_palettes(ent_palettes);
      const auto rounds = experiment::transcript_round_count(file);
      std::ostringstream text;
      for (std::uint64_t k = per_round ? 0 : rounds; k <= rounds; ++k) {
        const auto p = experiment::transcript_posterior(file, pal, k);
        emit(posterior_json(p));
        text << "after " << k << " round(s): H(R_S) = " << p.h_rs_bits << " bits, H(key) = " << p.h_key_bits
             << " bits, " << p.consistent_count() << " of " << p.candidates.size() << " candidates left\n";
      }
      human(text.str());
      return kOk;
    }

    if (*exp) {
      const Rational rs = parse_rational(exp_rs);
      if (!is_integer(rs)) throw Error(Errc::InvalidArgument, "--rs must be an integer");
      std::optional<BigInt> q;
      if (exp_modulus) {
        const Rational qr = parse_rational(*exp_modulus);
        if (!is_integer(qr)) throw Error(Errc::InvalidArgument, "--modulus must be an integer");
        q = boost::multiprecision::numerator(qr);
      }
      const BigInt s = boost::multiprecision::numerator(rs);

      std::vector<BigInt> randoms;
      if (!exp_values.empty()) {
        for (const auto& v : exp_values) {
          const Rational r = parse_rational(v);
          if (!is_integer(r)) throw Error(Errc::InvalidArgument, "--values must be integers");
          randoms.push_back(boost::multiprecision::numerator(r));
        }
      } else {
        if (q && *q > std::numeric_limits<std::uint64_t>::max())
          throw Error(Errc::OutOfRange, "modulus too large to draw from");
        const std::uint64_t range = q ? q->convert_to<std::uint64_t>() : exp_range;
        if (range == 0) throw Error(Errc::InvalidArgument, "--range must be positive");
        Rng rng(exp_seed);
        for (std::uint64_t i = 0; i < exp_count; ++i) randoms.push_back(BigInt(uniform_index(rng, range)));
      }

      const auto msg = expander::expand(s, randoms, q);
      const auto back = expander::recover_partner_randoms(msg, s, q);
      json j;
      j["record"] = "expander";
      j["modulus"] = q ? json(q->str()) : json(nullptr);
      json in = json::array(), out = json::array();
      for (const auto& r : randoms) in.push_back(r.str());
      for (const auto& x : msg.x_list) out.push_back(x.str());
      j["randoms"] = std::move(in);
      j["x"] = std::move(out);
      j["round_trip"] = back == randoms;
      emit(j);
      human("expanded " + std::to_string(randoms.size()) + " value(s); round trip " +
            (back == randoms ? "exact" : "FAILED"));
      return back == randoms ? kOk : kAlarm;
    }

    if (*inj) {
      auto cfg = load_with_overrides(inj_config, inj_seed);
      if (cfg.mode != Mode::Circuit) throw Error(Errc::InvalidArgument, "injection needs mode = circuit");
      InjectionScenario scenario = cfg.attack.value_or(InjectionScenario{});
      scenario.i_inject = circuit::Current(parse_rational(inj_current));
      cfg.attack = scenario;
      if (inj_compromise) {
        auto c = parse_compromise(*inj_compromise);
        if (!c) throw Error(Errc::InvalidArgument, "unknown compromise '" + *inj_compromise + "'");
        cfg.compromise = *c;
      }
      return run_and_report(cfg, std::nullopt);
    }

    if (*ver) {
      const auto file = io::load_transcript(ver_path);
      json j;
      j["record"] = "verify";
      j["ok"] = true;
      j["mode"] = std::string(to_string(file.mode));
      j["config_hash"] = file.config_hash;
      j["samples"] = file.analog.size();
      j["expander_messages"] = file.expander.size();
      j["rounds"] = experiment::transcript_round_count(file);
      emit(j);
      human("transcript is well formed");
      return kOk;
    }
  } catch (const FormatError& e) {
    emit(json{{"record", "error"}, {"kind", "FormatError"}, {"record_index", e.record_index()}, {"message", e.what()}});
    human(std::string("error: ") + e.what());
    return kBadInput;
  } catch (const ConfigInvalid& e) {
    json diags = json::array();
    for (const auto& d : e.diagnostics()) diags.push_back({{"field", d.field}, {"message", d.message}});
    emit(json{{"record", "error"}, {"kind", "ConfigInvalid"}, {"diagnostics", diags}});
    human(std::string("error: ") + e.what());
    return kBadInput;
  } catch (const Error& e) {
    emit(json{{"record", "error"}, {"kind", std::string(to_string(e.code()))}, {"message", e.what()}});
    human(std::string("error: ") + e.what());
    return kAlarm;
  } catch (const std::exception& e) {
    emit(json{{"record", "error"}, {"kind", "exception"}, {"message", e.what()}});
    human(std::string("error: ") + e.what());
    return kBadInput;
  }
  return kOk;
}
