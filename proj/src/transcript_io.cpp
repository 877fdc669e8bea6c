#include "kexlab/transcript_io.hpp"

#include "kexlab/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>

namespace kexlab::io {

using json = nlohmann::ordered_json;

namespace {

std::optional<Mode> parse_mode(const std::string& s) {
  for (auto m : {Mode::Circuit, Mode::ExpanderPlain, Mode::ExpanderModular})
    if (to_string(m) == s) return m;
  return std::nullopt;
}

json modulus_json(const std::optional<BigInt>& q) { return q ? json(q->str()) : json(nullptr); }

BigInt parse_bigint(const json& j, std::size_t index, const char* field) {
  if (!j.is_string()) throw FormatError(index, std::string(field) + " must be a decimal string");
  const auto s = j.get<std::string>();
  try {
    Rational r = parse_rational(s);
    if (!is_integer(r) || s.find_first_of("/.eE") != std::string::npos) throw std::invalid_argument("not an integer");
    return boost::multiprecision::numerator(r);
  } catch (const std::exception&) {
    throw FormatError(index, std::string(field) + " is not an integer: '" + s + "'");
  }
}

Rational parse_exact(const json& j, std::size_t index, const char* field) {
  if (!j.is_string()) throw FormatError(index, std::string(field) + " must be a \"n/d\" string");
  const auto s = j.get<std::string>();
  if (s.find('/') == std::string::npos) throw FormatError(index, std::string(field) + " must be written as n/d");
  try {
    Rational r = parse_rational(s);
    if (format_rational(r) != s) throw std::invalid_argument("not in lowest terms");
    return r;
  } catch (const std::exception& e) {
    throw FormatError(index, std::string(field) + ": " + e.what());
  }
}

std::optional<BigInt> parse_modulus(const json& j, std::size_t index) {
  if (j.is_null()) return std::nullopt;
  return parse_bigint(j, index, "modulus");
}

std::uint64_t get_u64(const json& rec, const char* field, std::size_t index) {
  if (!rec.contains(field) || !rec[field].is_number_unsigned())
    throw FormatError(index, std::string("missing or non-integer field '") + field + "'");
  return rec[field].get<std::uint64_t>();
}

}  // namespace

void write_transcript(std::ostream& out, const TranscriptFile& file) {
  // Merge both record kinds on the shared timeline.
  std::vector<std::pair<std::uint64_t, json>> body;
  for (const auto& e : file.analog.entries()) {
    json r;
    r["record"] = "sample";
    r["round"] = e.round_k;
    r["phase"] = std::string(protocol::to_string(e.phase));
    r["u_c"] = format_rational(e.observation.u_c.value());
    r["i_c"] = format_rational(e.observation.i_c.value());
    r["t"] = e.t;
    body.emplace_back(e.t, std::move(r));
  }
  for (const auto& rec : file.expander) {
    json r;
    r["record"] = "expander";
    r["sender"] = std::string(protocol::to_string(rec.message.sender));
    r["k_first"] = rec.message.k_first;
    r["modulus"] = modulus_json(rec.message.modulus);
    json xs = json::array();
    for (const auto& x : rec.message.x_list) xs.push_back(x.str());
    r["x"] = std::move(xs);
    r["t"] = rec.t;
    body.emplace_back(rec.t, std::move(r));
  }
  std::stable_sort(body.begin(), body.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

  json header;
  header["record"] = "header";
  header["format"] = "kexlab-transcript";
  header["version"] = kTranscriptVersion;
  header["config_hash"] = file.config_hash;
  header["mode"] = std::string(to_string(file.mode));
  header["modulus"] = modulus_json(file.modulus);
  header["records"] = body.size();
  out << header.dump() << '\n';
  for (const auto& [t, r] : body) out << r.dump() << '\n';
}

std::string to_text(const TranscriptFile& file) {
  std::ostringstream ss;
  write_transcript(ss, file);
  return ss.str();
}

TranscriptFile parse_transcript(const std::string& text) {
  TranscriptFile file;
  std::size_t index = 0;
  std::size_t pos = 0;
  std::optional<std::uint64_t> declared;
  std::optional<std::uint64_t> last_t;

  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    if (nl == std::string::npos) throw FormatError(index, "truncated record (no line terminator)");
    const std::string line = text.substr(pos, nl - pos);
    pos = nl + 1;

    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception& e) {
      throw FormatError(index, std::string("malformed record: ") + e.what());
    }
    if (!rec.is_object() || !rec.contains("record") || !rec["record"].is_string())
      throw FormatError(index, "record kind missing");
    const auto kind = rec["record"].get<std::string>();

    if (index == 0) {
      if (kind != "header") throw FormatError(index, "first record must be the header");
      if (rec.value("format", "") != "kexlab-transcript") throw FormatError(index, "unknown format");
      if (rec.value("version", -1) != kTranscriptVersion) throw FormatError(index, "unsupported version");
      if (!rec.contains("config_hash") || !rec["config_hash"].is_string())
        throw FormatError(index, "config_hash missing");
      file.config_hash = rec["config_hash"].get<std::string>();
      auto mode = rec.contains("mode") && rec["mode"].is_string() ? parse_mode(rec["mode"].get<std::string>())
                                                                  : std::nullopt;
      if (!mode) throw FormatError(index, "bad mode");
      file.mode = *mode;
      file.modulus = parse_modulus(rec.value("modulus", json(nullptr)), index);
      declared = get_u64(rec, "records", index);
      ++index;
      continue;
    }

    const std::uint64_t t = get_u64(rec, "t", index);
    if (last_t && t <= *last_t) throw FormatError(index, "timeline must strictly increase");
    last_t = t;

    if (kind == "sample") {
      protocol::TranscriptEntry e;
      e.round_k = get_u64(rec, "round", index);
      auto phase = rec.contains("phase") && rec["phase"].is_string()
                       ? protocol::parse_phase(rec["phase"].get<std::string>())
                       : std::nullopt;
      if (!phase) throw FormatError(index, "bad phase");
      e.phase = *phase;
      if (!rec.contains("u_c") || !rec.contains("i_c")) throw FormatError(index, "missing u_c or i_c");
      e.observation.u_c = circuit::Voltage(parse_exact(rec["u_c"], index, "u_c"));
      e.observation.i_c = circuit::Current(parse_exact(rec["i_c"], index, "i_c"));
      e.t = t;
      try {
        file.analog.append(std::move(e));
      } catch (const Error& err) {
        throw FormatError(index, err.what());
      }
    } else if (kind == "expander") {
      ExpanderRecord r;
      const auto sender = rec.value("sender", "");
      if (sender != "ALICE" && sender != "BOB") throw FormatError(index, "bad sender");
      r.message.sender = sender == "ALICE" ? protocol::Role::Alice : protocol::Role::Bob;
      r.message.k_first = get_u64(rec, "k_first", index);
      r.message.modulus = parse_modulus(rec.value("modulus", json(nullptr)), index);
      if (!rec.contains("x") || !rec["x"].is_array()) throw FormatError(index, "x must be an array");
      for (const auto& x : rec["x"]) r.message.x_list.push_back(parse_bigint(x, index, "x"));
      r.t = t;
      file.expander.push_back(std::move(r));
    } else {
      throw FormatError(index, "unknown record kind '" + kind + "'");
    }
    ++index;
  }

  if (index == 0) throw FormatError(0, "empty file");
  if (index - 1 != *declared)
    throw FormatError(index, "header declares " + std::to_string(*declared) + " records, found " +
                                 std::to_string(index - 1));
  return file;
}

TranscriptFile read_transcript(std::istream& in) {
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_transcript(ss.str());
}

TranscriptFile load_transcript(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(0, "cannot open " + path.string());
  return read_transcript(in);
}

void save_transcript(const std::filesystem::path& path, const TranscriptFile& file) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::InvalidArgument, "cannot write " + path.string());
  write_transcript(out, file);
}

}  // namespace kexlab::io
