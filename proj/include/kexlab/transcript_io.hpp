#pragma once

// Transcript files: newline-delimited JSON records.
//
//   {"record":"header","format":"kexlab-transcript","version":1,
//    "config_hash":"…","mode":"circuit","modulus":null,"records":3}
//   {"record":"sample","round":0,"phase":"BASELINE","u_c":"23/7","i_c":"1/1750","t":0}
//   {"record":"expander","sender":"ALICE","k_first":0,"modulus":null,"x":["76000"],"t":3}
//
// "records" counts the lines after the header, so a file cut at a line
// boundary is still detected as truncated.

#include "kexlab/config.hpp"
#include "kexlab/expander.hpp"
#include "kexlab/protocol.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace kexlab::io {

inline constexpr int kTranscriptVersion = 1;

struct ExpanderRecord {
  expander::ExpanderMessage message;
  std::uint64_t t = 0;

  friend bool operator==(const ExpanderRecord&, const ExpanderRecord&) = default;
};

struct TranscriptFile {
  std::string config_hash;
  Mode mode = Mode::Circuit;
  std::optional<BigInt> modulus;
  protocol::Transcript analog;
  std::vector<ExpanderRecord> expander;

  friend bool operator==(const TranscriptFile&, const TranscriptFile&) = default;
};

void write_transcript(std::ostream& out, const TranscriptFile& file);
std::string to_text(const TranscriptFile& file);

// Throws FormatError carrying the zero-based index of the offending record.
TranscriptFile read_transcript(std::istream& in);
TranscriptFile parse_transcript(const std::string& text);
TranscriptFile load_transcript(const std::filesystem::path& path);
void save_transcript(const std::filesystem::path& path, const TranscriptFile& file);

}  // namespace kexlab::io
