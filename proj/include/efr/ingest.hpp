#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "efr/csv.hpp"
#include "efr/types.hpp"
#include "efr/wav.hpp"

namespace efr {

inline constexpr std::array<const char*, 4> kChannelNames = {"Cz", "P4", "F8", "T7"};

// One participant's recording: the four-channel EEG montage plus the mono
// stimulus audio it was recorded against.
struct ParticipantRecord {
  std::string participant_id;
  std::map<std::string, SignalRecord> channels;
  SignalRecord stimulus;
  std::string language_group;
};

struct ManifestEntry {
  std::string participant_id;
  std::filesystem::path eeg_path;
  std::filesystem::path audio_path;
  double start_s{0.0};
  std::string language_group;
};

struct Manifest {
  std::vector<ManifestEntry> participants;  // ordered by participant_id

  const ManifestEntry* find(const std::string& id) const {
    for (const auto& e : participants)
      if (e.participant_id == id) return &e;
    return nullptr;
  }
};

namespace ingest_detail {

inline std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(trim(field));
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

inline double parse_cell(const std::string& cell, std::size_t row, const std::string& column) {
  const std::string t = trim(cell);
  double v = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc{} || res.ptr != t.data() + t.size() || !std::isfinite(v))
    throw io_error("unparseable value '" + cell + "' in column " + column + " at data row " +
                   std::to_string(row));
  return v;
}

inline bool is_timestamp_header(const std::string& name) {
  std::string lower;
  for (char c : name) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return lower == "time" || lower == "timestamp" || lower == "time_s" || lower == "t";
}

}  // namespace ingest_detail

// Read a four-channel EEG CSV: header row naming the channels, one row per
// sample. An optional leading timestamp column is checked for monotonicity
// and an implied rate consistent with the declared one, then ignored.
// column_map can rename on-disk headers to montage channel names.
inline std::map<std::string, SignalRecord> load_eeg(
    const std::filesystem::path& path, double expected_rate_hz = 200.0,
    const std::map<std::string, std::string>& column_map = {}) {
  using namespace ingest_detail;
  std::ifstream in(path);
  if (!in) throw io_error("cannot open EEG file: " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw io_error("empty EEG file: " + path.string());
  const auto header = split_csv_line(line);

  auto canonical = [&](const std::string& name) -> std::string {
    const auto it = column_map.find(name);
    return it != column_map.end() ? it->second : name;
  };

  std::map<std::string, std::size_t> channel_columns;
  std::ptrdiff_t timestamp_column = -1;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::string name = canonical(header[i]);
    if (timestamp_column < 0 && is_timestamp_header(name)) {
      timestamp_column = static_cast<std::ptrdiff_t>(i);
      continue;
    }
    for (const char* ch : kChannelNames)
      if (name == ch) channel_columns[ch] = i;
  }
  for (const char* ch : kChannelNames) {
    if (!channel_columns.count(ch))
      throw io_error("EEG file " + path.string() + " is missing channel column: " + std::string(ch));
  }

  std::map<std::string, SignalRecord> out;
  for (const char* ch : kChannelNames) {
    out[ch].sample_rate_hz = expected_rate_hz;
    out[ch].label = ch;
  }

  std::vector<double> timestamps;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    const auto fields = split_csv_line(line);
    if (fields.size() < header.size())
      throw io_error("short row " + std::to_string(row) + " in " + path.string());
    if (timestamp_column >= 0) {
      const double t = parse_cell(fields[static_cast<std::size_t>(timestamp_column)], row, "timestamp");
      if (!timestamps.empty() && t <= timestamps.back())
        throw io_error("non-monotonic timestamp at data row " + std::to_string(row) + " in " +
                       path.string());
      timestamps.push_back(t);
    }
    for (const char* ch : kChannelNames)
      out[ch].samples.push_back(parse_cell(fields[channel_columns[ch]], row, ch));
  }
  if (row == 0) throw io_error("EEG file has no data rows: " + path.string());

  if (timestamps.size() >= 2) {
    const double implied = static_cast<double>(timestamps.size() - 1) /
                           (timestamps.back() - timestamps.front());
    if (std::abs(implied - expected_rate_hz) > 1e-3 * expected_rate_hz)
      throw io_error("EEG file " + path.string() + " implies " + std::to_string(implied) +
                     " Hz, declared " + std::to_string(expected_rate_hz) + " Hz");
  }
  return out;
}

// Load stimulus audio: PCM WAV, at least 8 kHz, stereo downmixed by channel
// mean, samples normalized to [-1, 1].
inline SignalRecord load_audio(const std::filesystem::path& path) {
  const auto wav = read_wav(path);
  if (wav.sample_rate_hz < 8000.0)
    throw io_error("audio rate below 8 kHz: " + path.string());

  SignalRecord out;
  out.sample_rate_hz = wav.sample_rate_hz;
  out.label = "stimulus";
  const std::size_t n = wav.channels.front().size();
  out.samples.resize(n);
  if (wav.channels.size() == 1) {
    out.samples = wav.channels.front();
  } else {
    for (std::size_t i = 0; i < n; ++i)
      out.samples[i] = 0.5 * (wav.channels[0][i] + wav.channels[1][i]);
  }
  validate(out);
  return out;
}

// Cut every signal of the record to [start_s, start_s + duration_s).
inline ParticipantRecord align_and_trim(const ParticipantRecord& record, double start_s,
                                        double duration_s = 120.0) {
  if (start_s < 0.0 || duration_s <= 0.0)
    throw std::invalid_argument("align_and_trim: invalid window");

  auto cut = [&](const SignalRecord& s) {
    const std::size_t begin = static_cast<std::size_t>(std::llround(start_s * s.sample_rate_hz));
    const std::size_t len = static_cast<std::size_t>(std::llround(duration_s * s.sample_rate_hz));
    if (begin + len > s.samples.size())
      throw std::invalid_argument("align_and_trim: window [" + std::to_string(start_s) + ", " +
                                  std::to_string(start_s + duration_s) + ") s exceeds '" + s.label +
                                  "' duration of " + std::to_string(s.duration_s()) + " s");
    SignalRecord out;
    out.sample_rate_hz = s.sample_rate_hz;
    out.label = s.label;
    out.samples.assign(s.samples.begin() + static_cast<std::ptrdiff_t>(begin),
                       s.samples.begin() + static_cast<std::ptrdiff_t>(begin + len));
    return out;
  };

  ParticipantRecord out;
  out.participant_id = record.participant_id;
  out.language_group = record.language_group;
  out.stimulus = cut(record.stimulus);
  for (const auto& [name, sig] : record.channels) out.channels[name] = cut(sig);
  return out;
}

// Manifest: JSON object mapping participant_id -> {eeg_path, audio_path,
// start_s, language_group}. Relative paths resolve against the manifest dir.
inline Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open manifest: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw config_error("malformed manifest " + path.string() + ": " + e.what());
  }
  if (!j.is_object()) throw config_error("manifest must be a JSON object: " + path.string());

  const auto base = path.parent_path();
  auto resolve = [&](const std::string& p) {
    const std::filesystem::path fp(p);
    return fp.is_absolute() ? fp : base / fp;
  };

  Manifest manifest;
  for (const auto& [id, entry] : j.items()) {
    ManifestEntry e;
    e.participant_id = id;
    try {
      e.eeg_path = resolve(entry.at("eeg_path").get<std::string>());
      e.audio_path = resolve(entry.at("audio_path").get<std::string>());
      e.start_s = entry.value("start_s", 0.0);
      e.language_group = entry.value("language_group", std::string{});
    } catch (const nlohmann::json::exception& ex) {
      throw config_error("manifest entry '" + id + "' malformed: " + ex.what());
    }
    manifest.participants.push_back(std::move(e));
  }
  std::sort(manifest.participants.begin(), manifest.participants.end(),
            [](const ManifestEntry& a, const ManifestEntry& b) {
              return a.participant_id < b.participant_id;
            });
  return manifest;
}

// Load one participant end to end: EEG channels, stimulus audio, and the
// two-minute analysis window.
inline ParticipantRecord load_participant(const ManifestEntry& entry, double duration_s = 120.0,
                                          double eeg_rate_hz = 200.0) {
  ParticipantRecord record;
  record.participant_id = entry.participant_id;
  record.language_group = entry.language_group;
  record.channels = load_eeg(entry.eeg_path, eeg_rate_hz);
  record.stimulus = load_audio(entry.audio_path);

  std::size_t len = 0;
  for (const auto& [name, sig] : record.channels) {
    if (len == 0) len = sig.samples.size();
    if (sig.samples.size() != len)
      throw io_error("EEG channels of " + entry.participant_id + " have unequal lengths");
  }
  return align_and_trim(record, entry.start_s, duration_s);
}

}  // namespace efr
