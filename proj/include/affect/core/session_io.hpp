#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "affect/core/text.hpp"
#include "affect/core/types.hpp"

namespace affect {

using json = nlohmann::json;

inline constexpr const char* kSessionSchema = "affect.session/1";

struct IngestOptions {
  bool allow_any_rate = false;
  int max_nan_run = 3;
  // Row timestamps may deviate this much from start + i/rate.
  std::int64_t timestamp_tolerance_us = 1;
};

inline bool rate_allowed(StreamKind kind, double rate) {
  if (kind == StreamKind::Eeg) return rate == 250.0 || rate == 500.0;
  return rate == kEyeRateHz;
}

// --- events -------------------------------------------------------------

inline json to_json(const StimulusEvent& ev) {
  json j;
  j["event_id"] = ev.event_id;
  j["timestamp_us"] = ev.timestamp_us;
  j["category"] = std::string(to_string(ev.category));
  if (ev.rating) j["rating"] = *ev.rating;
  if (ev.binary_label) j["binary_label"] = std::string(to_string(*ev.binary_label));
  if (ev.luminance) j["luminance"] = *ev.luminance;
  json rois = json::array();
  for (const auto& r : ev.rois)
    rois.push_back({{"name", r.name}, {"x", r.rect.x}, {"y", r.rect.y}, {"w", r.rect.w}, {"h", r.rect.h}});
  j["rois"] = rois;
  j["metadata"] = ev.metadata;
  return j;
}

inline StimulusEvent event_from_json(const json& j) {
  StimulusEvent ev;
  try {
    ev.event_id = j.at("event_id").get<std::string>();
    ev.timestamp_us = j.at("timestamp_us").get<std::int64_t>();
    ev.category = parse_category(j.value("category", std::string("other")));
    if (j.contains("rating") && !j["rating"].is_null()) ev.rating = j["rating"].get<int>();
    if (j.contains("binary_label") && !j["binary_label"].is_null())
      ev.binary_label = parse_label(j["binary_label"].get<std::string>());
    if (j.contains("luminance") && !j["luminance"].is_null()) ev.luminance = j["luminance"].get<double>();
    if (j.contains("rois"))
      for (const auto& r : j["rois"])
        ev.rois.push_back({r.at("name").get<std::string>(),
                           {r.at("x").get<double>(), r.at("y").get<double>(), r.at("w").get<double>(),
                            r.at("h").get<double>()}});
    if (j.contains("metadata")) ev.metadata = j["metadata"].get<std::map<std::string, std::string>>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Ingest, std::string("malformed event: ") + e.what());
  }
  return ev;
}

// --- sample CSVs ----------------------------------------------------------

/// Linearly fills NaN runs of at most `max_run` samples in every column.
/// Runs touching either end are filled with the nearest finite value.
inline void interpolate_short_gaps(Eigen::MatrixXd& m, int max_run, const std::string& what) {
  const Eigen::Index n = m.rows();
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    Eigen::Index i = 0;
    while (i < n) {
      if (!std::isnan(m(i, c))) {
        ++i;
        continue;
      }
      Eigen::Index j = i;
      while (j < n && std::isnan(m(j, c))) ++j;
      const Eigen::Index run = j - i;
      if (run > max_run)
        throw Error(ErrorCode::Ingest, what + ": NaN run of " + std::to_string(run) + " samples in column " +
                                           std::to_string(c) + " at row " + std::to_string(i));
      if (i == 0 && j == n)
        throw Error(ErrorCode::Ingest, what + ": column " + std::to_string(c) + " is entirely NaN");
      for (Eigen::Index k = i; k < j; ++k) {
        if (i == 0) m(k, c) = m(j, c);
        else if (j == n) m(k, c) = m(i - 1, c);
        else {
          const double t = static_cast<double>(k - i + 1) / static_cast<double>(run + 1);
          m(k, c) = m(i - 1, c) + t * (m(j, c) - m(i - 1, c));
        }
      }
      i = j;
    }
  }
}

inline std::string stream_to_csv(const SampleStream& s) {
  std::string out = "timestamp_us";
  for (const auto& name : s.channel_names) out += "," + name;
  out += '\n';
  out.reserve(out.size() + static_cast<std::size_t>(s.size()) * (s.channel_names.size() + 1) * 10);
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    out += std::to_string(s.timestamp_us(i));
    for (Eigen::Index c = 0; c < s.samples.cols(); ++c) {
      out += ',';
      out += format_double(s.samples(i, c));
    }
    out += '\n';
  }
  return out;
}

inline SampleStream stream_from_csv(std::string_view text, StreamKind kind, const std::string& stream_id,
                                    double rate_hz, const IngestOptions& opts, const std::string& what) {
  SampleStream s;
  s.stream_id = stream_id;
  s.kind = kind;
  s.sample_rate_hz = rate_hz;
  require(rate_hz > 0, ErrorCode::Ingest, what + ": sample rate must be positive");
  if (!opts.allow_any_rate && !rate_allowed(kind, rate_hz))
    throw Error(ErrorCode::Ingest, what + ": sample rate " + format_double(rate_hz) +
                                       " Hz is not supported (use --allow-any-rate)");

  const auto lines = lines_of(text);
  require(!lines.empty(), ErrorCode::Ingest, what + ": empty file");
  const auto header = split(lines[0], ',');
  require(!header.empty() && trim(header[0]) == "timestamp_us", ErrorCode::Ingest,
          what + ": first column must be timestamp_us");
  for (std::size_t c = 1; c < header.size(); ++c) s.channel_names.emplace_back(trim(header[c]));

  const auto expected = kind == StreamKind::Eeg ? std::vector<std::string>(kEegChannels.begin(), kEegChannels.end())
                                                : std::vector<std::string>(kEyeChannels.begin(), kEyeChannels.end());
  require(s.channel_names == expected, ErrorCode::Ingest, what + ": unexpected header");

  const auto n_rows = static_cast<Eigen::Index>(lines.size() - 1);
  const auto n_cols = static_cast<Eigen::Index>(s.channel_names.size());
  s.samples.resize(n_rows, n_cols);
  for (Eigen::Index i = 0; i < n_rows; ++i) {
    const auto fields = split(lines[static_cast<std::size_t>(i) + 1], ',');
    require(static_cast<Eigen::Index>(fields.size()) == n_cols + 1, ErrorCode::Ingest,
            what + ": row " + std::to_string(i + 1) + " has " + std::to_string(fields.size()) + " fields");
    const std::int64_t ts = parse_int(fields[0]);
    if (i == 0) s.start_timestamp_us = ts;
    if (std::llabs(ts - s.timestamp_us(i)) > opts.timestamp_tolerance_us)
      throw Error(ErrorCode::Ingest, what + ": timestamp at row " + std::to_string(i + 1) +
                                         " breaks the uniform " + format_double(rate_hz) + " Hz grid");
    for (Eigen::Index c = 0; c < n_cols; ++c) s.samples(i, c) = parse_double(fields[static_cast<std::size_t>(c) + 1]);
  }
  interpolate_short_gaps(s.samples, opts.max_nan_run, what);
  return s;
}

// --- session directory -------------------------------------------------------

inline void write_session(const Session& session, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const SampleStream* eeg = session.find_stream(StreamKind::Eeg);
  const SampleStream* eye = session.find_stream(StreamKind::Eye);
  require(eeg && eye, ErrorCode::MissingStream, "session needs both EEG and eye streams to be written");

  json meta;
  meta["schema"] = kSessionSchema;
  meta["session_id"] = session.session_id;
  meta["subject_id"] = session.subject_id;
  meta["epoch_length_s"] = session.epoch_length_s;
  meta["streams"] = {{"eeg", {{"stream_id", eeg->stream_id}, {"sample_rate_hz", eeg->sample_rate_hz}}},
                     {"eye", {{"stream_id", eye->stream_id}, {"sample_rate_hz", eye->sample_rate_hz}}}};
  meta["metadata"] = session.metadata;
  write_file((dir / "session.json").string(), meta.dump(2) + "\n");
  write_file((dir / "eeg.csv").string(), stream_to_csv(*eeg));
  write_file((dir / "eye.csv").string(), stream_to_csv(*eye));

  std::string events;
  for (const auto& ev : session.events) events += to_json(ev).dump() + "\n";
  write_file((dir / "events.jsonl").string(), events);
}

inline Session read_session(const std::filesystem::path& dir, const IngestOptions& opts = {}) {
  Session session;
  json meta;
  try {
    meta = json::parse(read_file((dir / "session.json").string()));
    session.session_id = meta.at("session_id").get<std::string>();
    session.subject_id = meta.value("subject_id", std::string());
    session.epoch_length_s = meta.value("epoch_length_s", 2.0);
    if (meta.contains("metadata")) session.metadata = meta["metadata"].get<std::map<std::string, std::string>>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Ingest, (dir / "session.json").string() + ": " + e.what());
  }

  auto stream_meta = [&](const char* key, double default_rate) {
    std::string id = key;
    double rate = default_rate;
    if (meta.contains("streams") && meta["streams"].contains(key)) {
      const auto& s = meta["streams"][key];
      id = s.value("stream_id", id);
      rate = s.value("sample_rate_hz", rate);
    }
    return std::pair{id, rate};
  };
  const auto [eeg_id, eeg_rate] = stream_meta("eeg", 250.0);
  const auto [eye_id, eye_rate] = stream_meta("eye", kEyeRateHz);
  session.streams.push_back(stream_from_csv(read_file((dir / "eeg.csv").string()), StreamKind::Eeg, eeg_id,
                                            eeg_rate, opts, (dir / "eeg.csv").string()));
  session.streams.push_back(stream_from_csv(read_file((dir / "eye.csv").string()), StreamKind::Eye, eye_id,
                                            eye_rate, opts, (dir / "eye.csv").string()));

  const std::string events_path = (dir / "events.jsonl").string();
  const std::string events_text = read_file(events_path);
  for (auto line : lines_of(events_text)) {
    if (trim(line).empty()) continue;
    try {
      session.events.push_back(event_from_json(json::parse(line)));
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::Ingest, events_path + ": " + e.what());
    }
  }
  return session;
}

}  // namespace affect
