#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "auditlab/design.hpp"
#include "auditlab/error.hpp"
#include "auditlab/rng.hpp"

namespace auditlab {

enum class EventKind { sent, pixel_fetch, bytes_progress, click, reply };

inline const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::sent: return "sent";
    case EventKind::pixel_fetch: return "pixel_fetch";
    case EventKind::bytes_progress: return "bytes_progress";
    case EventKind::click: return "click";
    case EventKind::reply: return "reply";
  }
  return "?";
}

inline EventKind parse_event_kind(const std::string& s) {
  if (s == "sent") return EventKind::sent;
  if (s == "pixel_fetch") return EventKind::pixel_fetch;
  if (s == "bytes_progress") return EventKind::bytes_progress;
  if (s == "click") return EventKind::click;
  if (s == "reply") return EventKind::reply;
  fail(ErrorKind::data, "unknown event kind '" + s + "'");
}

struct EmailEvent {
  std::int64_t email_id = 0;
  EventKind kind = EventKind::sent;
  std::int64_t bytes = 0;  // bytes downloaded so far (bytes_progress only)
  std::int64_t t = 0;      // seconds since the Unix epoch, UTC
};

struct EmailEventLog {
  std::vector<EmailEvent> events;
};

// ---------------------------------------------------------------------------
// ISO-8601 UTC timestamps with second resolution.

inline std::string format_iso8601(std::int64_t epoch_seconds) {
  using namespace std::chrono;
  const auto day = floor<days>(sys_seconds{seconds{epoch_seconds}});
  const year_month_day ymd{day};
  const auto rem = epoch_seconds - duration_cast<seconds>(day.time_since_epoch()).count();
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02lld:%02lld:%02lldZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), static_cast<long long>(rem / 3600),
                static_cast<long long>((rem / 60) % 60), static_cast<long long>(rem % 60));
  return buf;
}

inline std::int64_t parse_iso8601(const std::string& s) {
  int y = 0;
  unsigned mo = 0, d = 0, h = 0, mi = 0, se = 0;
  char z = 0;
  if (std::sscanf(s.c_str(), "%d-%u-%uT%u:%u:%u%c", &y, &mo, &d, &h, &mi, &se, &z) != 7 || z != 'Z')
    fail(ErrorKind::data, "bad ISO-8601 UTC timestamp '" + s + "'");
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{mo}, day{d}};
  if (!ymd.ok() || h > 23 || mi > 59 || se > 60) fail(ErrorKind::data, "bad ISO-8601 UTC timestamp '" + s + "'");
  const auto days_since = sys_days{ymd}.time_since_epoch().count();
  return static_cast<std::int64_t>(days_since) * 86400 + h * 3600 + mi * 60 + se;
}

inline std::int64_t epoch_of_date(int y, unsigned m, unsigned d) {
  using namespace std::chrono;
  return static_cast<std::int64_t>(sys_days{year{y} / month{m} / day{d}}.time_since_epoch().count()) * 86400;
}

// ---------------------------------------------------------------------------
// Emission.

struct TimingParams {
  double download_rate_bytes_per_s = 10'240.0;  // 10 KB/s, binary kilobytes
  double read_median_seconds = 10.33;
  double read_log_sd = 1.0;
  double open_delay_mean_hours = 18.0;
  double click_prob = 0.05;
  double reply_prob = 0.02;
  double reopen_prob = 0.0;
  std::int64_t campaign_start = epoch_of_date(2020, 3, 2) + 9 * 3600;  // first send, 09:00 UTC
};

// Ground truth behind an emitted log, for round-trip checks.
struct EmailTruth {
  bool opened = false;
  int open_count = 0;
  double staying_seconds = 0.0;
  bool clicked = false;
  bool replied = false;
};

struct EmittedLog {
  EmailEventLog log;
  std::map<std::int64_t, EmailTruth> truth;
};

inline std::int64_t bytes_for_seconds(double seconds, double rate) { return std::llround(seconds * rate); }

inline EmittedLog emit_event_log(Rng& rng, std::span<const EmailTreatment> emails, const std::vector<bool>& opens,
                                 const TimingParams& timing) {
  if (opens.size() != emails.size()) fail(ErrorKind::domain, "emit_event_log: one open flag per email required");
  std::lognormal_distribution<double> read(std::log(timing.read_median_seconds), timing.read_log_sd);
  std::exponential_distribution<double> delay(1.0 / (timing.open_delay_mean_hours * 3600.0));
  std::bernoulli_distribution click(timing.click_prob), reply(timing.reply_prob), reopen(timing.reopen_prob);

  EmittedLog out;
  for (std::size_t i = 0; i < emails.size(); ++i) {
    const auto& e = emails[i];
    auto& truth = out.truth[e.email_id];
    const std::int64_t sent = timing.campaign_start + static_cast<std::int64_t>(e.send_day) * 86400 + (e.email_id % 3600);
    out.log.events.push_back({e.email_id, EventKind::sent, 0, sent});
    if (!opens[i]) continue;
    truth.opened = true;
    std::int64_t t = sent;
    do {
      t += 1 + static_cast<std::int64_t>(delay(rng));
      const double seconds = read(rng);
      out.log.events.push_back({e.email_id, EventKind::pixel_fetch, 0, t});
      t += std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(seconds)));
      out.log.events.push_back(
          {e.email_id, EventKind::bytes_progress, bytes_for_seconds(seconds, timing.download_rate_bytes_per_s), t});
      ++truth.open_count;
      truth.staying_seconds = std::max(truth.staying_seconds, seconds);
    } while (reopen(rng));
    if (click(rng)) {
      t += 5;
      out.log.events.push_back({e.email_id, EventKind::click, 0, t});
      truth.clicked = true;
    }
    if (reply(rng)) {
      t += 600;
      out.log.events.push_back({e.email_id, EventKind::reply, 0, t});
      truth.replied = true;
    }
  }
  std::stable_sort(out.log.events.begin(), out.log.events.end(),
                   [](const EmailEvent& a, const EmailEvent& b) { return a.t < b.t; });
  return out;
}

// ---------------------------------------------------------------------------
// JSONL wire format: {"email_id":..,"kind":..,"bytes":..,"t":"ISO-8601"}

inline void write_event_log_jsonl(std::ostream& out, const EmailEventLog& log) {
  for (const auto& ev : log.events) {
    nlohmann::ordered_json j;
    j["email_id"] = ev.email_id;
    j["kind"] = to_string(ev.kind);
    j["bytes"] = ev.bytes;
    j["t"] = format_iso8601(ev.t);
    out << j.dump() << '\n';
  }
}

inline EmailEventLog read_event_log_jsonl(std::istream& in) {
  EmailEventLog log;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      EmailEvent ev;
      ev.email_id = j.at("email_id").get<std::int64_t>();
      ev.kind = parse_event_kind(j.at("kind").get<std::string>());
      ev.bytes = j.contains("bytes") && !j["bytes"].is_null() ? j["bytes"].get<std::int64_t>() : 0;
      ev.t = parse_iso8601(j.at("t").get<std::string>());
      log.events.push_back(ev);
    } catch (const nlohmann::json::exception& ex) {
      fail(ErrorKind::data, "events line " + std::to_string(line_no) + ": " + ex.what());
    }
  }
  return log;
}

// ---------------------------------------------------------------------------
// Parsing into per-email outcomes.

struct EmailOutcome {
  bool opened = false;
  double staying_seconds = 0.0;  // max bytes / rate; 0 when unopened
  int open_count = 0;
  bool clicked = false;
  bool replied = false;
};

inline std::map<std::int64_t, EmailOutcome> parse_events(const EmailEventLog& log,
                                                         double download_rate_bytes_per_s = 10'240.0) {
  if (!(download_rate_bytes_per_s > 0.0)) fail(ErrorKind::domain, "parse_events: download rate must be positive");
  std::map<std::int64_t, EmailOutcome> out;
  std::map<std::int64_t, std::int64_t> last_t, max_bytes;
  for (const auto& ev : log.events) {
    auto& o = out[ev.email_id];
    if (const auto it = last_t.find(ev.email_id); it != last_t.end() && ev.t < it->second)
      fail(ErrorKind::data, "malformed event log: events of email " + std::to_string(ev.email_id) + " out of order");
    last_t[ev.email_id] = ev.t;
    switch (ev.kind) {
      case EventKind::sent: break;
      case EventKind::pixel_fetch:
        o.opened = true;
        ++o.open_count;
        break;
      case EventKind::bytes_progress:
        if (!o.opened)
          fail(ErrorKind::data,
               "malformed event log: bytes_progress before pixel_fetch for email " + std::to_string(ev.email_id));
        if (ev.bytes < 0) fail(ErrorKind::data, "malformed event log: negative bytes for email " + std::to_string(ev.email_id));
        max_bytes[ev.email_id] = std::max(max_bytes[ev.email_id], ev.bytes);
        break;
      case EventKind::click:
      case EventKind::reply:
        if (!o.opened)
          fail(ErrorKind::data, std::string("malformed event log: ") + to_string(ev.kind) +
                                    " before pixel_fetch for email " + std::to_string(ev.email_id));
        (ev.kind == EventKind::click ? o.clicked : o.replied) = true;
        break;
    }
  }
  for (const auto& [id, bytes] : max_bytes)
    out[id].staying_seconds = static_cast<double>(bytes) / download_rate_bytes_per_s;
  return out;
}

}  // namespace auditlab
