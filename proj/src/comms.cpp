#include "coopsim/comms.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace coopsim {

const char* message_kind_name(MessageKind k) {
  switch (k) {
    case MessageKind::Request: return "request";
    case MessageKind::BenchmarkReply: return "benchmark_reply";
    case MessageKind::DataShare: return "data_share";
  }
  throw std::logic_error("message_kind_name: bad enum");
}

const char* handshake_stage_name(HandshakeStage s) {
  switch (s) {
    case HandshakeStage::Request: return "request";
    case HandshakeStage::Compute: return "compute";
    case HandshakeStage::Reply: return "reply";
    case HandshakeStage::Select: return "select";
  }
  throw std::logic_error("handshake_stage_name: bad enum");
}

uint64_t MessageLog::append(LogRecord rec) {
  std::lock_guard<std::mutex> lock(mu_);
  rec.seq = records_.size();
  records_.push_back(std::move(rec));
  return records_.back().seq;
}

std::vector<LogRecord> MessageLog::records() const {
  std::lock_guard<std::mutex> lock(mu_);
  return records_;
}

std::string MessageLog::format_record(const LogRecord& rec) {
  std::ostringstream os;
  os << rec.seq << ' ' << rec.frame_index << ' ' << handshake_stage_name(rec.stage) << ' '
     << rec.sender << ' ' << rec.receiver << ' ' << rec.bytes;
  return os.str();
}

void MessageLog::write_to(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("MessageLog: cannot open " + path);
  for (const auto& rec : records()) out << format_record(rec) << '\n';
}

double hit_fraction(const Agent& sender, const Frame& frame) {
  if (!sender.sensored()) throw std::invalid_argument("hit_fraction: sender has no sensor");
  const Vec2 origin = sender.pose.xy();
  const double range = sender.sensor->range_m;
  double covered = 0.0;
  for (const auto& obj : frame.objects) {
    if (obj.id == sender.id) continue;
    const double d = (obj.center.xy() - origin).norm();
    if (d > range || d <= 0.0) continue;
    const double radius = 0.5 * std::hypot(obj.size.length, obj.size.width);
    const double half_width = std::atan2(radius, d);
    covered += 2.0 * half_width;
  }
  return std::min(1.0, covered / (2.0 * kPi));
}

uint64_t payload_bytes(const SensorConfig& sensor, double fraction) {
  if (fraction < 0.0 || fraction > 1.0)
    throw std::invalid_argument("payload_bytes: fraction must be in [0,1]");
  const double points_per_frame = static_cast<double>(sensor.points_per_second) / sensor.rate_hz;
  const auto bytes = static_cast<uint64_t>(std::llround(kBytesPerPoint * points_per_frame * fraction));
  return std::max(bytes, kMinSharePayloadBytes);
}

uint64_t payload_size(const Agent& sender, const Frame& frame) {
  return payload_bytes(*sender.sensor, hit_fraction(sender, frame));
}

std::vector<std::pair<std::string, int>> run_handshake(
    const std::string& ego_id, const std::vector<std::string>& candidates, const Frame& frame,
    const std::function<int(const std::string&)>& gain_fn, MessageLog* log) {
  std::vector<std::pair<std::string, int>> replies;
  if (candidates.empty()) return replies;

  std::vector<std::string> sorted = candidates;
  std::sort(sorted.begin(), sorted.end());

  if (log != nullptr)
    log->append({0, frame.index, HandshakeStage::Request, ego_id, "*", kControlMessageBytes});
  for (const auto& cid : sorted) {
    const int gain = gain_fn(cid);
    if (log != nullptr) log->append({0, frame.index, HandshakeStage::Compute, cid, cid, 0});
    if (log != nullptr)
      log->append({0, frame.index, HandshakeStage::Reply, cid, ego_id, kControlMessageBytes});
    replies.emplace_back(cid, gain);
  }
  if (log != nullptr) log->append({0, frame.index, HandshakeStage::Select, ego_id, ego_id, 0});
  return replies;
}

}  // namespace coopsim
