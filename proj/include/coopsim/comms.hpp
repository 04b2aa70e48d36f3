#pragma once
// V2X message layer: handshake messages, message log, payload sizing, and the
// per-ego per-frame bandwidth budget.

#include <cstdint>
#include <functional>
#include <mutex>
#include <string>
#include <vector>

#include "coopsim/sensing.hpp"
#include "coopsim/types.hpp"

namespace coopsim {

// 2 MB = 2 * 2^20 bytes, per ego per frame
constexpr uint64_t kBandwidthLimitBytes = 2u * 1024u * 1024u;
constexpr uint64_t kControlMessageBytes = 64;
constexpr uint64_t kMinSharePayloadBytes = 1024;
constexpr uint64_t kBytesPerPoint = 16;  // 4 fields x 4 bytes

enum class MessageKind { Request, BenchmarkReply, DataShare };

const char* message_kind_name(MessageKind k);

struct Message {
  int frame_index = 0;
  MessageKind kind = MessageKind::Request;
  std::string sender;
  std::string receiver;  // "*" for broadcast
  uint64_t bytes = 0;
  double benchmark = 0.0;  // BenchmarkReply only
};

enum class HandshakeStage { Request, Compute, Reply, Select };

const char* handshake_stage_name(HandshakeStage s);

struct LogRecord {
  uint64_t seq = 0;
  int frame_index = 0;
  HandshakeStage stage = HandshakeStage::Request;
  std::string sender;
  std::string receiver;
  uint64_t bytes = 0;
};

// Append-only message log; appends get a total order. Serializable as one
// line-delimited record per message.
class MessageLog {
 public:
  uint64_t append(LogRecord rec);
  std::vector<LogRecord> records() const;
  void write_to(const std::string& path) const;
  static std::string format_record(const LogRecord& rec);

 private:
  mutable std::mutex mu_;
  std::vector<LogRecord> records_;
};

struct BandwidthBudget {
  uint64_t limit_bytes = kBandwidthLimitBytes;
  uint64_t spent_bytes = 0;

  // True when the message fits; a refused charge leaves spent_bytes unchanged.
  bool try_charge(const Message& msg) {
    if (spent_bytes + msg.bytes > limit_bytes) return false;
    spent_bytes += msg.bytes;
    return true;
  }
};

// Fraction of the sensor's rays that hit object footprints, from the angular
// width each in-range footprint subtends at the sensor origin. In [0, 1].
double hit_fraction(const Agent& sender, const Frame& frame);

// Size in bytes of one raw share from this sensor at the given hit fraction.
uint64_t payload_bytes(const SensorConfig& sensor, double fraction);

// Size of the sender's raw share for this frame.
uint64_t payload_size(const Agent& sender, const Frame& frame);

// Four-stage scheduling handshake: broadcast request, per-candidate benchmark
// computation, replies, selection marker. Returns (candidate, benchmark) pairs.
std::vector<std::pair<std::string, int>> run_handshake(
    const std::string& ego_id, const std::vector<std::string>& candidates, const Frame& frame,
    const std::function<int(const std::string&)>& gain_fn, MessageLog* log = nullptr);

}  // namespace coopsim
