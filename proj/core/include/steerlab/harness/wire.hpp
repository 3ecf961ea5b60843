#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "steerlab/netsim/types.hpp"

namespace steerlab::harness {

inline constexpr int kSchemaVersion = 1;
inline constexpr std::size_t kMaxFrameBytes = 64u << 20;

struct ProtocolError : std::runtime_error {
  explicit ProtocolError(const std::string& msg, std::string offending = {})
      : std::runtime_error(offending.empty() ? msg : msg + " [offending bytes: " + offending + "]"),
        offending_bytes(std::move(offending)) {}
  std::string offending_bytes;  // hex prefix of the bad frame
};

enum class MsgType { KpiBatch, Handover, Ack, End };

std::string msg_type_name(MsgType t);
MsgType msg_type_from_name(const std::string& name);

struct WireMessage {
  MsgType type = MsgType::Ack;
  std::int64_t iteration = 0;
  int schema_version = kSchemaVersion;
  nlohmann::json body;
};

/// 4-byte big-endian payload length followed by the JSON payload.
std::vector<std::uint8_t> encode_frame(const WireMessage& msg);
WireMessage decode_payload(const std::uint8_t* data, std::size_t len);

nlohmann::json batch_to_json(const netsim::KpiReportBatch& batch);
netsim::KpiReportBatch batch_from_json(const nlohmann::json& j);
nlohmann::json handover_to_json(const netsim::HandoverRequest& req);
netsim::HandoverRequest handover_from_json(const nlohmann::json& j);

/// Blocking framed channel over a stream-socket fd. Owns the fd.
class FrameChannel {
 public:
  explicit FrameChannel(int fd) : fd_(fd) {}
  ~FrameChannel();
  FrameChannel(const FrameChannel&) = delete;
  FrameChannel& operator=(const FrameChannel&) = delete;
  FrameChannel(FrameChannel&& o) noexcept : fd_(o.fd_) { o.fd_ = -1; }

  void send(const WireMessage& msg);
  WireMessage recv();

 private:
  int fd_ = -1;
};

/// Validates the per-iteration lockstep: one KPI_BATCH, zero or more
/// HANDOVERs, one ACK, then the next iteration; END only between iterations.
class LockstepValidator {
 public:
  /// Call for every message that crosses the wire (either direction).
  /// Throws ProtocolError on violations.
  void observe(const WireMessage& msg);

  std::int64_t iterations_completed() const { return completed_; }

 private:
  enum class Phase { AwaitBatch, AwaitAck } phase_ = Phase::AwaitBatch;
  std::int64_t current_iteration_ = -1;
  std::int64_t completed_ = 0;
  bool ended_ = false;
};

}  // namespace steerlab::harness
