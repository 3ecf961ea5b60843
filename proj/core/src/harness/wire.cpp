#include "steerlab/harness/wire.hpp"

#include <unistd.h>

#include <cerrno>
#include <cstring>

namespace steerlab::harness {

using nlohmann::json;

std::string msg_type_name(MsgType t) {
  switch (t) {
    case MsgType::KpiBatch: return "KPI_BATCH";
    case MsgType::Handover: return "HANDOVER";
    case MsgType::Ack: return "ACK";
    case MsgType::End: return "END";
  }
  return "?";
}

MsgType msg_type_from_name(const std::string& name) {
  if (name == "KPI_BATCH") return MsgType::KpiBatch;
  if (name == "HANDOVER") return MsgType::Handover;
  if (name == "ACK") return MsgType::Ack;
  if (name == "END") return MsgType::End;
  throw ProtocolError("unknown message type: " + name);
}

namespace {

std::string hex_prefix(const std::uint8_t* data, std::size_t len, std::size_t limit = 64) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  const std::size_t n = std::min(len, limit);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(digits[data[i] >> 4]);
    out.push_back(digits[data[i] & 0xf]);
  }
  if (len > limit) out += "...";
  return out;
}

}  // namespace

std::vector<std::uint8_t> encode_frame(const WireMessage& msg) {
  json j = {{"type", msg_type_name(msg.type)},
            {"iteration", msg.iteration},
            {"schema_version", msg.schema_version},
            {"body", msg.body.is_null() ? json::object() : msg.body}};
  const std::string payload = j.dump();
  if (payload.size() > kMaxFrameBytes) throw ProtocolError("frame exceeds the size limit");

  std::vector<std::uint8_t> out;
  out.reserve(4 + payload.size());
  const auto len = static_cast<std::uint32_t>(payload.size());
  out.push_back(static_cast<std::uint8_t>(len >> 24));
  out.push_back(static_cast<std::uint8_t>(len >> 16));
  out.push_back(static_cast<std::uint8_t>(len >> 8));
  out.push_back(static_cast<std::uint8_t>(len));
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

WireMessage decode_payload(const std::uint8_t* data, std::size_t len) {
  json j;
  try {
    j = json::parse(data, data + len);
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("malformed frame payload: ") + e.what(),
                        hex_prefix(data, len));
  }
  if (!j.is_object() || !j.contains("type") || !j.contains("iteration") ||
      !j.contains("schema_version") || !j.contains("body")) {
    throw ProtocolError("frame payload missing required fields", hex_prefix(data, len));
  }
  WireMessage msg;
  msg.type = msg_type_from_name(j.at("type").get<std::string>());
  msg.iteration = j.at("iteration").get<std::int64_t>();
  msg.schema_version = j.at("schema_version").get<int>();
  if (msg.schema_version != kSchemaVersion) {
    throw ProtocolError("unsupported schema_version " + std::to_string(msg.schema_version));
  }
  msg.body = j.at("body");
  return msg;
}

json batch_to_json(const netsim::KpiReportBatch& batch) {
  json ues = json::array();
  for (const auto& r : batch.ue_reports) {
    ues.push_back({{"ue_id", r.ue_id},
                   {"serving_cell", r.serving_cell},
                   {"timestamp", r.timestamp},
                   {"pdcp_thp_dl", r.pdcp_thp_dl},
                   {"pdcp_thp_ul", r.pdcp_thp_ul},
                   {"prb_ratio_dl", r.prb_ratio_dl},
                   {"prb_ratio_ul", r.prb_ratio_ul},
                   {"rsrp", r.rsrp_dbm},
                   {"rsrq", r.rsrq_db},
                   {"snir", r.snir_db},
                   {"pos", {r.pos_x, r.pos_y}}});
  }
  json cells = json::array();
  for (const auto& r : batch.cell_reports) {
    cells.push_back({{"cell_id", r.cell_id},
                     {"timestamp", r.timestamp},
                     {"throughput", r.throughput_bps},
                     {"meas_period_prb", r.meas_period_prb_khz},
                     {"num_ues", r.num_ues},
                     {"new_ues", r.new_ues},
                     {"left_ues", r.left_ues}});
  }
  return {{"iteration", batch.iteration}, {"ue_reports", ues}, {"cell_reports", cells}};
}

netsim::KpiReportBatch batch_from_json(const json& j) {
  netsim::KpiReportBatch batch;
  batch.iteration = j.at("iteration").get<std::int64_t>();
  for (const auto& u : j.at("ue_reports")) {
    netsim::UeKpiReport r;
    r.ue_id = u.at("ue_id").get<int>();
    r.serving_cell = u.at("serving_cell").get<std::string>();
    r.timestamp = u.at("timestamp").get<std::int64_t>();
    r.pdcp_thp_dl = u.at("pdcp_thp_dl").get<double>();
    r.pdcp_thp_ul = u.at("pdcp_thp_ul").get<double>();
    r.prb_ratio_dl = u.at("prb_ratio_dl").get<double>();
    r.prb_ratio_ul = u.at("prb_ratio_ul").get<double>();
    r.rsrp_dbm = u.at("rsrp").get<double>();
    r.rsrq_db = u.at("rsrq").get<double>();
    r.snir_db = u.at("snir").get<double>();
    r.pos_x = u.at("pos")[0].get<double>();
    r.pos_y = u.at("pos")[1].get<double>();
    batch.ue_reports.push_back(std::move(r));
  }
  for (const auto& c : j.at("cell_reports")) {
    netsim::CellKpiReport r;
    r.cell_id = c.at("cell_id").get<std::string>();
    r.timestamp = c.at("timestamp").get<std::int64_t>();
    r.throughput_bps = c.at("throughput").get<double>();
    r.meas_period_prb_khz = c.at("meas_period_prb").get<double>();
    r.num_ues = c.at("num_ues").get<int>();
    r.new_ues = c.at("new_ues").get<int>();
    r.left_ues = c.at("left_ues").get<int>();
    batch.cell_reports.push_back(std::move(r));
  }
  return batch;
}

json handover_to_json(const netsim::HandoverRequest& req) {
  return {{"ue_id", req.ue_id}, {"target_cell", req.target_cell}, {"issued_at", req.issued_at}};
}

netsim::HandoverRequest handover_from_json(const json& j) {
  netsim::HandoverRequest req;
  req.ue_id = j.at("ue_id").get<int>();
  req.target_cell = j.at("target_cell").get<std::string>();
  req.issued_at = j.at("issued_at").get<std::int64_t>();
  return req;
}

FrameChannel::~FrameChannel() {
  if (fd_ >= 0) ::close(fd_);
}

namespace {

void write_all(int fd, const std::uint8_t* data, std::size_t len) {
  std::size_t sent = 0;
  while (sent < len) {
    const ssize_t n = ::write(fd, data + sent, len - sent);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw ProtocolError(std::string("connection write failed: ") + std::strerror(errno));
    }
    sent += static_cast<std::size_t>(n);
  }
}

void read_all(int fd, std::uint8_t* data, std::size_t len) {
  std::size_t got = 0;
  while (got < len) {
    const ssize_t n = ::read(fd, data + got, len - got);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw ProtocolError(std::string("connection read failed: ") + std::strerror(errno));
    }
    if (n == 0) throw ProtocolError("connection closed mid-frame");
    got += static_cast<std::size_t>(n);
  }
}

}  // namespace

void FrameChannel::send(const WireMessage& msg) {
  const auto frame = encode_frame(msg);
  write_all(fd_, frame.data(), frame.size());
}

WireMessage FrameChannel::recv() {
  std::uint8_t header[4];
  read_all(fd_, header, 4);
  const std::uint32_t len = (static_cast<std::uint32_t>(header[0]) << 24) |
                            (static_cast<std::uint32_t>(header[1]) << 16) |
                            (static_cast<std::uint32_t>(header[2]) << 8) |
                            static_cast<std::uint32_t>(header[3]);
  if (len > kMaxFrameBytes) {
    throw ProtocolError("frame length " + std::to_string(len) + " exceeds the limit",
                        hex_prefix(header, 4));
  }
  std::vector<std::uint8_t> payload(len);
  read_all(fd_, payload.data(), len);
  return decode_payload(payload.data(), payload.size());
}

void LockstepValidator::observe(const WireMessage& msg) {
  if (ended_) throw ProtocolError("message after END");
  switch (msg.type) {
    case MsgType::KpiBatch:
      if (phase_ != Phase::AwaitBatch)
        throw ProtocolError("KPI_BATCH before the previous iteration was acknowledged");
      if (msg.iteration != current_iteration_ + 1)
        throw ProtocolError("KPI_BATCH iteration " + std::to_string(msg.iteration) +
                            " out of order, expected " + std::to_string(current_iteration_ + 1));
      current_iteration_ = msg.iteration;
      phase_ = Phase::AwaitAck;
      break;
    case MsgType::Handover:
      if (phase_ != Phase::AwaitAck)
        throw ProtocolError("HANDOVER outside a KPI_BATCH/ACK exchange");
      if (msg.iteration != current_iteration_)
        throw ProtocolError("HANDOVER iteration mismatch");
      break;
    case MsgType::Ack:
      if (phase_ != Phase::AwaitAck) throw ProtocolError("ACK without a pending KPI_BATCH");
      if (msg.iteration != current_iteration_) throw ProtocolError("ACK iteration mismatch");
      phase_ = Phase::AwaitBatch;
      ++completed_;
      break;
    case MsgType::End:
      if (phase_ != Phase::AwaitBatch) throw ProtocolError("END inside an open iteration");
      ended_ = true;
      break;
  }
}

}  // namespace steerlab::harness
