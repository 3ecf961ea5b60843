#include "steerlab/harness/loop.hpp"

#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <stdexcept>

#include "steerlab/harness/wire.hpp"

namespace steerlab::harness {

SimEngine::SimEngine(const ScenarioConfig& cfg) : cfg_(cfg), sim_(cfg) {
  if (!cfg_.attack.enabled) return;
  for (const auto& id : cfg_.malicious_cell_ids()) {
    attackers_.emplace(id, attack::ApateAttacker(
                               cfg_.attack, cfg_.ric, id,
                               static_cast<int>(cfg_.topology.ue_count),
                               cfg_.radio.max_throughput_bps, cfg_.radio.meas_period_prb_khz,
                               derive_seed(cfg_.seed, std::hash<std::string>{}(id))));
  }
}

void SimEngine::set_exact_oracle(const std::string& cell,
                                 attack::ApateAttacker::OracleFn oracle) {
  auto it = attackers_.find(cell);
  if (it != attackers_.end()) it->second.set_oracle(std::move(oracle));
}

netsim::KpiReportBatch SimEngine::tick(std::int64_t t) {
  sim_.step_mobility();
  netsim::KpiReportBatch batch = sim_.emit_reports();
  if (attackers_.empty()) return batch;

  std::map<std::string, attack::AdversarialReport> crafted;
  for (auto& [cell, attacker] : attackers_) {
    const netsim::CellKpiReport* own = nullptr;
    for (const auto& cr : batch.cell_reports) {
      if (cr.cell_id == cell) own = &cr;
    }
    if (own == nullptr) continue;
    std::vector<netsim::UeKpiReport> own_ues;
    for (const auto& ur : batch.ue_reports) {
      if (ur.serving_cell == cell) own_ues.push_back(ur);
    }
    attacker.observe(*own, own_ues, t);
    attacker.train_if_due(t);
    if (auto adv = attacker.craft(*own, t)) crafted.emplace(cell, std::move(*adv));
  }
  if (!crafted.empty()) {
    batch = attack::inject(batch, crafted, static_cast<int>(cfg_.topology.ue_count), &incidents_);
  }
  return batch;
}

int SimEngine::apply_handovers(const std::vector<netsim::HandoverRequest>& reqs) {
  int accepted = 0;
  for (const auto& r : reqs) {
    if (sim_.apply_handover(r)) ++accepted;
  }
  sim_.advance();
  return accepted;
}

std::vector<attack::CraftRecord> SimEngine::craft_records() const {
  std::vector<attack::CraftRecord> out;
  for (const auto& [_, attacker] : attackers_) {
    const auto& recs = attacker.records();
    out.insert(out.end(), recs.begin(), recs.end());
  }
  return out;
}

int SimEngine::skipped_top_category() const {
  int total = 0;
  for (const auto& [_, attacker] : attackers_) total += attacker.skipped_top_category();
  return total;
}

RicEngine::RicEngine(const ScenarioConfig& cfg)
    : cfg_(cfg), qp_(cfg.ric, cfg.radio, cfg.topology.cells) {
  cfg_.validate();
  policy_.handover_margin = cfg.ric.handover_margin;
  policy_.min_history = cfg.ric.min_history;
}

std::vector<netsim::HandoverRequest> RicEngine::on_batch(const netsim::KpiReportBatch& batch) {
  if (!store_.ingest(batch)) {
    throw std::runtime_error("kpimon: batch for iteration " + std::to_string(batch.iteration) +
                             " rejected (out of order or inconsistent)");
  }
  const std::int64_t t = batch.iteration;

  if (!ad_model_ && t + 1 >= cfg_.ric.ad.train_iterations) {
    ad_model_ = ric::ad_fit(store_, cfg_.ric.ad, cfg_.ric.ad.train_iterations, cfg_.seed);
  }

  std::vector<netsim::HandoverRequest> reqs;
  if (!ad_model_ || t + 1 < cfg_.ric.ad.train_iterations) return reqs;

  for (int ue : ric::ad_detect(store_, *ad_model_, t)) {
    const auto* rep = store_.ue_at(ue, t);
    if (rep == nullptr) continue;
    const std::string serving = rep->serving_cell;

    const auto serving_fc = qp_.serving_qoe(store_, ue, serving, t);
    if (!serving_fc) continue;

    std::vector<ric::QoeForecast> candidates;
    for (const auto& cell : qp_.neighbor_set(store_, ue, serving, t)) {
      if (auto fc = qp_.candidate_qoe(store_, ue, cell, serving, t)) {
        candidates.push_back(*fc);
      }
    }
    if (auto req = ric::ts_decide(*serving_fc, candidates, policy_, t)) {
      reqs.push_back(*req);
    }
  }
  return reqs;
}

std::optional<double> RicEngine::qp_exact_oracle(const std::string& cell,
                                                 const Vec& features) const {
  const std::int64_t t = store_.last_iteration();
  if (t < 0) return std::nullopt;

  // joint series of (mean served-UE throughput, reported aggregate), with the
  // hypothetical report appended as the newest point
  const std::int64_t t0 = std::max<std::int64_t>(0, t - cfg_.ric.fit_window + 2);
  std::vector<Vec> series;
  for (std::int64_t it = t0; it <= t; ++it) {
    const auto* cr = store_.cell_at(cell, it);
    if (cr == nullptr) return std::nullopt;
    double mean_thp = 0.0;
    int count = 0;
    for (int ue : store_.ue_ids()) {
      const auto* ur = store_.ue_at(ue, it);
      if (ur != nullptr && ur->serving_cell == cell) {
        mean_thp += ur->pdcp_thp_dl;
        ++count;
      }
    }
    if (count > 0) mean_thp /= count;
    series.push_back({mean_thp, cr->throughput_bps / std::max(1, cr->num_ues)});
  }
  const double hyp_agg = features[0] / std::max(1.0, features[2]);
  series.push_back({series.back()[0], hyp_agg});

  const auto needed = static_cast<std::size_t>(
      std::max<std::int64_t>(cfg_.ric.min_history,
                             static_cast<std::int64_t>(cfg_.ric.var_order) * 2 + cfg_.ric.var_order + 1));
  if (series.size() < needed) return std::nullopt;
  try {
    const auto model = ric::var_fit(series, cfg_.ric.var_order);
    return model.forecast(series, cfg_.ric.forecast_horizon)[1];
  } catch (const ric::InsufficientHistory&) {
    return std::nullopt;
  }
}

RunResult run_closed_loop(const ScenarioConfig& cfg) {
  RunResult result;
  SimEngine sim(cfg);
  RicEngine ric(cfg);

  if (cfg.attack.enabled && cfg.attack.oracle_mode == "exact_oracle") {
    for (const auto& id : cfg.malicious_cell_ids()) {
      sim.set_exact_oracle(id, [&ric, id](const Vec& features) {
        return ric.qp_exact_oracle(id, features);
      });
    }
  }

  try {
    for (std::int64_t t = 0; t < cfg.iterations; ++t) {
      const auto batch = sim.tick(t);
      const auto reqs = ric.on_batch(batch);
      result.metrics.record(batch, static_cast<int>(reqs.size()));
      sim.apply_handovers(reqs);
    }
  } catch (const std::exception& e) {
    result.aborted = true;
    result.diagnostic = e.what();
  }

  result.store = ric.take_store();
  result.craft_records = sim.craft_records();
  result.incidents = sim.incidents();
  result.skipped_top_category = sim.skipped_top_category();
  return result;
}

namespace {

/// Simulator side of the split run; executes in the forked child.
int serve_simulator(const ScenarioConfig& cfg, int fd) {
  try {
    FrameChannel ch(fd);
    SimEngine sim(cfg);
    LockstepValidator lockstep;

    for (std::int64_t t = 0; t < cfg.iterations; ++t) {
      const auto batch = sim.tick(t);
      WireMessage out{MsgType::KpiBatch, t, kSchemaVersion, batch_to_json(batch)};
      lockstep.observe(out);
      ch.send(out);

      std::vector<netsim::HandoverRequest> reqs;
      while (true) {
        const WireMessage in = ch.recv();
        lockstep.observe(in);
        if (in.type == MsgType::Handover) {
          reqs.push_back(handover_from_json(in.body));
        } else if (in.type == MsgType::Ack) {
          break;
        } else {
          throw ProtocolError("simulator: unexpected " + msg_type_name(in.type));
        }
      }
      sim.apply_handovers(reqs);
    }

    WireMessage end{MsgType::End, cfg.iterations, kSchemaVersion, {}};
    lockstep.observe(end);
    ch.send(end);
    const WireMessage peer = ch.recv();
    if (peer.type != MsgType::End) return 3;
    return 0;
  } catch (...) {
    return 2;
  }
}

}  // namespace

RunResult run_split(const ScenarioConfig& cfg) {
  RunResult result;

  int fds[2];
  if (::socketpair(AF_UNIX, SOCK_STREAM, 0, fds) != 0) {
    result.aborted = true;
    result.diagnostic = "run_split: socketpair failed";
    return result;
  }

  const pid_t pid = ::fork();
  if (pid < 0) {
    ::close(fds[0]);
    ::close(fds[1]);
    result.aborted = true;
    result.diagnostic = "run_split: fork failed";
    return result;
  }

  if (pid == 0) {
    ::close(fds[0]);
    const int rc = serve_simulator(cfg, fds[1]);
    ::_exit(rc);
  }

  ::close(fds[1]);
  {
    FrameChannel ch(fds[0]);
    RicEngine ric(cfg);
    LockstepValidator lockstep;
    try {
      for (std::int64_t t = 0; t < cfg.iterations; ++t) {
        const WireMessage in = ch.recv();
        lockstep.observe(in);
        if (in.type != MsgType::KpiBatch) {
          throw ProtocolError("ric: expected KPI_BATCH, got " + msg_type_name(in.type));
        }
        const auto batch = batch_from_json(in.body);
        const auto reqs = ric.on_batch(batch);
        result.metrics.record(batch, static_cast<int>(reqs.size()));
        for (const auto& r : reqs) {
          WireMessage out{MsgType::Handover, t, kSchemaVersion, handover_to_json(r)};
          lockstep.observe(out);
          ch.send(out);
        }
        WireMessage ack{MsgType::Ack, t, kSchemaVersion, {}};
        lockstep.observe(ack);
        ch.send(ack);
      }
      const WireMessage end_in = ch.recv();
      lockstep.observe(end_in);
      if (end_in.type != MsgType::End) throw ProtocolError("ric: expected END");
      ch.send(WireMessage{MsgType::End, cfg.iterations, kSchemaVersion, {}});
    } catch (const std::exception& e) {
      result.aborted = true;
      result.diagnostic = e.what();
    }
    result.store = ric.take_store();
  }

  int status = 0;
  ::waitpid(pid, &status, 0);
  if (!result.aborted && (!WIFEXITED(status) || WEXITSTATUS(status) != 0)) {
    result.aborted = true;
    result.diagnostic = "run_split: simulator process exited abnormally (status " +
                        std::to_string(status) + ")";
  }
  return result;
}

RunResult run_scenario(const ScenarioConfig& cfg) {
  return cfg.mode == "split" ? run_split(cfg) : run_closed_loop(cfg);
}

}  // namespace steerlab::harness
