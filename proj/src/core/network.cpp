/*
 * Copyright 2026 The bedrock-sim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "bedrock/network.hpp"

#include <algorithm>
#include <string>

#include "bedrock/error.hpp"

namespace bedrock {

namespace {

constexpr NetKind kByRank[] = {NetKind::kResponse, NetKind::kFill,
                               NetKind::kCommand,  NetKind::kRequest,
                               NetKind::kMemResp,  NetKind::kMemCmd};

}  // namespace

Network::Network(int num_endpoints, const NetConfig& cfg)
    : cfg_(cfg),
      endpoints_(num_endpoints),
      channels_(static_cast<size_t>(num_endpoints) * num_endpoints * kNumNets),
      is_active_(channels_.size(), false),
      inbound_(static_cast<size_t>(num_endpoints) * kNumNets),
      reserved_(inbound_.size(), 0),
      credits_used_(num_endpoints, 0),
      rng_(cfg.seed) {
  if (cfg_.latency < 1 || cfg_.beat_bytes < 1 || cfg_.mem_credits < 1 ||
      cfg_.inbound_capacity < 1) {
    fail(ErrorCode::kInvalidArgument, "bad network configuration");
  }
}

size_t Network::channel_index(int src, int dst, NetKind net) const {
  return (static_cast<size_t>(src) * endpoints_ + dst) * kNumNets +
         static_cast<size_t>(net);
}

size_t Network::inbound_index(int dst, NetKind net) const {
  return static_cast<size_t>(dst) * kNumNets + static_cast<size_t>(net);
}

void Network::check_endpoint(int ep) const {
  if (ep < 0 || ep >= endpoints_)
    fail(ErrorCode::kOutOfRange, "endpoint " + std::to_string(ep));
}

bool Network::can_send(const Message& msg) const {
  NetKind net = msg.net();
  if (reserved_[inbound_index(msg.dst, net)] >= cfg_.inbound_capacity)
    return false;
  if (net == NetKind::kMemCmd && credits_used_[msg.src] >= cfg_.mem_credits)
    return false;
  return true;
}

SendResult Network::send(Message msg, uint64_t now) {
  check_endpoint(msg.src);
  check_endpoint(msg.dst);
  if (!can_send(msg)) return SendResult::kBackpressure;
  NetKind net = msg.net();
  size_t ci = channel_index(msg.src, msg.dst, net);
  Channel& ch = channels_[ci];
  uint64_t start = std::max(now, ch.free_at);
  uint64_t occupancy =
      static_cast<uint64_t>(std::max(1, msg.beats(cfg_.beat_bytes)));
  ch.free_at = start + occupancy;
  uint64_t ready_at = start + cfg_.latency + occupancy - 1;
  ++reserved_[inbound_index(msg.dst, net)];
  if (net == NetKind::kMemCmd) ++credits_used_[msg.src];
  ch.queue.push_back(InFlight{ready_at, std::move(msg)});
  ++ch.sent;
  ++total_sent_;
  if (!is_active_[ci]) {
    is_active_[ci] = true;
    active_.push_back(ci);
  }
  return SendResult::kAccepted;
}

void Network::deliver(uint64_t now) {
  if (active_.empty()) return;
  std::vector<size_t> order = active_;
  if (cfg_.random_permute) {
    std::shuffle(order.begin(), order.end(), rng_);
  } else {
    std::sort(order.begin(), order.end());
  }
  for (size_t ci : order) {
    Channel& ch = channels_[ci];
    while (!ch.queue.empty() && ch.queue.front().ready_at <= now) {
      Message& m = ch.queue.front().msg;
      inbound_[inbound_index(m.dst, m.net())].push_back(std::move(m));
      ch.queue.pop_front();
      ++ch.delivered;
    }
  }
  std::vector<size_t> still;
  still.reserve(active_.size());
  for (size_t ci : active_) {
    if (channels_[ci].queue.empty()) {
      is_active_[ci] = false;
    } else {
      still.push_back(ci);
    }
  }
  active_ = std::move(still);
}

const Message* Network::peek(int endpoint, NetKind net) const {
  const auto& q = inbound_[inbound_index(endpoint, net)];
  return q.empty() ? nullptr : &q.front();
}

Message Network::pop(int endpoint, NetKind net) {
  auto& q = inbound_[inbound_index(endpoint, net)];
  if (q.empty()) {
    fail(ErrorCode::kInternal, std::string("pop from empty ") +
                                   to_string(net) + " queue at endpoint " +
                                   std::to_string(endpoint));
  }
  Message m = std::move(q.front());
  q.pop_front();
  --reserved_[inbound_index(endpoint, net)];
  if (net == NetKind::kMemResp) --credits_used_[endpoint];
  return m;
}

std::optional<NetKind> Network::ready(int endpoint) const {
  for (NetKind n : kByRank) {
    if (peek(endpoint, n)) return n;
  }
  return std::nullopt;
}

size_t Network::inbound_size(int endpoint, NetKind net) const {
  return inbound_[inbound_index(endpoint, net)].size();
}

int Network::mem_credits_available(int endpoint) const {
  return cfg_.mem_credits - credits_used_[endpoint];
}

int Network::mem_credits_in_flight(int endpoint) const {
  return credits_used_[endpoint];
}

bool Network::idle() const {
  if (!active_.empty()) return false;
  for (const auto& q : inbound_) {
    if (!q.empty()) return false;
  }
  return true;
}

uint64_t Network::sent(int src, int dst, NetKind net) const {
  return channels_[channel_index(src, dst, net)].sent;
}

uint64_t Network::delivered(int src, int dst, NetKind net) const {
  return channels_[channel_index(src, dst, net)].delivered;
}

}  // namespace bedrock
