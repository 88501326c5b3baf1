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

#ifndef BEDROCK_NETWORK_HPP_
#define BEDROCK_NETWORK_HPP_

#include <cstdint>
#include <deque>
#include <optional>
#include <random>
#include <vector>

#include "bedrock/message.hpp"

namespace bedrock {

struct NetConfig {
  int latency = 1;
  int beat_bytes = 8;
  int mem_credits = 8;
  int inbound_capacity = 64;
  bool random_permute = false;
  uint64_t seed = 1;
};

enum class SendResult { kAccepted, kBackpressure };

class Network {
 public:
  Network(int num_endpoints, const NetConfig& cfg);

  const NetConfig& config() const { return cfg_; }
  int num_endpoints() const { return endpoints_; }

  bool can_send(const Message& msg) const;
  SendResult send(Message msg, uint64_t now);

  // Moves every message whose delivery time has arrived into its
  // destination's inbound queue.
  void deliver(uint64_t now);

  const Message* peek(int endpoint, NetKind net) const;
  Message pop(int endpoint, NetKind net);
  // Highest-priority network with a deliverable message, if any.
  std::optional<NetKind> ready(int endpoint) const;
  size_t inbound_size(int endpoint, NetKind net) const;

  int mem_credits_available(int endpoint) const;
  int mem_credits_in_flight(int endpoint) const;

  bool idle() const;
  uint64_t sent(int src, int dst, NetKind net) const;
  uint64_t delivered(int src, int dst, NetKind net) const;
  uint64_t total_sent() const { return total_sent_; }

 private:
  struct InFlight {
    uint64_t ready_at;
    Message msg;
  };
  struct Channel {
    std::deque<InFlight> queue;
    uint64_t free_at = 0;
    uint64_t sent = 0;
    uint64_t delivered = 0;
  };

  size_t channel_index(int src, int dst, NetKind net) const;
  size_t inbound_index(int dst, NetKind net) const;
  void check_endpoint(int ep) const;

  NetConfig cfg_;
  int endpoints_;
  std::vector<Channel> channels_;
  std::vector<size_t> active_;
  std::vector<bool> is_active_;
  std::vector<std::deque<Message>> inbound_;
  std::vector<int> reserved_;  // in flight + queued per (dst, net)
  std::vector<int> credits_used_;
  std::mt19937_64 rng_;
  uint64_t total_sent_ = 0;
};

}  // namespace bedrock

#endif  // BEDROCK_NETWORK_HPP_
