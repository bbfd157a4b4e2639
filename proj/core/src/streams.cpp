#include "crpnet/streams.hpp"

namespace crpnet {

namespace {
constexpr std::uint64_t kPhi = 0x9E3779B97F4A7C15ULL;
}

PrimitiveStreams::PrimitiveStreams(const NetworkSpec& net, std::uint64_t seed,
                                   std::uint64_t replication)
    : net_(&net), seed_(seed), replication_(replication) {
  const int m = net.num_buffers;
  const int n = net.num_activities;
  const std::uint64_t rep_key = splitmix64(seed + kPhi * replication);
  stream_key_.resize(m + 2 * n);
  counter_.assign(m + 2 * n, 0);
  for (std::size_t s = 0; s < stream_key_.size(); ++s) {
    stream_key_[s] = splitmix64(rep_key + kPhi * (s + 1));
  }
}

double PrimitiveStreams::u01(int stream) {
  const std::uint64_t bits = splitmix64(stream_key_[stream] + kPhi * counter_[stream]++);
  // 53-bit mantissa shifted into the open interval (0,1).
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

double PrimitiveStreams::draw_interarrival(int buffer) {
  const double lambda = net_->arrival_rate(buffer);
  if (lambda == 0.0) {
    throw ZeroRateError("buffer " + std::to_string(buffer) + " has zero arrival rate");
  }
  const int stream = buffer;
  return net_->interarrival[buffer].sample([&] { return u01(stream); }) / lambda;
}

double PrimitiveStreams::draw_service(int activity) {
  const int stream = net_->num_buffers + activity;
  return net_->mean_service(activity) *
         net_->service[activity].sample([&] { return u01(stream); });
}

int PrimitiveStreams::draw_route(int activity) {
  const int stream = net_->num_buffers + net_->num_activities + activity;
  const double u = u01(stream);
  double acc = 0.0;
  for (int l = 0; l < net_->num_buffers; ++l) {
    acc += net_->routing(activity, l);
    if (u < acc) return l + 1;
  }
  return 0;  // exit with the leftover probability
}

std::uint64_t PrimitiveStreams::interarrival_counter(int buffer) const {
  return counter_[buffer];
}

std::uint64_t PrimitiveStreams::service_counter(int activity) const {
  return counter_[net_->num_buffers + activity];
}

std::uint64_t PrimitiveStreams::route_counter(int activity) const {
  return counter_[net_->num_buffers + net_->num_activities + activity];
}

}  // namespace crpnet
