#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "urbansense/envelope.hpp"

namespace urbansense {

struct ChannelModel {
    double loss_probability = 0.0;
    std::uint64_t seed = 0;
    /// Node falls permanently silent at this instant (inclusive).
    std::map<std::string, UnixSeconds> dropout_at;

    /// Throws ParamError unless loss_probability is in [0, 1).
    void validate() const;
};

enum class Delivery { Delivered, Lost, DroppedOut };

/// Deterministic per (seed, dev_eui, fcnt).
Delivery channel_outcome(const UplinkEnvelope &env, const ChannelModel &ch);

inline bool channel_deliver(const UplinkEnvelope &env, const ChannelModel &ch) {
    return channel_outcome(env, ch) == Delivery::Delivered;
}

} // namespace urbansense
