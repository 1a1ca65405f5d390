#include "urbansense/channel.hpp"

#include "urbansense/errors.hpp"
#include "urbansense/random.hpp"

namespace urbansense {

void ChannelModel::validate() const {
    if (!(loss_probability >= 0.0 && loss_probability < 1.0)) throw ParamError("loss_probability must be in [0, 1)");
}

Delivery channel_outcome(const UplinkEnvelope &env, const ChannelModel &ch) {
    if (auto it = ch.dropout_at.find(env.dev_eui); it != ch.dropout_at.end() && env.received_at >= it->second) {
        return Delivery::DroppedOut;
    }
    if (ch.loss_probability <= 0.0) return Delivery::Delivered;
    const double u = to_unit(hash_keys({ch.seed, hash_string(env.dev_eui), env.fcnt, 0x10557ULL}));
    return u < ch.loss_probability ? Delivery::Lost : Delivery::Delivered;
}

} // namespace urbansense
