#include "tandemq/tandem_network.hpp"

#include <cmath>
#include <string>

#include "tandemq/errors.hpp"

namespace tandemq {

TandemConfig link_stages(const QueueParams& stage1, double mu2, int c2,
                         Linkage linkage) {
    const auto v1 = check_stability(stage1);
    if (!v1.stable) {
        throw UnstableError("link_stages: stage one is unstable (phi = " +
                                std::to_string(v1.phi) + ")",
                            v1.phi);
    }
    QueueParams stage2;
    stage2.lambda = (linkage == Linkage::ServiceRateAsArrival) ? stage1.mu
                                                               : stage1.lambda;
    stage2.mu = mu2;
    stage2.servers = c2;
    const auto v2 = check_stability(stage2);
    if (!v2.stable) {
        throw UnstableError("link_stages: stage two is unstable (phi = " +
                                std::to_string(v2.phi) + ")",
                            v2.phi);
    }
    return {stage1, stage2, linkage};
}

NetworkMetrics network_metrics(const TandemConfig& cfg, int n, double alpha) {
    const auto m1 = station_metrics(cfg.stage1);
    const auto m2 = station_metrics(cfg.stage2);
    const auto v1 = station_variances(cfg.stage1);
    const auto v2 = station_variances(cfg.stage2);

    NetworkMetrics net;
    net.mean_in_network = m1.mean_in_system + m2.mean_in_system;
    net.mean_queue = m1.mean_queue_length + m2.mean_queue_length;
    net.mean_sojourn = m1.mean_sojourn + m2.mean_sojourn;
    net.mean_wait = m1.mean_wait + m2.mean_wait;

    const double var_n = v1.var_in_system + v2.var_in_system;
    const double var_q = v1.var_queue_length + v2.var_queue_length;
    const double var_t = v1.var_sojourn + v2.var_sojourn;
    const double var_w = v1.var_wait + v2.var_wait;
    net.sd_in_network = std::sqrt(var_n);
    net.sd_queue = std::sqrt(var_q);
    net.sd_sojourn = std::sqrt(var_t);
    net.sd_wait = std::sqrt(var_w);

    net.ci_in_network = confidence_interval(net.mean_in_network, var_n, n, alpha);
    net.ci_queue = confidence_interval(net.mean_queue, var_q, n, alpha);
    net.ci_sojourn = confidence_interval(net.mean_sojourn, var_t, n, alpha);
    net.ci_wait = confidence_interval(net.mean_wait, var_w, n, alpha);
    return net;
}

} // namespace tandemq
