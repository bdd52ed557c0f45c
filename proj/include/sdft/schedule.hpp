#pragma once

#include <string>
#include <vector>

#include "sdft/errors.hpp"

namespace sdft {

enum class ScheduleFamily { linear, cosine };

std::string to_string(ScheduleFamily f);
ScheduleFamily schedule_family_from_string(const std::string& s);

// Discrete noise schedule over t in [1..T]: per-timestep beta, alpha = 1-beta,
// alpha_bar = prod alpha, and snr = alpha_bar/(1-alpha_bar). Immutable after
// construction and freely shareable.
class NoiseSchedule {
public:
    static NoiseSchedule make(ScheduleFamily family, int T, double beta_start, double beta_end);

    int T() const { return static_cast<int>(beta_.size()); }
    double beta(int t) const { return beta_[index(t)]; }
    double alpha(int t) const { return alpha_[index(t)]; }
    double alpha_bar(int t) const { return alpha_bar_[index(t)]; }
    double snr(int t) const { return snr_[index(t)]; }

    // alpha_bar extended with the empty-product convention alpha_bar(0) = 1.
    double alpha_bar_or_one(int t) const { return t == 0 ? 1.0 : alpha_bar(t); }

    ScheduleFamily family() const { return family_; }
    double beta_start() const { return beta_start_; }
    double beta_end() const { return beta_end_; }

private:
    NoiseSchedule() = default;
    size_t index(int t) const {
        if (t < 1 || t > T()) {
            throw ParameterError("timestep " + std::to_string(t) + " out of range [1.." +
                                 std::to_string(T()) + "]");
        }
        return static_cast<size_t>(t - 1);
    }

    ScheduleFamily family_ = ScheduleFamily::linear;
    double beta_start_ = 0.0, beta_end_ = 0.0;
    std::vector<double> beta_, alpha_, alpha_bar_, snr_;
};

enum class WeightKind { simple, constant_one, p2, sdft, min_snr };

std::string to_string(WeightKind k);
WeightKind weight_kind_from_string(const std::string& s);

// Timestep weighting selector. `gamma` is the exponent for p2/sdft and the
// clamp for min_snr; `k` is the offset in the (k + SNR)^gamma denominator.
struct WeightingScheme {
    WeightKind kind = WeightKind::simple;
    double k = 1.0;
    double gamma = 0.0;
};

// Effective coefficient multiplied into the per-timestep squared error. The
// simple weight cancels the objective's beta_t/((1-beta_t)(1-alpha_bar_t))
// factor, so `simple` and `constant_one` both come out as 1; p2/sdft give
// 1/(k+SNR(t))^gamma and min_snr gives min{SNR(t), gamma}.
double weight(const WeightingScheme& scheme, const NoiseSchedule& s, int t);

}  // namespace sdft
