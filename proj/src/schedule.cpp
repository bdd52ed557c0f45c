#include "sdft/schedule.hpp"

#include <algorithm>
#include <cmath>

namespace sdft {

std::string to_string(ScheduleFamily f) {
    return f == ScheduleFamily::linear ? "linear" : "cosine";
}

ScheduleFamily schedule_family_from_string(const std::string& s) {
    if (s == "linear") return ScheduleFamily::linear;
    if (s == "cosine") return ScheduleFamily::cosine;
    throw ParameterError("unknown schedule family '" + s + "' (expected linear|cosine)");
}

std::string to_string(WeightKind k) {
    switch (k) {
        case WeightKind::simple: return "simple";
        case WeightKind::constant_one: return "constant";
        case WeightKind::p2: return "p2";
        case WeightKind::sdft: return "sdft";
        case WeightKind::min_snr: return "min_snr";
    }
    return "?";
}

WeightKind weight_kind_from_string(const std::string& s) {
    if (s == "simple") return WeightKind::simple;
    if (s == "constant") return WeightKind::constant_one;
    if (s == "p2") return WeightKind::p2;
    if (s == "sdft") return WeightKind::sdft;
    if (s == "min_snr") return WeightKind::min_snr;
    throw ParameterError("unknown weighting scheme '" + s +
                         "' (expected simple|constant|p2|sdft|min_snr)");
}

NoiseSchedule NoiseSchedule::make(ScheduleFamily family, int T, double beta_start, double beta_end) {
    if (T < 1) throw ParameterError("schedule needs T >= 1, got " + std::to_string(T));

    NoiseSchedule s;
    s.family_ = family;
    s.beta_start_ = beta_start;
    s.beta_end_ = beta_end;
    s.beta_.resize(static_cast<size_t>(T));

    if (family == ScheduleFamily::linear) {
        if (!(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0)) {
            throw ParameterError("linear schedule needs 0 < beta_start <= beta_end < 1, got [" +
                                 std::to_string(beta_start) + ", " + std::to_string(beta_end) + "]");
        }
        for (int t = 1; t <= T; ++t) {
            s.beta_[t - 1] = T == 1 ? beta_start
                                    : beta_start + (beta_end - beta_start) *
                                                       (static_cast<double>(t - 1) / (T - 1));
        }
    } else {
        // Squared-cosine alpha_bar with the usual 0.008 offset; betas derived
        // from consecutive ratios and clipped at 0.999.
        const double offset = 0.008;
        const double pi = 3.141592653589793238462643383279502884;
        auto abar = [&](double step) {
            const double f = std::cos((step / T + offset) / (1.0 + offset) * pi / 2.0);
            return f * f;
        };
        const double f0 = abar(0.0);
        double prev = f0;
        for (int t = 1; t <= T; ++t) {
            const double cur = abar(static_cast<double>(t));
            s.beta_[t - 1] = std::min(1.0 - cur / prev, 0.999);
            prev = cur;
        }
    }

    s.alpha_.resize(s.beta_.size());
    s.alpha_bar_.resize(s.beta_.size());
    s.snr_.resize(s.beta_.size());
    double running = 1.0;
    for (size_t i = 0; i < s.beta_.size(); ++i) {
        s.alpha_[i] = 1.0 - s.beta_[i];
        running *= s.alpha_[i];
        s.alpha_bar_[i] = running;
        s.snr_[i] = running / (1.0 - running);
    }
    return s;
}

double weight(const WeightingScheme& scheme, const NoiseSchedule& s, int t) {
    if (scheme.gamma < 0.0) {
        throw ParameterError("weighting gamma must be >= 0, got " + std::to_string(scheme.gamma));
    }
    switch (scheme.kind) {
        case WeightKind::simple:
        case WeightKind::constant_one:
            s.snr(t);  // range check
            return 1.0;
        case WeightKind::p2:
        case WeightKind::sdft: {
            if (!(scheme.k > 0.0)) {
                throw ParameterError("p2/sdft weighting needs k > 0, got " + std::to_string(scheme.k));
            }
            if (scheme.gamma == 0.0) {
                s.snr(t);
                return 1.0;
            }
            // exp/log form keeps large gammas (e.g. 50) away from overflow in
            // the intermediate power.
            return std::exp(-scheme.gamma * std::log(scheme.k + s.snr(t)));
        }
        case WeightKind::min_snr:
            return std::min(s.snr(t), scheme.gamma);
    }
    throw ParameterError("invalid weighting kind");
}

}  // namespace sdft
