#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <numeric>
#include <vector>

#include <Eigen/Core>

#include "lta/error.hpp"
#include "lta/json_util.hpp"

namespace lta::fremen {

/// Binary entropy in bits. Defined as 0 at p = 0 and p = 1.
template <typename Scalar>
Scalar binary_entropy(Scalar p) {
    if (p <= Scalar(0) || p >= Scalar(1)) return Scalar(0);
    return -p * std::log2(p) - (Scalar(1) - p) * std::log2(Scalar(1) - p);
}

template <typename Scalar>
struct BasicPrediction {
    Scalar p;  // probability of state 1
    Scalar h;  // entropy of p in bits
};

/// Day and week harmonics, in hours.
inline std::vector<double> default_periods_hours() {
    return {1, 2, 3, 4, 6, 8, 12, 24, 48, 72, 96, 120, 144, 168};
}

inline std::vector<double> default_periods_seconds() {
    auto hours = default_periods_hours();
    for (auto& h : hours) h *= 3600.0;
    return hours;
}

template <typename Scalar>
struct BasicFremenOptions {
    std::vector<Scalar> periods_s;
    int order = 2;
    Scalar epsilon = Scalar(0.01);

    static BasicFremenOptions defaults() {
        BasicFremenOptions o;
        for (double p : default_periods_seconds()) o.periods_s.push_back(static_cast<Scalar>(p));
        return o;
    }
};

/// Spectral model of a binary process observed at irregular instants.
///
/// Keeps, for each candidate angular frequency w_j, the running sums
///   S_j = sum_i s_i exp(-i w_j t_i)   and   U_j = sum_i exp(-i w_j t_i).
/// rebuild() turns them into mean-corrected coefficients
///   gamma_j = S_j / n - mu * U_j / n
/// and keeps the `order` largest by magnitude. Predictions are
///   p(t) = clamp(mu + sum_retained 2 Re(gamma_j exp(i w_j t)), eps, 1 - eps).
template <typename Scalar>
class BasicFremenModel {
public:
    using Complex = std::complex<Scalar>;
    using ComplexVector = Eigen::Matrix<Complex, Eigen::Dynamic, 1>;
    using RealVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    using Options = BasicFremenOptions<Scalar>;
    using Prediction = BasicPrediction<Scalar>;

    struct Component {
        std::size_t index;  // into periods()
        Scalar period_s;
        Scalar omega;
        Complex gamma;
    };

    BasicFremenModel() : BasicFremenModel(Options::defaults()) {}

    explicit BasicFremenModel(Options options) : options_(std::move(options)) {
        if (options_.order < 0) throw ValidationError("fremen: order must be >= 0");
        if (!(options_.epsilon > Scalar(0) && options_.epsilon < Scalar(0.5)))
            throw ValidationError("fremen: epsilon must lie in (0, 0.5)");
        const auto m = static_cast<Eigen::Index>(options_.periods_s.size());
        omegas_.resize(m);
        for (Eigen::Index j = 0; j < m; ++j) {
            const Scalar period = options_.periods_s[static_cast<std::size_t>(j)];
            if (!(period > Scalar(0))) throw ValidationError("fremen: candidate periods must be > 0");
            omegas_[j] = Scalar(2) * std::numbers::pi_v<Scalar> / period;
        }
        state_sums_ = ComplexVector::Zero(m);
        unit_sums_ = ComplexVector::Zero(m);
        gammas_ = ComplexVector::Zero(m);
    }

    void add_observation(Scalar t, bool state) {
        if (!std::isfinite(t)) throw ValidationError("fremen: observation time must be finite");
        for (Eigen::Index j = 0; j < omegas_.size(); ++j) {
            const Scalar phase = omegas_[j] * t;
            const Complex e(std::cos(phase), -std::sin(phase));
            unit_sums_[j] += e;
            if (state) state_sums_[j] += e;
        }
        ++count_;
        if (state) sum_states_ += Scalar(1);
        stale_ = true;
    }

    void rebuild() {
        if (count_ == 0) throw EmptyModelError("fremen: cannot rebuild a model with no observations");
        const Scalar n = static_cast<Scalar>(count_);
        mean_ = sum_states_ / n;
        gammas_ = state_sums_ / n - mean_ * unit_sums_ / n;

        std::vector<std::size_t> order(static_cast<std::size_t>(gammas_.size()));
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [this](std::size_t a, std::size_t b) {
            return std::abs(gammas_[static_cast<Eigen::Index>(a)]) >
                   std::abs(gammas_[static_cast<Eigen::Index>(b)]);
        });
        const std::size_t keep = std::min(order.size(), static_cast<std::size_t>(options_.order));
        components_.clear();
        for (std::size_t k = 0; k < keep; ++k) {
            const auto j = static_cast<Eigen::Index>(order[k]);
            components_.push_back({order[k], options_.periods_s[order[k]], omegas_[j], gammas_[j]});
        }
        stale_ = false;
        rebuilt_ = true;
    }

    Scalar raw_probability(Scalar t) const {
        check_ready();
        Scalar p = mean_;
        for (const auto& c : components_) {
            const Complex rot(std::cos(c.omega * t), std::sin(c.omega * t));
            p += Scalar(2) * (c.gamma * rot).real();
        }
        return p;
    }

    Prediction predict(Scalar t) const {
        const Scalar p = std::clamp(raw_probability(t), options_.epsilon, Scalar(1) - options_.epsilon);
        return {p, binary_entropy(p)};
    }

    std::size_t count() const { return count_; }
    Scalar sum_states() const { return sum_states_; }
    bool empty() const { return count_ == 0; }
    bool stale() const { return stale_; }
    bool rebuilt() const { return rebuilt_; }
    Scalar mean() const { return mean_; }

    const Options& options() const { return options_; }
    const std::vector<Scalar>& periods() const { return options_.periods_s; }
    const RealVector& omegas() const { return omegas_; }
    const ComplexVector& state_sums() const { return state_sums_; }
    const ComplexVector& unit_sums() const { return unit_sums_; }
    /// Coefficients for every candidate as of the last rebuild.
    const ComplexVector& coefficients() const { return gammas_; }
    /// Retained components, largest magnitude first.
    const std::vector<Component>& components() const { return components_; }

    /// Restores raw sums (deserialization path). Leaves the model stale.
    void restore(std::size_t count, Scalar sum_states, ComplexVector state_sums, ComplexVector unit_sums) {
        if (state_sums.size() != omegas_.size() || unit_sums.size() != omegas_.size())
            throw ValidationError("fremen: sum vectors do not match the candidate set");
        if (sum_states < Scalar(0) || sum_states > static_cast<Scalar>(count))
            throw ValidationError("fremen: sum_s outside [0, n]");
        count_ = count;
        sum_states_ = sum_states;
        state_sums_ = std::move(state_sums);
        unit_sums_ = std::move(unit_sums);
        stale_ = count_ > 0;
        rebuilt_ = false;
        mean_ = Scalar(0);
        components_.clear();
    }

private:
    void check_ready() const {
        if (count_ == 0) throw EmptyModelError("fremen: prediction from an empty model");
        if (stale_ || !rebuilt_) throw StaleModelError("fremen: model has observations newer than its last rebuild");
    }

    Options options_;
    RealVector omegas_;
    ComplexVector state_sums_;
    ComplexVector unit_sums_;
    ComplexVector gammas_;
    std::vector<Component> components_;
    std::size_t count_ = 0;
    Scalar sum_states_ = Scalar(0);
    Scalar mean_ = Scalar(0);
    bool stale_ = false;
    bool rebuilt_ = false;
};

using FremenOptions = BasicFremenOptions<double>;
using FremenModel = BasicFremenModel<double>;
using Prediction = BasicPrediction<double>;

constexpr int kSchemaVersion = 1;

/// Serialized form: raw sums plus options. A model that was rebuilt when saved
/// is rebuilt again on load, which reproduces its coefficients exactly.
Json to_json(const FremenModel& model);
FremenModel from_json(const Json& doc);

}  // namespace lta::fremen
