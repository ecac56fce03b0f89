#include "evac/rnn.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace evac {

RnnState make_rnn(std::size_t n, const RnnInit& init) {
    if (n == 0) throw RnnError("an RNN needs at least one neuron");
    RnnState state;
    state.n = n;
    state.w_plus.assign(n * n, 0.0);
    state.w_minus.assign(n * n, 0.0);
    if (n > 1) {
        const double w = init.total_fire_rate / (2.0 * static_cast<double>(n - 1));
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (i == j) continue;
                state.wp(i, j) = w;
                state.wm(i, j) = w;
            }
        }
    }
    state.Lambda.assign(n, init.Lambda);
    state.lambda_ext.assign(n, init.lambda_ext);
    state.q.assign(n, 0.0);
    recompute_fire_rates(state);
    solve_excitation(state);
    return state;
}

void recompute_fire_rates(RnnState& state) {
    state.r.assign(state.n, 0.0);
    for (std::size_t i = 0; i < state.n; ++i) {
        double sum = 0.0;
        for (std::size_t m = 0; m < state.n; ++m) sum += state.wp(i, m) + state.wm(i, m);
        state.r[i] = sum;
    }
}

namespace {

// One evaluation of the right-hand side of the excitation equations, clipped to range.
void excitation_map(const RnnState& s, const std::vector<double>& q, std::vector<double>& out, bool& clipped) {
    clipped = false;
    for (std::size_t i = 0; i < s.n; ++i) {
        double plus = s.Lambda[i];
        double minus = s.lambda_ext[i];
        for (std::size_t j = 0; j < s.n; ++j) {
            plus += q[j] * s.wp(j, i);
            minus += q[j] * s.wm(j, i);
        }
        const double denom = s.r[i] + minus;
        double value;
        if (denom > 0.0) {
            value = plus / denom;
        } else {
            value = plus > 0.0 ? kMaxExcitation : 0.0;
        }
        if (value > kMaxExcitation) {
            value = kMaxExcitation;
            clipped = true;
        }
        out[i] = value;
    }
}

}  // namespace

double excitation_residual(const RnnState& state) {
    std::vector<double> mapped(state.n);
    bool clipped = false;
    excitation_map(state, state.q, mapped, clipped);
    double worst = 0.0;
    for (std::size_t i = 0; i < state.n; ++i) worst = std::max(worst, std::abs(mapped[i] - state.q[i]));
    return worst;
}

ExcitationSolve solve_excitation(RnnState& state, const SolveOptions& options) {
    ExcitationSolve result;
    std::vector<double> q = options.warm_start && state.q.size() == state.n ? state.q : std::vector<double>(state.n, 0.0);
    std::vector<double> mapped(state.n);
    const double beta = options.damping;

    for (int it = 0; it < options.max_iterations; ++it) {
        excitation_map(state, q, mapped, result.clipped);
        double residual = 0.0;
        for (std::size_t i = 0; i < state.n; ++i) residual = std::max(residual, std::abs(mapped[i] - q[i]));
        result.iterations = it;
        result.residual = residual;
        if (residual < options.tolerance) break;
        for (std::size_t i = 0; i < state.n; ++i) q[i] = (1.0 - beta) * q[i] + beta * mapped[i];
    }
    state.q = std::move(q);
    if (!(result.residual < 1e-9)) {
        throw RnnError("excitation solve did not converge, residual " + std::to_string(result.residual));
    }
    return result;
}

ThresholdState::ThresholdState(double smoothing) : smoothing_(smoothing) {
    if (!(smoothing > 0.0 && smoothing < 1.0)) {
        throw std::invalid_argument("threshold smoothing must lie in (0, 1), got " + std::to_string(smoothing));
    }
}

void ThresholdState::update(double reward) {
    if (reward < 0.0) throw std::invalid_argument("reward must be non-negative");
    if (!initialized_) {
        value_ = 0.0;
        initialized_ = true;
        return;
    }
    value_ = smoothing_ * value_ + (1.0 - smoothing_) * reward;
}

ExcitationSolve reinforce(RnnState& state, std::size_t winner, double reward, double threshold_prev,
                          const SolveOptions& options) {
    const std::size_t n = state.n;
    if (winner >= n) throw std::out_of_range("winner neuron out of range");
    if (reward < 0.0 || threshold_prev < 0.0) throw std::invalid_argument("reward and threshold must be >= 0");

    const double delta = std::abs(reward - threshold_prev);
    const bool rewarded = threshold_prev <= reward;
    auto& strong = rewarded ? state.w_plus : state.w_minus;
    auto& weak = rewarded ? state.w_minus : state.w_plus;

    std::vector<double> r_before(n);
    for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (std::size_t m = 0; m < n; ++m) sum += state.wp(i, m) + state.wm(i, m);
        r_before[i] = sum;
    }

    if (n >= 2) {
        const double side = delta / static_cast<double>(std::max<std::size_t>(n - 2, 1));
        // Only rows other than the winner change: each gains delta on the winner and delta
        // spread over its n - 2 remaining links.
        for (std::size_t i = 0; i < n; ++i) {
            if (i == winner) continue;
            strong[i * n + winner] += delta;
            for (std::size_t k = 0; k < n; ++k) {
                if (k != winner && k != i) weak[i * n + k] += side;
            }
        }
    }

    for (std::size_t i = 0; i < n; ++i) {
        double r_after = 0.0;
        for (std::size_t m = 0; m < n; ++m) r_after += state.wp(i, m) + state.wm(i, m);
        if (r_after > 0.0 && r_before[i] > 0.0) {
            const double scale = r_before[i] / r_after;
            for (std::size_t m = 0; m < n; ++m) {
                state.wp(i, m) *= scale;
                state.wm(i, m) *= scale;
            }
        }
    }
    state.r = std::move(r_before);
    return solve_excitation(state, options);
}

std::size_t most_excited(const RnnState& state) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < state.q.size(); ++i) {
        if (state.q[i] > state.q[best]) best = i;
    }
    return best;
}

}  // namespace evac
