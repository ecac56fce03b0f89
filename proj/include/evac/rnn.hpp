#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace evac {

/// Recurrent random neural network hosted by one decision node. Neuron k stands for the
/// node's k-th neighbour. Weight matrices are row-major: w_plus[i * n + j] is w+(i, j),
/// the rate at which neuron i sends excitatory spikes to neuron j.
struct RnnState {
    std::size_t n = 0;
    std::vector<double> w_plus;
    std::vector<double> w_minus;
    std::vector<double> Lambda;      // external excitatory arrival rate per neuron
    std::vector<double> lambda_ext;  // external inhibitory arrival rate per neuron
    std::vector<double> q;           // excitation probabilities
    std::vector<double> r;           // total fire rate per neuron

    double& wp(std::size_t i, std::size_t j) { return w_plus[i * n + j]; }
    double& wm(std::size_t i, std::size_t j) { return w_minus[i * n + j]; }
    double wp(std::size_t i, std::size_t j) const { return w_plus[i * n + j]; }
    double wm(std::size_t i, std::size_t j) const { return w_minus[i * n + j]; }
};

struct RnnInit {
    double total_fire_rate = 1.0;  // split evenly over the 2(n-1) off-diagonal weights of a row
    double Lambda = 0.25;
    double lambda_ext = 0.0;
};

/// Uniform network: w+(i,j) = w-(i,j) = rate / (2(n-1)) off the diagonal. q is solved.
RnnState make_rnn(std::size_t n, const RnnInit& init = {});

/// r(i) = sum_m [w+(i,m) + w-(i,m)].
void recompute_fire_rates(RnnState& state);

class RnnError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SolveOptions {
    bool warm_start = false;  // start from the stored q instead of 0
    double damping = 0.8;     // weight of the new iterate
    int max_iterations = 10'000;
    double tolerance = 1e-13;
};

struct ExcitationSolve {
    int iterations = 0;
    double residual = 0.0;  // max-norm of q - F(q)
    bool clipped = false;   // some q_i was held just below 1
};

/// Largest representable excitation probability; q is kept in [0, kMaxExcitation].
constexpr double kMaxExcitation = 1.0 - 1e-9;

/// Solves q_i = lambda+(i) / (r(i) + lambda-(i)) by damped fixed-point iteration and
/// stores the result in state.q. Throws RnnError if the residual is still >= 1e-9 at the cap.
ExcitationSolve solve_excitation(RnnState& state, const SolveOptions& options = {});

/// max_i |q_i - clip(lambda+(i) / (r(i) + lambda-(i)))| for the stored q.
double excitation_residual(const RnnState& state);

/// Exponentially smoothed decision threshold.
class ThresholdState {
public:
    explicit ThresholdState(double smoothing = 0.8);

    /// The first reward sets T = 0; afterwards T <- a T + (1 - a) R.
    void update(double reward);

    double value() const { return value_; }
    double smoothing() const { return smoothing_; }
    bool initialized() const { return initialized_; }

private:
    double smoothing_;
    double value_ = 0.0;
    bool initialized_ = false;
};

/// Reward or punish `winner` by |R - T_prev| and renormalize every row so r(i) is
/// unchanged, then re-solve q.
///
/// Reward (T_prev <= R): w+(i, winner) grows by delta for every row i != winner and
/// w-(i, k) grows by delta / (n - 2) for k not in {i, winner}. Punishment mirrors this
/// with the roles of w+ and w- swapped. The winner's own row is left alone. For n = 2
/// there is no side link; for n = 1 there is nothing to update.
ExcitationSolve reinforce(RnnState& state, std::size_t winner, double reward, double threshold_prev,
                          const SolveOptions& options = {.warm_start = true});

/// Index of the largest q; ties resolve to the smallest index.
std::size_t most_excited(const RnnState& state);

}  // namespace evac
