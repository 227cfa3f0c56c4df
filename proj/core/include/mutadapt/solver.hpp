#pragma once

// Offline planning for the MOMDP: a point-based solver that keeps lower-bound
// alpha-vectors and a sawtooth upper bound per observable state, explores
// beliefs reachable from the prior, and an exact finite-horizon expectimax
// used as an oracle on small instances.

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "mutadapt/belief.hpp"
#include "mutadapt/model.hpp"

namespace mutadapt {

struct AlphaVector {
    std::vector<double> values;  // one entry per latent cell
    RobotAction action;

    double dot(const Belief& b) const;
    bool operator==(const AlphaVector&) const = default;
};

struct PolicyMetadata {
    Variant variant = Variant::baseline;
    std::string model_hash;
    double epsilon = 0.0;
    std::size_t horizon = 0;  // maximum exploration depth used while solving
    std::uint64_t seed = 0;

    bool operator==(const PolicyMetadata&) const = default;
};

class Policy {
public:
    Policy() = default;
    Policy(PolicyMetadata meta, std::map<ObservableState, std::vector<AlphaVector>> vectors)
        : meta_(std::move(meta)), vectors_(std::move(vectors)) {}

    const PolicyMetadata& metadata() const { return meta_; }
    const std::map<ObservableState, std::vector<AlphaVector>>& vectors() const { return vectors_; }
    const std::vector<AlphaVector>& vectors_at(const ObservableState& x) const;
    bool covers(const ObservableState& x) const;

    /// max over the vectors at x of <alpha, b>.
    double value(const ObservableState& x, const Belief& b) const;

    bool operator==(const Policy&) const = default;

private:
    PolicyMetadata meta_;
    std::map<ObservableState, std::vector<AlphaVector>> vectors_;
};

/// Action of the maximizing vector. Near-ties (relative 1e-12) go to the
/// action that sorts first.
RobotAction best_action(const Policy& policy, const ObservableState& x, const Belief& b);

/// Point-based Bellman backup of (x, b) against the vector sets of the
/// successor states. Terminal x yields a zero vector.
AlphaVector backup(const MomdpModel& model, const ObservableState& x, const Belief& b,
                   const std::map<ObservableState, std::vector<AlphaVector>>& vectors);

struct SolveOptions {
    double epsilon = 0.01;
    double max_time_seconds = 60.0;
    std::uint64_t seed = 0;
    std::size_t max_depth = 200;
    std::size_t sample_rollouts = 32;  // seeded random rollouts that seed the point set
};

struct SolveStats {
    double lower_bound = 0.0;
    double upper_bound = 0.0;
    std::size_t trials = 0;
    std::size_t backups = 0;
    std::size_t vectors = 0;
    std::size_t refinement_sweeps = 0;
    bool converged = false;
};

struct SolveResult {
    Policy policy;
    SolveStats stats;
};

/// Throws ValidationError on an invalid model or prior, DomainError on epsilon <= 0.
SolveResult solve(const MomdpModel& model, const Belief& prior, const SolveOptions& options = {});

/// Same, starting from an explicit observable state.
SolveResult solve(const MomdpModel& model, const ObservableState& start, const Belief& prior,
                  const SolveOptions& options);

struct ExpectimaxResult {
    double value = 0.0;
    std::optional<RobotAction> action;  // empty at horizon 0 or terminal states
    std::size_t nodes = 0;
};

/// Exact finite-horizon value under the variant's belief dynamics. Beliefs
/// reached along different paths are memoized when they agree to ~1e-12.
ExpectimaxResult expectimax(const MomdpModel& model, const ObservableState& x, const Belief& b,
                            int horizon);

/// Smallest horizon H with gamma^H * max|reward| < bound.
int effective_horizon(const MomdpModel& model, double bound);

}  // namespace mutadapt
