#pragma once

// Fixture helper: random linear-Gaussian models filtered for lambda-strong
// faithfulness. CI-based discovery can only recover the equivalence class
// when every partial correlation that is nonzero in the population is
// bounded away from zero; near-cancellations are rejected and redrawn.

#include <cmath>
#include <cstdint>

#include <Eigen/Dense>

#include "causeway/random.hpp"
#include "causeway/sim/scm.hpp"

namespace oracle {

/// Population covariance (I - B)^{-1} D (I - B)^{-T} of a linear model.
inline Eigen::MatrixXd population_covariance(const causeway::sim::ScmModel& m) {
    const auto names = m.names();
    const auto p = static_cast<Eigen::Index>(names.size());
    std::map<std::string, Eigen::Index> idx;
    for (Eigen::Index i = 0; i < p; ++i) idx[names[i]] = i;
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(p, p), d = Eigen::MatrixXd::Zero(p, p);
    for (const auto& n : m.nodes()) {
        d(idx[n.name], idx[n.name]) = n.noise * n.noise;
        for (const auto& [parent, coef] : n.parents) b(idx[n.name], idx[parent]) = coef;
    }
    const Eigen::MatrixXd a = (Eigen::MatrixXd::Identity(p, p) - b).inverse();
    return a * d * a.transpose();
}

/// Smallest |partial correlation| over all pairs and conditioning sets whose
/// population value is structurally nonzero (above 1e-9).
inline double min_nonzero_partial(const causeway::sim::ScmModel& m) {
    const Eigen::MatrixXd s = population_covariance(m);
    const int p = static_cast<int>(s.rows());
    double smallest = 1.0;
    for (int i = 0; i < p; ++i)
        for (int j = i + 1; j < p; ++j) {
            std::vector<int> rest;
            for (int k = 0; k < p; ++k)
                if (k != i && k != j) rest.push_back(k);
            for (std::uint32_t mask = 0; mask < (1u << rest.size()); ++mask) {
                std::vector<int> idx{i, j};
                for (std::size_t k = 0; k < rest.size(); ++k)
                    if (mask >> k & 1) idx.push_back(rest[k]);
                Eigen::MatrixXd sub(idx.size(), idx.size());
                for (std::size_t a = 0; a < idx.size(); ++a)
                    for (std::size_t c = 0; c < idx.size(); ++c) sub(a, c) = s(idx[a], idx[c]);
                const Eigen::MatrixXd prec = sub.inverse();
                const double r = -prec(0, 1) / std::sqrt(prec(0, 0) * prec(1, 1));
                if (std::abs(r) > 1e-9) smallest = std::min(smallest, std::abs(r));
            }
        }
    return smallest;
}

/// First model in the seed sequence derived from `seed` whose nonzero partial
/// correlations all reach `lambda`.
inline causeway::sim::ScmModel faithful_linear_scm(int p, double edge_prob, std::uint64_t seed, double lambda) {
    for (std::uint64_t attempt = 0;; ++attempt) {
        auto m = causeway::sim::random_linear_scm(p, edge_prob, causeway::derive_seed(seed, attempt));
        if (min_nonzero_partial(m) >= lambda) return m;
    }
}

}  // namespace oracle
