#include "causeway/refine/refine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <Eigen/Dense>

#include "causeway/ci/ci_test.hpp"
#include "causeway/common.hpp"
#include "causeway/random.hpp"

namespace causeway::refine {

namespace {

constexpr double kProbFloor = 1e-12;

/// Standardized design matrix (train statistics) for the given rows.
/// Constant columns are dropped.
struct Design {
    Eigen::MatrixXd train;
    Eigen::MatrixXd holdout;
};

Design design(const data::Dataset& ds, const std::vector<std::string>& cond, const Split& split) {
    std::vector<std::span<const double>> cols;
    std::vector<double> mean, sd;
    for (const auto& name : cond) {
        const auto v = ds.values(name);
        double m = 0.0;
        for (auto i : split.train) m += v[i];
        m /= static_cast<double>(split.train.size());
        double s = 0.0;
        for (auto i : split.train) s += (v[i] - m) * (v[i] - m);
        s = std::sqrt(s / static_cast<double>(split.train.size()));
        if (s < 1e-12) continue;
        cols.push_back(v);
        mean.push_back(m);
        sd.push_back(s);
    }
    auto fill = [&](const std::vector<std::size_t>& rows) {
        Eigen::MatrixXd x(rows.size(), cols.size());
        for (std::size_t j = 0; j < cols.size(); ++j)
            for (std::size_t r = 0; r < rows.size(); ++r) x(r, j) = (cols[j][rows[r]] - mean[j]) / sd[j];
        return x;
    };
    return {fill(split.train), fill(split.holdout)};
}

std::vector<double> ridge_losses(const Design& d, std::span<const double> y, const Split& split, double penalty) {
    const auto p = d.train.cols();
    Eigen::VectorXd yt(split.train.size());
    for (std::size_t r = 0; r < split.train.size(); ++r) yt(r) = y[split.train[r]];
    const double intercept = yt.mean();
    Eigen::VectorXd w = Eigen::VectorXd::Zero(p);
    if (p > 0) {
        Eigen::MatrixXd gram = d.train.transpose() * d.train;
        gram.diagonal().array() += penalty;
        w = gram.ldlt().solve(d.train.transpose() * (yt.array() - intercept).matrix());
    }
    std::vector<double> out(split.holdout.size());
    for (std::size_t r = 0; r < split.holdout.size(); ++r) {
        const double pred = intercept + (p > 0 ? d.holdout.row(r).dot(w) : 0.0);
        const double e = y[split.holdout[r]] - pred;
        out[r] = e * e;
    }
    return out;
}

/// Class probabilities for every row; class 0 is the reference with score 0.
Eigen::MatrixXd softmax(const Eigen::MatrixXd& x, const Eigen::MatrixXd& theta) {
    // theta: (p + 1) x (k - 1), first row is the intercept.
    const auto n = x.rows();
    const auto k = theta.cols() + 1;
    Eigen::MatrixXd scores = Eigen::MatrixXd::Zero(n, k);
    scores.rightCols(k - 1) = (x * theta.bottomRows(x.cols())).rowwise() + theta.row(0);
    Eigen::MatrixXd prob(n, k);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double top = scores.row(i).maxCoeff();
        const Eigen::RowVectorXd e = (scores.row(i).array() - top).exp();
        prob.row(i) = e / e.sum();
    }
    return prob;
}

std::vector<double> logistic_losses(const Design& d, std::span<const double> y, const Split& split, double penalty) {
    std::vector<double> levels;
    for (auto i : split.train) levels.push_back(y[i]);
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    auto level_of = [&](double v) -> int {
        const auto it = std::lower_bound(levels.begin(), levels.end(), v);
        return it != levels.end() && *it == v ? static_cast<int>(it - levels.begin()) : -1;
    };
    std::vector<double> out(split.holdout.size());
    if (levels.size() == 1) {
        // A single training class predicts itself with certainty.
        for (std::size_t r = 0; r < out.size(); ++r)
            out[r] = level_of(y[split.holdout[r]]) == 0 ? 0.0 : -std::log(kProbFloor);
        return out;
    }

    const auto n = static_cast<Eigen::Index>(split.train.size());
    const auto p = d.train.cols();
    const auto k = static_cast<Eigen::Index>(levels.size());
    const auto q = (p + 1) * (k - 1);
    std::vector<int> label(split.train.size());
    for (std::size_t r = 0; r < split.train.size(); ++r) label[r] = level_of(y[split.train[r]]);

    auto objective = [&](const Eigen::MatrixXd& theta) {
        const auto prob = softmax(d.train, theta);
        double f = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) f -= std::log(std::max(prob(i, label[i]), 1e-300));
        return f + 0.5 * penalty * theta.bottomRows(p).squaredNorm();
    };

    Eigen::MatrixXd theta = Eigen::MatrixXd::Zero(p + 1, k - 1);
    // Intercepts start at the log odds of the training frequencies.
    std::vector<double> freq(k, 0.0);
    for (int l : label) freq[l] += 1.0;
    for (Eigen::Index c = 1; c < k; ++c) theta(0, c - 1) = std::log(freq[c] / freq[0]);
    double current = objective(theta);

    // Parameter index: class c (1..k-1), feature j (0 = intercept).
    auto at = [&](Eigen::Index c, Eigen::Index j) { return (c - 1) * (p + 1) + j; };
    for (int iter = 0; iter < 100; ++iter) {
        const auto prob = softmax(d.train, theta);
        Eigen::VectorXd grad = Eigen::VectorXd::Zero(q);
        Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(q, q);
        Eigen::VectorXd row(p + 1);
        for (Eigen::Index i = 0; i < n; ++i) {
            row(0) = 1.0;
            row.tail(p) = d.train.row(i).transpose();
            const Eigen::MatrixXd outer = row * row.transpose();
            for (Eigen::Index a = 1; a < k; ++a) {
                const double resid = prob(i, a) - (label[i] == a ? 1.0 : 0.0);
                grad.segment(at(a, 0), p + 1) += resid * row;
                for (Eigen::Index b = 1; b < k; ++b) {
                    const double w = prob(i, a) * ((a == b ? 1.0 : 0.0) - prob(i, b));
                    hess.block(at(a, 0), at(b, 0), p + 1, p + 1) += w * outer;
                }
            }
        }
        for (Eigen::Index c = 1; c < k; ++c) {
            for (Eigen::Index j = 1; j <= p; ++j) {
                grad(at(c, j)) += penalty * theta(j, c - 1);
                hess(at(c, j), at(c, j)) += penalty;
            }
            hess(at(c, 0), at(c, 0)) += 1e-9;
        }
        const Eigen::VectorXd step = hess.ldlt().solve(grad);
        double scale = 1.0;
        Eigen::MatrixXd next = theta;
        double value = current;
        for (int half = 0; half < 40; ++half) {
            next = theta;
            for (Eigen::Index c = 1; c < k; ++c)
                for (Eigen::Index j = 0; j <= p; ++j) next(j, c - 1) -= scale * step(at(c, j));
            value = objective(next);
            if (value <= current) break;
            scale *= 0.5;
        }
        if (value > current) break;
        const double gain = current - value;
        theta = next;
        current = value;
        if (gain < 1e-10 * (1.0 + std::abs(current)) || scale * step.lpNorm<Eigen::Infinity>() < 1e-10) break;
    }

    const auto prob = softmax(d.holdout, theta);
    for (std::size_t r = 0; r < out.size(); ++r) {
        const int l = level_of(y[split.holdout[r]]);
        const double pr = l < 0 ? kProbFloor : std::clamp(prob(static_cast<Eigen::Index>(r), l), kProbFloor, 1.0);
        out[r] = -std::log(pr);
    }
    return out;
}

/// Holdout positions of the worst `fraction`, ordered by loss descending
/// then by row index.
std::vector<std::size_t> worst_positions(const std::vector<double>& losses, const Split& split, double fraction) {
    if (!(fraction > 0.0 && fraction <= 1.0)) throw ValidationError("worst_group: fraction must lie in (0, 1]");
    std::vector<std::size_t> order(losses.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (losses[a] != losses[b]) return losses[a] > losses[b];
        return split.holdout[a] < split.holdout[b];
    });
    const auto count = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(losses.size()) - 1e-9)));
    order.resize(std::min(count, order.size()));
    return order;
}

double mean_at(const std::vector<double>& losses, const std::vector<std::size_t>& positions) {
    double s = 0.0;
    for (auto i : positions) s += losses[i];
    return s / static_cast<double>(positions.size());
}

void check_names(const data::Dataset& ds, const std::string& target, const std::vector<std::string>& cond) {
    if (!ds.has(target)) throw ValidationError("unknown target column '" + target + "'");
    for (const auto& c : cond) {
        if (!ds.has(c)) throw ValidationError("unknown column '" + c + "'");
        if (c == target) throw ValidationError("conditioning set contains the target '" + target + "'");
    }
}

std::vector<std::string> sorted_unique(std::vector<std::string> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

}  // namespace

Split holdout_split(std::size_t n, double frac, std::uint64_t seed) {
    if (n < 10) throw ValidationError("too few rows for a holdout split (need >= 10)");
    if (!(frac > 0.0 && frac < 1.0)) throw ValidationError("holdout fraction must lie in (0, 1)");
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    Stream rng(derive_seed(seed, "holdout"));
    for (std::size_t i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);
    auto h = static_cast<std::size_t>(std::llround(frac * static_cast<double>(n)));
    h = std::clamp<std::size_t>(h, 1, n - 1);
    Split s;
    s.holdout.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(h));
    s.train.assign(perm.begin() + static_cast<std::ptrdiff_t>(h), perm.end());
    std::sort(s.holdout.begin(), s.holdout.end());
    std::sort(s.train.begin(), s.train.end());
    return s;
}

std::vector<double> holdout_losses(const data::Dataset& ds, const std::string& target,
                                   const std::vector<std::string>& cond, const Split& split, double penalty) {
    check_names(ds, target, cond);
    const auto d = design(ds, sorted_unique(cond), split);
    const auto y = ds.values(target);
    if (ds.column(target).kind == data::ValueKind::ordinal) return logistic_losses(d, y, split, penalty);
    return ridge_losses(d, y, split, penalty);
}

double predictive_uncertainty(const data::Dataset& ds, const std::string& target, const std::vector<std::string>& cond,
                              double holdout_frac, std::uint64_t seed) {
    const auto split = holdout_split(ds.rows(), holdout_frac, seed);
    const auto losses = holdout_losses(ds, target, cond, split);
    return std::accumulate(losses.begin(), losses.end(), 0.0) / static_cast<double>(losses.size());
}

std::vector<std::size_t> worst_group(const data::Dataset& ds, const std::string& target,
                                     const std::vector<std::string>& cond, double fraction,
                                     const RefineOptions& options) {
    const auto split = holdout_split(ds.rows(), options.holdout_frac, options.seed);
    const auto losses = holdout_losses(ds, target, cond, split, options.penalty);
    std::vector<std::size_t> rows;
    for (auto i : worst_positions(losses, split, fraction)) rows.push_back(split.holdout[i]);
    std::sort(rows.begin(), rows.end());
    return rows;
}

double residual_difficulty(const data::Dataset& ds, const std::string& target, const std::vector<std::string>& cond,
                           const RefineOptions& options) {
    const auto split = holdout_split(ds.rows(), options.holdout_frac, options.seed);
    const auto losses = holdout_losses(ds, target, cond, split, options.penalty);
    return mean_at(losses, worst_positions(losses, split, options.worst_fraction));
}

GainReport information_gain(const data::Dataset& ds, const std::string& target, const std::vector<std::string>& active,
                            const std::string& candidate, const RefineOptions& options) {
    if (std::find(active.begin(), active.end(), candidate) != active.end())
        throw ValidationError("candidate '" + candidate + "' is already active");
    check_names(ds, target, {candidate});
    const auto split = holdout_split(ds.rows(), options.holdout_frac, options.seed);
    const auto base = holdout_losses(ds, target, active, split, options.penalty);
    const auto group = worst_positions(base, split, options.worst_fraction);
    auto extended = active;
    extended.push_back(candidate);
    const auto with = holdout_losses(ds, target, extended, split, options.penalty);
    GainReport r;
    r.candidate = candidate;
    r.before = mean_at(base, group);
    r.after = mean_at(with, group);
    r.gain = r.before - r.after;
    r.threshold = options.tau;
    r.admitted = r.gain > options.tau;
    return r;
}

std::vector<std::string> prune_redundant(const data::Dataset& ds, const std::string& target,
                                         const std::vector<std::string>& active, double alpha, int bins) {
    auto current = sorted_unique(active);
    if (current.empty()) return current;
    if (std::find(current.begin(), current.end(), target) != current.end())
        throw ValidationError("prune_redundant: target must not be in the active set");
    auto vars = current;
    vars.push_back(target);
    const ci::IndependenceTest tester(ds, vars, bins);
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t i = 0; i < current.size();) {
            std::vector<std::string> rest;
            for (std::size_t j = 0; j < current.size(); ++j)
                if (j != i) rest.push_back(current[j]);
            if (tester.test(target, current[i], rest, alpha).independent) {
                log::debug("prune: dropped " + current[i]);
                current.erase(current.begin() + static_cast<std::ptrdiff_t>(i));
                changed = true;
            } else {
                ++i;
            }
        }
    }
    return current;
}

RefinementState initial_state(const data::Dataset& ds, const std::string& target, std::vector<std::string> active,
                              const RefineOptions& options) {
    check_names(ds, target, active);
    RefinementState s;
    s.active = prune_redundant(ds, target, active, options.alpha, options.bins);
    s.boundary = s.active;
    s.f_trajectory.push_back(residual_difficulty(ds, target, s.active, options));
    return s;
}

RefinementState refine_round(const RefinementState& state, const std::vector<Candidate>& candidates,
                             data::Dataset& ds, const std::string& target, const RefineOptions& options) {
    for (const auto& c : candidates)
        if (c.spec && !ds.has(c.name)) {
            if (c.spec->name != c.name) throw ValidationError("candidate name differs from its factor name");
            ds = data::materialize_factor(ds, *c.spec);
        }

    std::vector<std::string> pending;
    for (const auto& c : candidates) {
        const bool active = std::find(state.active.begin(), state.active.end(), c.name) != state.active.end();
        if (active || c.name == target) continue;
        if (std::find(pending.begin(), pending.end(), c.name) == pending.end()) pending.push_back(c.name);
    }

    std::vector<GainReport> reports(pending.size());
    const data::Dataset& snapshot = ds;
    parallel_for(pending.size(), default_jobs(), [&](std::size_t i) {
        reports[i] = information_gain(snapshot, target, state.active, pending[i], options);
    });

    RefinementState next = state;
    auto grown = state.active;
    int admitted = 0;
    for (const auto& r : reports)
        if (r.admitted) {
            grown.push_back(r.candidate);
            ++admitted;
        }
    next.round = state.round + 1;
    next.active = prune_redundant(ds, target, grown, options.alpha, options.bins);
    next.boundary = next.active;
    next.admitted_per_round.push_back(admitted);
    next.gains.push_back(reports);
    next.f_trajectory.push_back(residual_difficulty(ds, target, next.active, options));
    return next;
}

std::pair<double, double> estimate_pc(const std::vector<double>& f, double epsilon) {
    if (f.size() < 2) throw ValidationError("estimate_pc needs at least two trajectory points");
    if (!(epsilon > 0.0)) throw ValidationError("estimate_pc: epsilon must be positive");
    std::vector<double> ratios;
    for (std::size_t t = 0; t + 1 < f.size(); ++t)
        if (f[t + 1] <= f[t] - epsilon) ratios.push_back(f[t] > 0.0 ? (f[t] - f[t + 1]) / f[t] : 0.0);
    const double p = static_cast<double>(ratios.size()) / static_cast<double>(f.size() - 1);
    if (ratios.empty()) return {p, 0.0};
    std::sort(ratios.begin(), ratios.end());
    const auto m = ratios.size();
    const double c = m % 2 == 1 ? ratios[m / 2] : 0.5 * (ratios[m / 2 - 1] + ratios[m / 2]);
    return {p, c};
}

nlohmann::json round_record(const RefinementState& state) {
    nlohmann::json gains = nlohmann::json::array();
    if (!state.gains.empty())
        for (const auto& g : state.gains.back())
            gains.push_back({{"candidate", g.candidate},
                             {"gain", g.gain},
                             {"admitted", g.admitted},
                             {"threshold", g.threshold},
                             {"before", g.before},
                             {"after", g.after}});
    return {{"round", state.round},
            {"active", state.active},
            {"boundary", state.boundary},
            {"f_hat", state.f_trajectory.empty() ? 0.0 : state.f_trajectory.back()},
            {"admitted", state.admitted_per_round.empty() ? 0 : state.admitted_per_round.back()},
            {"gains", gains}};
}

}  // namespace causeway::refine
