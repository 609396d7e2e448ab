#include "causeway/sim/o2o.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "causeway/common.hpp"
#include "causeway/data/dataset.hpp"
#include "causeway/random.hpp"
#include "causeway/sim/emergence.hpp"

namespace causeway::sim {

namespace {

using U = std::uint64_t;

const U kArrival = fnv1a("arrival");
const U kPrep = fnv1a("prep");
const U kRider = fnv1a("rider");
const U kLayout = fnv1a("layout");

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

const std::set<std::string> kPopulation{"merchants", "customers", "riders", "steps"};
const std::set<std::string> kIntegral{"merchants", "customers",      "riders",         "steps",
                                      "kitchen_slots", "rider_capacity", "reject_cooldown"};

}  // namespace

O2OConfig O2OConfig::from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ValidationError("o2o config must be an object");
    O2OConfig c;
    auto known = c.to_json();
    for (const auto& [key, value] : j.items()) {
        if (!known.contains(key)) throw ValidationError("o2o config: unknown field /" + key);
        if (!value.is_number()) throw ValidationError("o2o config: /" + key + " must be a number");
    }
    auto num = [&](const char* key, double& field) { field = j.value(key, field); };
    auto count = [&](const char* key, int& field) {
        if (!j.contains(key)) return;
        const double v = j.at(key).get<double>();
        if (v != std::round(v)) throw ValidationError(std::string("o2o config: /") + key + " must be an integer");
        field = static_cast<int>(v);
    };
    count("merchants", c.merchants);
    count("customers", c.customers);
    count("riders", c.riders);
    count("steps", c.steps);
    num("arrival_rate", c.arrival_rate);
    num("peak_amplitude", c.peak_amplitude);
    num("prep_mean", c.prep_mean);
    num("prep_spread", c.prep_spread);
    count("kitchen_slots", c.kitchen_slots);
    num("city_km", c.city_km);
    num("rider_speed", c.rider_speed);
    count("rider_capacity", c.rider_capacity);
    count("reject_cooldown", c.reject_cooldown);
    num("promise_buffer", c.promise_buffer);
    num("accept_bias", c.accept_bias);
    num("accept_distance", c.accept_distance);
    num("accept_load", c.accept_load);
    num("accept_pay", c.accept_pay);
    num("accept_noise", c.accept_noise);
    num("payout_base", c.payout_base);
    num("payout_per_km", c.payout_per_km);
    c.validate();
    return c;
}

nlohmann::json O2OConfig::to_json() const {
    return {{"merchants", merchants},
            {"customers", customers},
            {"riders", riders},
            {"steps", steps},
            {"arrival_rate", arrival_rate},
            {"peak_amplitude", peak_amplitude},
            {"prep_mean", prep_mean},
            {"prep_spread", prep_spread},
            {"kitchen_slots", kitchen_slots},
            {"city_km", city_km},
            {"rider_speed", rider_speed},
            {"rider_capacity", rider_capacity},
            {"reject_cooldown", reject_cooldown},
            {"promise_buffer", promise_buffer},
            {"accept_bias", accept_bias},
            {"accept_distance", accept_distance},
            {"accept_load", accept_load},
            {"accept_pay", accept_pay},
            {"accept_noise", accept_noise},
            {"payout_base", payout_base},
            {"payout_per_km", payout_per_km}};
}

void O2OConfig::validate() const {
    // Zero riders is allowed: it is the degenerate no-capacity world.
    if (merchants < 1 || customers < 1) throw ValidationError("o2o config: merchants and customers must be >= 1");
    if (riders < 0) throw ValidationError("o2o config: riders must be >= 0");
    if (steps < 1) throw ValidationError("o2o config: steps must be >= 1");
    if (kitchen_slots < 1 || rider_capacity < 1) throw ValidationError("o2o config: capacities must be >= 1");
    if (reject_cooldown < 0) throw ValidationError("o2o config: reject_cooldown must be >= 0");
    for (double v : {arrival_rate, peak_amplitude, prep_mean, prep_spread, promise_buffer, accept_distance,
                     accept_load, accept_pay, accept_noise, payout_base, payout_per_km})
        if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError("o2o config: rates must be finite and >= 0");
    if (!(city_km > 0.0) || !(rider_speed > 0.0)) throw ValidationError("o2o config: city_km and rider_speed must be > 0");
    if (!std::isfinite(accept_bias)) throw ValidationError("o2o config: accept_bias must be finite");
}

O2OSimulator::O2OSimulator(O2OConfig config) : config_(config), current_(config) {
    config_.validate();
    build();
}

void O2OSimulator::init(std::uint64_t seed) {
    seed_ = seed;
    current_ = config_;
    forced_accept_.reset();
    applied_.clear();
    build();
}

void O2OSimulator::build() {
    t_ = 0;
    orders_.clear();
    events_.clear();
    const double side = current_.city_km;
    auto place = [&](std::string_view kind, int i) {
        Stream s(derive_seed(seed_, kLayout, fnv1a(kind), static_cast<U>(i)));
        Point p;
        p.x = s.uniform(0.0, side);
        p.y = s.uniform(0.0, side);
        return std::pair{p, s.uniform()};
    };
    customers_.assign(current_.customers, {});
    for (int c = 0; c < current_.customers; ++c) customers_[c] = place("customer", c).first;
    merchants_.assign(current_.merchants, {});
    for (int m = 0; m < current_.merchants; ++m) {
        const auto [p, u] = place("merchant", m);
        merchants_[m].at = p;
        merchants_[m].prep_factor = 0.7 + 0.6 * u;
    }
    riders_.assign(current_.riders, {});
    for (int r = 0; r < current_.riders; ++r) riders_[r].at = place("rider", r).first;
    emit({{"type", "config"},
          {"merchants", current_.merchants},
          {"customers", current_.customers},
          {"riders", current_.riders}});
}

double O2OSimulator::rate_at(int t) const {
    const double f = static_cast<double>(t) / static_cast<double>(current_.steps);
    auto bump = [&](double centre) { return std::exp(-std::pow((f - centre) / 0.08, 2)); };
    return current_.arrival_rate * (1.0 + current_.peak_amplitude * (bump(0.3) + bump(0.75)));
}

double O2OSimulator::distance(const Point& a, const Point& b) const { return std::hypot(a.x - b.x, a.y - b.y); }

O2OSimulator::Point O2OSimulator::rider_end(const Rider& r) const {
    if (r.tasks.empty()) return r.at;
    return customers_[orders_[r.tasks.back()].customer];
}

double O2OSimulator::policy_probability(double d, int load, double payout) const {
    return logistic(current_.accept_bias - current_.accept_distance * d - current_.accept_load * load +
                    current_.accept_pay * (payout - current_.payout_base));
}

void O2OSimulator::emit(nlohmann::json event) {
    event["t"] = t_;
    events_.push_back(std::move(event));
}

void O2OSimulator::generate() {
    const double rate = rate_at(t_);
    for (int c = 0; c < current_.customers; ++c) {
        Stream s(derive_seed(seed_, kArrival, static_cast<U>(c), static_cast<U>(t_)));
        const int k = s.poisson(rate);
        for (int i = 0; i < k; ++i) {
            // Nearby merchants are preferred.
            std::vector<double> w(merchants_.size());
            double total = 0.0;
            for (std::size_t m = 0; m < merchants_.size(); ++m) {
                w[m] = std::exp(-distance(customers_[c], merchants_[m].at) / (0.3 * current_.city_km));
                total += w[m];
            }
            double u = s.uniform() * total;
            std::size_t m = 0;
            while (m + 1 < w.size() && u >= w[m]) u -= w[m++];
            Order o;
            o.id = static_cast<int>(orders_.size());
            o.customer = c;
            o.merchant = static_cast<int>(m);
            o.created = t_;
            const double travel = distance(merchants_[m].at, customers_[c]) / current_.rider_speed;
            o.promised = t_ + current_.promise_buffer + current_.prep_mean * merchants_[m].prep_factor + travel;
            merchants_[m].queue.push_back(o.id);
            emit({{"type", "order"}, {"id", o.id}, {"customer", c}, {"merchant", o.merchant}, {"promised", o.promised}});
            orders_.push_back(std::move(o));
        }
    }
}

void O2OSimulator::prepare() {
    for (auto& m : merchants_) {
        std::vector<int> still;
        for (int id : m.cooking) {
            if (orders_[id].ready_at <= t_) {
                orders_[id].ready = true;
                emit({{"type", "ready"}, {"id", id}});
            } else {
                still.push_back(id);
            }
        }
        m.cooking = std::move(still);
        while (!m.queue.empty() && static_cast<int>(m.cooking.size()) < current_.kitchen_slots) {
            const int id = m.queue.front();
            m.queue.pop_front();
            Stream s(derive_seed(seed_, kPrep, static_cast<U>(id)));
            const double sd = current_.prep_spread;
            const double minutes = current_.prep_mean * m.prep_factor * std::exp(sd * s.normal() - 0.5 * sd * sd);
            orders_[id].ready_at = t_ + std::max(1, static_cast<int>(std::lround(minutes)));
            m.cooking.push_back(id);
            emit({{"type", "prep"}, {"id", id}});
        }
    }
}

void O2OSimulator::dispatch() {
    std::set<int> offered;
    for (auto& o : orders_) {
        if (o.rider >= 0) continue;
        const auto& merchant = merchants_[o.merchant].at;
        int best = -1;
        double best_d = 0.0;
        for (int r = 0; r < static_cast<int>(riders_.size()); ++r) {
            if (offered.contains(r) || static_cast<int>(riders_[r].tasks.size()) >= current_.rider_capacity) continue;
            if (auto it = o.declined.find(r); it != o.declined.end() && t_ - it->second < current_.reject_cooldown)
                continue;
            const double d = distance(rider_end(riders_[r]), merchant);
            if (best < 0 || d < best_d) {
                best = r;
                best_d = d;
            }
        }
        if (best < 0) continue;
        offered.insert(best);
        auto& rider = riders_[best];
        const double trip = distance(merchant, customers_[o.customer]);
        const double payout = current_.payout_base + current_.payout_per_km * trip;
        const int load = static_cast<int>(rider.tasks.size());
        Stream s(derive_seed(seed_, kRider, static_cast<U>(best), static_cast<U>(t_), static_cast<U>(o.id)));
        const double noise = std::clamp(std::tan(std::numbers::pi * (s.uniform() - 0.5)), -20.0, 20.0);
        double p;
        if (forced_accept_) {
            p = *forced_accept_;
        } else {
            const double base = policy_probability(best_d + trip, load, payout);
            p = logistic(std::log(base / (1.0 - base)) + current_.accept_noise * noise);
        }
        const bool accepted = s.uniform() < p;
        emit({{"type", "offer"},
              {"id", o.id},
              {"rider", best},
              {"p", p},
              {"accepted", accepted},
              {"distance", best_d + trip}});
        if (accepted) {
            o.rider = best;
            rider.tasks.push_back(o.id);
        } else {
            o.declined[best] = t_;
        }
    }
}

void O2OSimulator::move_riders() {
    auto minutes = [&](double km) { return static_cast<int>(std::ceil(km / current_.rider_speed - 1e-9)); };
    for (int r = 0; r < static_cast<int>(riders_.size()); ++r) {
        auto& rider = riders_[r];
        while (!rider.tasks.empty()) {
            auto& o = orders_[rider.tasks.front()];
            const auto& shop = merchants_[o.merchant].at;
            const auto& home = customers_[o.customer];
            if (rider.phase == Phase::idle) {
                const int leg = minutes(distance(rider.at, shop));
                rider.phase = leg > 0 ? Phase::to_merchant : Phase::waiting;
                rider.leg_end = t_ + leg;
                if (leg > 0) break;
                rider.at = shop;
            } else if (rider.phase == Phase::to_merchant) {
                if (t_ < rider.leg_end) break;
                rider.at = shop;
                rider.phase = Phase::waiting;
            } else if (rider.phase == Phase::waiting) {
                if (!o.ready) break;
                o.picked = true;
                emit({{"type", "pickup"}, {"id", o.id}, {"rider", r}});
                rider.phase = Phase::to_customer;
                rider.leg_end = t_ + std::max(1, minutes(distance(shop, home)));
                break;
            } else {
                if (t_ < rider.leg_end) break;
                rider.at = home;
                o.delivered = t_;
                emit({{"type", "deliver"}, {"id", o.id}, {"rider", r}, {"deviation", t_ - o.promised}});
                rider.tasks.pop_front();
                rider.phase = Phase::idle;
            }
        }
    }
}

void O2OSimulator::step() {
    generate();
    prepare();
    dispatch();
    move_riders();
    int backlog = 0, queued = 0, busy = 0;
    std::vector<double> deviations;
    for (const auto& o : orders_) {
        backlog += o.rider < 0 ? 1 : 0;
        if (o.delivered >= 0) deviations.push_back(o.delivered - o.promised);
    }
    for (const auto& m : merchants_) queued += static_cast<int>(m.queue.size());
    for (const auto& r : riders_) busy += r.tasks.empty() ? 0 : 1;
    nlohmann::json record = {{"type", "step"}, {"backlog", backlog}, {"queued", queued}, {"busy", busy}};
    record["y_t"] = deviations.empty() ? nlohmann::json(nullptr) : nlohmann::json(emergence_indicator(deviations));
    emit(std::move(record));
    ++t_;
}

std::vector<std::string> O2OSimulator::knobs() const {
    const auto j = current_.to_json();
    std::vector<std::string> out;
    for (auto it = j.begin(); it != j.end(); ++it) out.push_back(it.key());
    out.push_back("do:accept_prob");
    return out;
}

bool O2OSimulator::knob_valid(const std::string& knob) const {
    return knob == "do:accept_prob" || current_.to_json().contains(knob);
}

void O2OSimulator::clamp(const std::string& knob, double value) {
    if (knob == "do:accept_prob") {
        if (!(value >= 0.0 && value <= 1.0)) throw InfeasibleKnob("do:accept_prob needs a value in [0, 1]");
        forced_accept_ = value;
    } else {
        auto j = current_.to_json();
        if (!j.contains(knob)) throw InfeasibleKnob("o2o world has no knob '" + knob + "'");
        if (kPopulation.contains(knob) && t_ > 0)
            throw InfeasibleKnob("knob '" + knob + "' can only be set before the first step");
        if (kIntegral.contains(knob) && value != std::round(value))
            throw InfeasibleKnob("knob '" + knob + "' takes integer values");
        j[knob] = value;
        try {
            current_ = O2OConfig::from_json(j);
        } catch (const ValidationError& e) {
            throw InfeasibleKnob(e.what());
        }
        if (kPopulation.contains(knob)) build();
    }
    applied_.push_back({t_, {knob, value}});
}

nlohmann::json O2OSimulator::snapshot() const {
    nlohmann::json applied = nlohmann::json::array();
    for (const auto& [t, kv] : applied_) applied.push_back({t, kv.first, kv.second});
    return {{"seed", seed_}, {"t", t_}, {"applied", applied}};
}

void O2OSimulator::restore(const nlohmann::json& state) {
    // The world is deterministic, so replaying the clamp schedule rebuilds
    // the exact state.
    init(state.at("seed").get<std::uint64_t>());
    const int until = state.at("t").get<int>();
    const auto& applied = state.at("applied");
    std::size_t next = 0;
    for (int t = 0; t <= until; ++t) {
        while (next < applied.size() && applied[next][0].get<int>() == t) {
            clamp(applied[next][1].get<std::string>(), applied[next][2].get<double>());
            ++next;
        }
        if (t < until) step();
    }
}

RolloutLog O2OSimulator::log() const {
    RolloutLog log;
    log.world = world();
    log.seed = seed_;
    log.config_hash = hex64(fnv1a(nlohmann::json({{"config", config_.to_json()}, {"applied", snapshot()["applied"]}}).dump()));
    log.events = events_;
    log.summary = o2o_features(events_);
    std::vector<double> deviations;
    for (const auto& o : orders_)
        if (o.delivered >= 0) deviations.push_back(o.delivered - o.promised);
    if (current_.riders == 0) log.flags.push_back("degenerate: no riders");
    if (deviations.empty()) {
        log.flags.push_back("degenerate: no completed orders");
    } else {
        log.y = emergence_indicator(deviations);
    }
    const auto undelivered = std::count_if(orders_.begin(), orders_.end(), [](const Order& o) { return o.delivered < 0; });
    if (undelivered > 0) log.flags.push_back("undelivered: " + std::to_string(undelivered));
    return log;
}

std::map<std::string, double> o2o_features(const std::vector<nlohmann::json>& events) {
    double merchants = 1, customers = 1, riders = 0;
    std::map<int, int> created, prep_start, ready, accepted, delivered;
    std::vector<double> deviations;
    double offers = 0, accepts = 0, steps = 0, backlog_sum = 0, backlog_max = 0, queued_sum = 0, busy_sum = 0;
    for (const auto& e : events) {
        const auto type = e.at("type").get<std::string>();
        const int t = e.at("t").get<int>();
        if (type == "config") {
            merchants = e.at("merchants").get<double>();
            customers = e.at("customers").get<double>();
            riders = e.at("riders").get<double>();
        } else if (type == "order") {
            created[e.at("id").get<int>()] = t;
        } else if (type == "prep") {
            prep_start[e.at("id").get<int>()] = t;
        } else if (type == "ready") {
            ready[e.at("id").get<int>()] = t;
        } else if (type == "offer") {
            offers += 1;
            if (e.at("accepted").get<bool>()) {
                accepts += 1;
                accepted[e.at("id").get<int>()] = t;
            }
        } else if (type == "deliver") {
            delivered[e.at("id").get<int>()] = t;
            deviations.push_back(e.at("deviation").get<double>());
        } else if (type == "step") {
            steps += 1;
            const double b = e.at("backlog").get<double>();
            backlog_sum += b;
            backlog_max = std::max(backlog_max, b);
            queued_sum += e.at("queued").get<double>();
            busy_sum += e.at("busy").get<double>();
        }
    }
    auto mean_gap = [&](const std::map<int, int>& from, const std::map<int, int>& to) {
        double sum = 0.0, n = 0.0;
        for (const auto& [id, t] : to)
            if (auto it = from.find(id); it != from.end()) {
                sum += t - it->second;
                n += 1.0;
            }
        return n > 0.0 ? sum / n : 0.0;
    };
    const double n_created = static_cast<double>(created.size());
    const double n_delivered = static_cast<double>(delivered.size());
    std::map<std::string, double> f;
    f["orders_created"] = n_created;
    f["orders_delivered"] = n_delivered;
    f["completion_rate"] = n_created > 0 ? n_delivered / n_created : 0.0;
    f["orders_per_merchant"] = n_created / merchants;
    f["orders_per_customer"] = n_created / customers;
    f["deliveries_per_rider"] = riders > 0 ? n_delivered / riders : 0.0;
    f["offers"] = offers;
    f["acceptance_rate"] = offers > 0 ? accepts / offers : 0.0;
    f["queue_wait_mean"] = mean_gap(created, prep_start);
    f["prep_time_mean"] = mean_gap(prep_start, ready);
    f["dispatch_delay_mean"] = mean_gap(created, accepted);
    f["delivery_time_mean"] = mean_gap(created, delivered);
    f["backlog_mean"] = steps > 0 ? backlog_sum / steps : 0.0;
    f["backlog_max"] = backlog_max;
    f["kitchen_queue_mean"] = steps > 0 ? queued_sum / steps : 0.0;
    f["rider_busy_share"] = steps > 0 && riders > 0 ? busy_sum / steps / riders : 0.0;
    double dev_mean = 0.0, late = 0.0;
    for (double d : deviations) {
        dev_mean += d;
        late += d > 0.0 ? 1.0 : 0.0;
    }
    const bool any = !deviations.empty();
    f["deviation_mean"] = any ? dev_mean / static_cast<double>(deviations.size()) : 0.0;
    f["deviation_q50"] = any ? data::quantile(deviations, 0.5) : 0.0;
    f["deviation_q90"] = any ? data::quantile(deviations, 0.9) : 0.0;
    f["late_share"] = any ? late / static_cast<double>(deviations.size()) : 0.0;
    f["entropy_h"] = any ? deviation_entropy(deviations) : 0.0;
    return f;
}

}  // namespace causeway::sim
