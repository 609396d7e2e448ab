#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "causeway/sim/simulator.hpp"

namespace causeway::sim {

/// Parameters of the delivery world. Times are minutes, distances km.
struct O2OConfig {
    int merchants = 12;
    int customers = 41;
    int riders = 20;
    int steps = 240;

    /// Orders per customer per minute before the time-of-day curve.
    double arrival_rate = 0.012;
    /// Height of the lunch and dinner peaks relative to the base rate.
    double peak_amplitude = 1.5;

    double prep_mean = 12.0;
    /// Log-scale spread of preparation times.
    double prep_spread = 0.4;
    int kitchen_slots = 3;

    double city_km = 6.0;
    double rider_speed = 0.3;
    int rider_capacity = 2;
    /// Minutes before a rider who rejected an order may be offered it again.
    int reject_cooldown = 5;

    /// Slack added to the estimated preparation plus travel time.
    double promise_buffer = 8.0;

    // Rider acceptance: logistic in bias - distance*d - load*l + pay*(payout
    // - base) plus a clipped Cauchy noise scaled by accept_noise.
    double accept_bias = 2.0;
    double accept_distance = 0.4;
    double accept_load = 0.8;
    double accept_pay = 0.3;
    double accept_noise = 0.5;
    double payout_base = 4.0;
    double payout_per_km = 1.0;

    static O2OConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
    /// Throws ValidationError on negative counts or rates.
    void validate() const;
};

/// Delivery platform world: order generation, merchant preparation,
/// dispatch, rider response and logging, once per minute in that order.
/// Randomness is keyed by (seed, component, entity, step), so a clamp leaves
/// unrelated draws unchanged.
///
/// Knobs are the numeric config fields by name (population sizes only before
/// the first step) plus `do:accept_prob`, which fixes every rider's
/// acceptance probability.
class O2OSimulator : public Simulator {
public:
    explicit O2OSimulator(O2OConfig config = {});

    std::string world() const override { return "o2o"; }
    void init(std::uint64_t seed) override;
    void step() override;
    int default_steps() const override { return config_.steps; }
    std::vector<std::string> knobs() const override;
    bool knob_valid(const std::string& knob) const override;
    void clamp(const std::string& knob, double value) override;
    nlohmann::json snapshot() const override;
    void restore(const nlohmann::json& state) override;
    RolloutLog log() const override;
    std::unique_ptr<Simulator> clone() const override { return std::make_unique<O2OSimulator>(*this); }

    const O2OConfig& config() const { return current_; }
    /// Acceptance probability before noise for an offer.
    double policy_probability(double distance, int load, double payout) const;

private:
    struct Point {
        double x = 0.0;
        double y = 0.0;
    };
    struct Order {
        int id = 0;
        int customer = 0;
        int merchant = 0;
        int created = 0;
        double promised = 0.0;
        int ready_at = -1;
        bool ready = false;
        int rider = -1;
        bool picked = false;
        int delivered = -1;
        std::map<int, int> declined;  // rider -> step of rejection
    };
    struct Merchant {
        Point at;
        double prep_factor = 1.0;
        std::deque<int> queue;
        std::vector<int> cooking;
    };
    enum class Phase { idle, to_merchant, waiting, to_customer };
    struct Rider {
        Point at;
        std::deque<int> tasks;
        int leg_end = -1;
        Phase phase = Phase::idle;
    };

    void build();
    double rate_at(int t) const;
    double distance(const Point& a, const Point& b) const;
    Point rider_end(const Rider& r) const;
    void generate();
    void prepare();
    void dispatch();
    void move_riders();
    void emit(nlohmann::json event);

    O2OConfig config_;
    O2OConfig current_;
    std::optional<double> forced_accept_;
    std::uint64_t seed_ = 0;
    int t_ = 0;
    std::vector<std::pair<int, std::pair<std::string, double>>> applied_;
    std::vector<Point> customers_;
    std::vector<Merchant> merchants_;
    std::vector<Rider> riders_;
    std::vector<Order> orders_;
    std::vector<nlohmann::json> events_;
};

/// Run-level features recomputed from the raw event stream of an O2O log.
std::map<std::string, double> o2o_features(const std::vector<nlohmann::json>& events);

}  // namespace causeway::sim
