#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>
#include <vector>

namespace mec::cpf {

enum class BusType { slack, pv, pq };

struct Bus {
    int id = 0;
    BusType type = BusType::pq;
    double v0 = 1.0;
    double theta0 = 0.0;  // rad
    double pg = 0.0, qg = 0.0;
    double pd0 = 0.0, qd0 = 0.0;
    double dp = 0.0, dq = 0.0;  // load-increase direction
};

struct Branch {
    int from = 0, to = 0;
    double r = 0.0, x = 0.0;
    double shunt = 0.0;  // total line-charging susceptance, split between the ends
};

/// Network in per unit. The unknowns are the angles of every non-slack bus followed by the
/// magnitudes of every PQ bus; the load factor lambda is appended as the last coordinate.
class BusSystem {
  public:
    BusSystem(std::vector<Bus> buses, const std::vector<Branch>& branches);

    static BusSystem parse(std::istream& in);
    static BusSystem load(const std::string& path);

    std::size_t size() const { return buses_.size(); }
    const std::vector<Bus>& buses() const { return buses_; }
    const Eigen::MatrixXd& g() const { return g_; }
    const Eigen::MatrixXd& b() const { return b_; }
    std::size_t slack() const { return slack_; }
    const std::vector<std::size_t>& angle_buses() const { return angle_buses_; }
    const std::vector<std::size_t>& magnitude_buses() const { return magnitude_buses_; }
    std::size_t num_equations() const { return angle_buses_.size() + magnitude_buses_.size(); }
    bool has_direction() const;

  private:
    std::vector<Bus> buses_;
    Eigen::MatrixXd g_, b_;
    std::size_t slack_ = 0;
    std::vector<std::size_t> angle_buses_;
    std::vector<std::size_t> magnitude_buses_;
};

struct PFState {
    Eigen::VectorXd theta;  // all buses, slack pinned at its initial angle
    Eigen::VectorXd v;
    double lambda = 0.0;

    static PFState initial(const BusSystem& system);
};

/// Continuation coordinates (theta of angle buses, V of PQ buses, lambda).
Eigen::VectorXd pack(const PFState& state, const BusSystem& system);
PFState unpack(const Eigen::VectorXd& x, const PFState& like, const BusSystem& system);

/// Scheduled minus calculated injections: dP for angle buses, then dQ for PQ buses.
Eigen::VectorXd power_mismatch(const PFState& state, const BusSystem& system);

/// Analytic derivative of power_mismatch with respect to (theta, V).
Eigen::MatrixXd jacobian(const PFState& state, const BusSystem& system);

/// Derivative of power_mismatch with respect to lambda.
Eigen::VectorXd lambda_sensitivity(const BusSystem& system);

struct NewtonOptions {
    double tolerance = 1e-8;
    int max_iter = 20;
};

struct Solution {
    PFState state;
    int iterations = 0;
};

Solution newton_solve(const BusSystem& system, const PFState& initial, double lambda,
                      const NewtonOptions& options = {});

/// Tangent of the solution curve normalised so its continuation component equals sign.
Eigen::VectorXd tangent(const PFState& state, const BusSystem& system, std::size_t index, double sign);

struct Prediction {
    PFState state;
    Eigen::VectorXd tangent;
};

Prediction predictor(const PFState& state, const BusSystem& system, std::size_t index, double sign,
                     double sigma);

/// Newton on [F; x_index - target] = 0.
Solution corrector(const BusSystem& system, const PFState& predicted, std::size_t index, double target,
                   const NewtonOptions& options = {});

struct TraceOptions {
    double sigma0 = 0.1;
    int max_points = 500;
    int max_halvings = 10;
    double stop_fraction = 0.5;  // stop once lambda drops below this share of lambda_max
    NewtonOptions newton;
};

struct StepRecord {
    double sigma = 0.0;
    std::size_t index = 0;
    int corrector_iterations = 0;
};

enum class TraceStatus { completed, point_budget, aborted };

struct CPFTrace {
    std::vector<PFState> points;
    std::vector<StepRecord> step_log;
    PFState nose;
    std::size_t nose_index = 0;
    bool nose_found = false;
    TraceStatus status = TraceStatus::completed;

    double lambda_max() const { return nose.lambda; }
};

CPFTrace trace_curve(const BusSystem& system, const TraceOptions& options = {});

void write_trace_csv(std::ostream& out, const CPFTrace& trace, const BusSystem& system);

}  // namespace mec::cpf
