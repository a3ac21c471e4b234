#include "mec/cpf.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "mec/error.hpp"

namespace mec::cpf {

namespace {

BusType parse_type(const std::string& s) {
    if (s == "slack") return BusType::slack;
    if (s == "pv") return BusType::pv;
    if (s == "pq") return BusType::pq;
    throw InvalidConfig("unknown bus type '" + s + "'");
}

struct Injections {
    Eigen::VectorXd p, q;
};

Injections injections(const PFState& s, const BusSystem& sys) {
    const auto n = static_cast<Eigen::Index>(sys.size());
    Injections out{Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n)};
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index k = 0; k < n; ++k) {
            const double gik = sys.g()(i, k), bik = sys.b()(i, k);
            if (gik == 0.0 && bik == 0.0) continue;
            const double t = s.theta(i) - s.theta(k);
            const double vv = s.v(i) * s.v(k);
            out.p(i) += vv * (gik * std::cos(t) + bik * std::sin(t));
            out.q(i) += vv * (gik * std::sin(t) - bik * std::cos(t));
        }
    }
    return out;
}

double inf_norm(const Eigen::VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

bool valid_state(const PFState& s) {
    return s.v.allFinite() && s.theta.allFinite() && std::isfinite(s.lambda) && (s.v.array() > 0.0).all();
}

Eigen::MatrixXd augmented(const PFState& s, const BusSystem& sys, std::size_t index) {
    const auto m = static_cast<Eigen::Index>(sys.num_equations());
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m + 1, m + 1);
    a.topLeftCorner(m, m) = jacobian(s, sys);
    a.topRightCorner(m, 1) = lambda_sensitivity(sys);
    a(m, static_cast<Eigen::Index>(index)) = 1.0;
    return a;
}

}  // namespace

BusSystem::BusSystem(std::vector<Bus> buses, const std::vector<Branch>& branches) : buses_(std::move(buses)) {
    const auto n = static_cast<Eigen::Index>(buses_.size());
    if (n == 0) throw InvalidConfig("bus system is empty");
    std::map<int, Eigen::Index> index;
    std::size_t slacks = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const Bus& bus = buses_[static_cast<std::size_t>(i)];
        if (!index.emplace(bus.id, i).second) throw InvalidConfig("duplicate bus id " + std::to_string(bus.id));
        if (!(bus.v0 > 0.0)) throw InvalidConfig("bus voltage must be positive");
        if (bus.type == BusType::slack) {
            ++slacks;
            slack_ = static_cast<std::size_t>(i);
        }
    }
    if (slacks != 1) throw InvalidConfig("bus system needs exactly one slack bus");

    g_ = Eigen::MatrixXd::Zero(n, n);
    b_ = Eigen::MatrixXd::Zero(n, n);
    for (const Branch& br : branches) {
        const auto f = index.find(br.from), t = index.find(br.to);
        if (f == index.end() || t == index.end()) throw InvalidConfig("branch references an unknown bus");
        if (f->second == t->second) throw InvalidConfig("branch connects a bus to itself");
        const double z2 = br.r * br.r + br.x * br.x;
        if (!(z2 > 0.0)) throw InvalidConfig("branch impedance must be nonzero");
        const double gs = br.r / z2, bs = -br.x / z2;
        const Eigen::Index i = f->second, k = t->second;
        g_(i, i) += gs;
        g_(k, k) += gs;
        b_(i, i) += bs + br.shunt / 2.0;
        b_(k, k) += bs + br.shunt / 2.0;
        g_(i, k) -= gs;
        g_(k, i) -= gs;
        b_(i, k) -= bs;
        b_(k, i) -= bs;
    }
    for (std::size_t i = 0; i < buses_.size(); ++i) {
        if (buses_[i].type != BusType::slack) angle_buses_.push_back(i);
        if (buses_[i].type == BusType::pq) magnitude_buses_.push_back(i);
    }
}

BusSystem BusSystem::parse(std::istream& in) {
    std::vector<Bus> buses;
    std::vector<Branch> branches;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream row(line);
        std::string kind;
        if (!(row >> kind)) continue;
        auto fail = [&](const std::string& what) {
            return InvalidConfig("bus file line " + std::to_string(lineno) + ": " + what);
        };
        if (kind == "bus") {
            Bus bus;
            std::string type;
            double theta_deg = 0.0;
            if (!(row >> bus.id >> type >> bus.v0 >> theta_deg >> bus.pg >> bus.qg >> bus.pd0 >> bus.qd0 >> bus.dp >> bus.dq))
                throw fail("expected: bus id type V0 theta0 PG QG PD0 QD0 dP dQ");
            bus.type = parse_type(type);
            bus.theta0 = theta_deg * std::numbers::pi / 180.0;
            buses.push_back(bus);
        } else if (kind == "branch") {
            Branch br;
            if (!(row >> br.from >> br.to >> br.r >> br.x >> br.shunt))
                throw fail("expected: branch from to r x shunt");
            branches.push_back(br);
        } else {
            throw fail("unknown record '" + kind + "'");
        }
        std::string extra;
        if (row >> extra) throw fail("trailing field '" + extra + "'");
    }
    return BusSystem(std::move(buses), branches);
}

BusSystem BusSystem::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open bus file " + path);
    return parse(in);
}

bool BusSystem::has_direction() const {
    return std::any_of(buses_.begin(), buses_.end(), [](const Bus& b) { return b.dp != 0.0 || b.dq != 0.0; });
}

PFState PFState::initial(const BusSystem& system) {
    const auto n = static_cast<Eigen::Index>(system.size());
    PFState s{Eigen::VectorXd(n), Eigen::VectorXd(n), 0.0};
    for (Eigen::Index i = 0; i < n; ++i) {
        s.theta(i) = system.buses()[static_cast<std::size_t>(i)].theta0;
        s.v(i) = system.buses()[static_cast<std::size_t>(i)].v0;
    }
    return s;
}

Eigen::VectorXd pack(const PFState& state, const BusSystem& system) {
    const auto& ang = system.angle_buses();
    const auto& mag = system.magnitude_buses();
    Eigen::VectorXd x(static_cast<Eigen::Index>(ang.size() + mag.size() + 1));
    Eigen::Index r = 0;
    for (std::size_t i : ang) x(r++) = state.theta(static_cast<Eigen::Index>(i));
    for (std::size_t i : mag) x(r++) = state.v(static_cast<Eigen::Index>(i));
    x(r) = state.lambda;
    return x;
}

PFState unpack(const Eigen::VectorXd& x, const PFState& like, const BusSystem& system) {
    PFState s = like;
    Eigen::Index r = 0;
    for (std::size_t i : system.angle_buses()) s.theta(static_cast<Eigen::Index>(i)) = x(r++);
    for (std::size_t i : system.magnitude_buses()) s.v(static_cast<Eigen::Index>(i)) = x(r++);
    s.lambda = x(r);
    return s;
}

Eigen::VectorXd power_mismatch(const PFState& state, const BusSystem& system) {
    const Injections inj = injections(state, system);
    const auto& ang = system.angle_buses();
    const auto& mag = system.magnitude_buses();
    Eigen::VectorXd f(static_cast<Eigen::Index>(ang.size() + mag.size()));
    Eigen::Index r = 0;
    for (std::size_t i : ang) {
        const Bus& b = system.buses()[i];
        f(r++) = b.pg - (b.pd0 + state.lambda * b.dp) - inj.p(static_cast<Eigen::Index>(i));
    }
    for (std::size_t i : mag) {
        const Bus& b = system.buses()[i];
        f(r++) = b.qg - (b.qd0 + state.lambda * b.dq) - inj.q(static_cast<Eigen::Index>(i));
    }
    return f;
}

Eigen::MatrixXd jacobian(const PFState& s, const BusSystem& sys) {
    const Injections inj = injections(s, sys);
    const auto& ang = sys.angle_buses();
    const auto& mag = sys.magnitude_buses();
    const auto na = static_cast<Eigen::Index>(ang.size());
    const auto m = static_cast<Eigen::Index>(ang.size() + mag.size());
    const Eigen::MatrixXd& G = sys.g();
    const Eigen::MatrixXd& B = sys.b();

    // Derivatives of the calculated injections; the mismatch Jacobian is their negative.
    auto dp_dtheta = [&](Eigen::Index i, Eigen::Index k) {
        if (i == k) return -inj.q(i) - B(i, i) * s.v(i) * s.v(i);
        const double t = s.theta(i) - s.theta(k);
        return s.v(i) * s.v(k) * (G(i, k) * std::sin(t) - B(i, k) * std::cos(t));
    };
    auto dp_dv = [&](Eigen::Index i, Eigen::Index k) {
        if (i == k) return inj.p(i) / s.v(i) + G(i, i) * s.v(i);
        const double t = s.theta(i) - s.theta(k);
        return s.v(i) * (G(i, k) * std::cos(t) + B(i, k) * std::sin(t));
    };
    auto dq_dtheta = [&](Eigen::Index i, Eigen::Index k) {
        if (i == k) return inj.p(i) - G(i, i) * s.v(i) * s.v(i);
        const double t = s.theta(i) - s.theta(k);
        return -s.v(i) * s.v(k) * (G(i, k) * std::cos(t) + B(i, k) * std::sin(t));
    };
    auto dq_dv = [&](Eigen::Index i, Eigen::Index k) {
        if (i == k) return inj.q(i) / s.v(i) - B(i, i) * s.v(i);
        const double t = s.theta(i) - s.theta(k);
        return s.v(i) * (G(i, k) * std::sin(t) - B(i, k) * std::cos(t));
    };

    Eigen::MatrixXd j(m, m);
    for (Eigen::Index r = 0; r < m; ++r) {
        const bool p_row = r < na;
        const auto i = static_cast<Eigen::Index>(p_row ? ang[static_cast<std::size_t>(r)] : mag[static_cast<std::size_t>(r - na)]);
        for (Eigen::Index c = 0; c < m; ++c) {
            const bool theta_col = c < na;
            const auto k = static_cast<Eigen::Index>(theta_col ? ang[static_cast<std::size_t>(c)] : mag[static_cast<std::size_t>(c - na)]);
            double d;
            if (p_row) d = theta_col ? dp_dtheta(i, k) : dp_dv(i, k);
            else d = theta_col ? dq_dtheta(i, k) : dq_dv(i, k);
            j(r, c) = -d;
        }
    }
    return j;
}

Eigen::VectorXd lambda_sensitivity(const BusSystem& system) {
    const auto& ang = system.angle_buses();
    const auto& mag = system.magnitude_buses();
    Eigen::VectorXd d(static_cast<Eigen::Index>(ang.size() + mag.size()));
    Eigen::Index r = 0;
    for (std::size_t i : ang) d(r++) = -system.buses()[i].dp;
    for (std::size_t i : mag) d(r++) = -system.buses()[i].dq;
    return d;
}

Solution newton_solve(const BusSystem& system, const PFState& initial, double lambda, const NewtonOptions& options) {
    Solution sol{initial, 0};
    sol.state.lambda = lambda;
    for (;;) {
        const Eigen::VectorXd f = power_mismatch(sol.state, system);
        if (!f.allFinite()) throw NoConvergence("power flow mismatch is not finite");
        if (inf_norm(f) <= options.tolerance) return sol;
        if (sol.iterations >= options.max_iter) throw NoConvergence("power flow did not converge");
        Eigen::FullPivLU<Eigen::MatrixXd> lu(jacobian(sol.state, system));
        if (!lu.isInvertible()) throw NoConvergence("power flow Jacobian is singular");
        Eigen::VectorXd x = pack(sol.state, system);
        x.head(f.size()) -= lu.solve(f);
        sol.state = unpack(x, sol.state, system);
        ++sol.iterations;
        if (!valid_state(sol.state)) throw NoConvergence("power flow iterate left the valid region");
    }
}

Eigen::VectorXd tangent(const PFState& state, const BusSystem& system, std::size_t index, double sign) {
    const auto m = static_cast<Eigen::Index>(system.num_equations());
    Eigen::FullPivLU<Eigen::MatrixXd> lu(augmented(state, system, index));
    if (!lu.isInvertible()) throw NoConvergence("augmented continuation matrix is singular");
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m + 1);
    rhs(m) = sign;
    return lu.solve(rhs);
}

Prediction predictor(const PFState& state, const BusSystem& system, std::size_t index, double sign, double sigma) {
    Prediction p{state, tangent(state, system, index, sign)};
    p.state = unpack(pack(state, system) + sigma * p.tangent, state, system);
    return p;
}

Solution corrector(const BusSystem& system, const PFState& predicted, std::size_t index, double target,
                   const NewtonOptions& options) {
    const auto m = static_cast<Eigen::Index>(system.num_equations());
    const auto k = static_cast<Eigen::Index>(index);
    Solution sol{predicted, 0};
    for (;;) {
        Eigen::VectorXd x = pack(sol.state, system);
        Eigen::VectorXd g(m + 1);
        g.head(m) = power_mismatch(sol.state, system);
        g(m) = x(k) - target;
        if (!g.allFinite()) throw NoConvergence("corrector residual is not finite");
        if (inf_norm(g) <= options.tolerance) return sol;
        if (sol.iterations >= options.max_iter) throw NoConvergence("corrector did not converge");
        Eigen::FullPivLU<Eigen::MatrixXd> lu(augmented(sol.state, system, index));
        if (!lu.isInvertible()) throw NoConvergence("corrector matrix is singular");
        x -= lu.solve(g);
        sol.state = unpack(x, sol.state, system);
        ++sol.iterations;
        if (!valid_state(sol.state)) throw NoConvergence("corrector iterate left the valid region");
    }
}

namespace {

std::size_t largest_component(const Eigen::VectorXd& t) {
    Eigen::Index idx = 0;
    t.cwiseAbs().maxCoeff(&idx);
    return static_cast<std::size_t>(idx);
}

// Locates the turning point between two accepted points on either side of it by bisecting
// on the continuation variable until dlambda changes sign within floating-point resolution.
PFState locate_nose(const BusSystem& sys, const PFState& before, const PFState& after, std::size_t index,
                    double sign, const NewtonOptions& opt) {
    const auto k = static_cast<Eigen::Index>(index);
    const Eigen::VectorXd xa = pack(before, sys), xb = pack(after, sys);
    const auto lambda_pos = static_cast<Eigen::Index>(sys.num_equations());
    double lo = 0.0, hi = 1.0;
    PFState best = before.lambda >= after.lambda ? before : after;
    for (int it = 0; it < 60 && (hi - lo) * std::abs(xb(k) - xa(k)) > 1e-13; ++it) {
        const double mid = 0.5 * (lo + hi);
        const Eigen::VectorXd guess = xa + mid * (xb - xa);
        try {
            const Solution s = corrector(sys, unpack(guess, before, sys), index, guess(k), opt);
            if (s.state.lambda > best.lambda) best = s.state;
            const double dl = tangent(s.state, sys, index, sign)(lambda_pos);
            (dl > 0.0 ? lo : hi) = mid;
        } catch (const NoConvergence&) {
            break;
        }
    }
    return best;
}

}  // namespace

CPFTrace trace_curve(const BusSystem& system, const TraceOptions& options) {
    CPFTrace trace;
    PFState base;
    try {
        base = newton_solve(system, PFState::initial(system), 0.0, options.newton).state;
    } catch (const NoConvergence& e) {
        throw NoConvergence(std::string("base case is unsolvable: ") + e.what());
    }
    trace.points.push_back(base);
    trace.nose = base;
    if (!system.has_direction()) return trace;

    const std::size_t lambda_pos = system.num_equations();
    std::size_t index = lambda_pos;
    double sign = 1.0;
    double sigma = options.sigma0;
    int easy_steps = 0;
    PFState current = base;
    Eigen::VectorXd t = tangent(current, system, index, sign);

    while (static_cast<int>(trace.points.size()) < options.max_points) {
        bool accepted = false;
        Solution next;
        for (int h = 0; h <= options.max_halvings; ++h) {
            const PFState predicted = unpack(pack(current, system) + sigma * t, current, system);
            try {
                next = corrector(system, predicted, index, pack(predicted, system)(static_cast<Eigen::Index>(index)),
                                 options.newton);
                accepted = true;
                break;
            } catch (const NoConvergence&) {
                sigma /= 2.0;
                easy_steps = 0;
            }
        }
        if (!accepted) {
            trace.status = TraceStatus::aborted;
            break;
        }
        trace.step_log.push_back({sigma, index, next.iterations});

        Eigen::VectorXd t_next;
        try {
            t_next = tangent(next.state, system, index, sign);
        } catch (const NoConvergence&) {
            trace.points.push_back(next.state);
            trace.status = TraceStatus::aborted;
            break;
        }

        if (!trace.nose_found && t(static_cast<Eigen::Index>(lambda_pos)) > 0.0 &&
            t_next(static_cast<Eigen::Index>(lambda_pos)) <= 0.0) {
            const PFState nose = locate_nose(system, current, next.state, index, sign, options.newton);
            trace.nose_found = true;
            if (nose.lambda > current.lambda && nose.lambda > next.state.lambda) trace.points.push_back(nose);
        }
        trace.points.push_back(next.state);
        current = next.state;

        // Continue on the coordinate that moves fastest along the curve.
        const std::size_t fastest = largest_component(t_next);
        if (fastest != index) {
            sign = t_next(static_cast<Eigen::Index>(fastest)) > 0.0 ? 1.0 : -1.0;
            index = fastest;
            t = tangent(current, system, index, sign);
        } else {
            t = t_next;
        }

        easy_steps = next.iterations <= 3 ? easy_steps + 1 : 0;
        if (easy_steps >= 3) {
            sigma = std::min(2.0 * sigma, options.sigma0);
            easy_steps = 0;
        }

        const double lambda_max = std::max_element(trace.points.begin(), trace.points.end(), [](const PFState& a, const PFState& b) {
                                      return a.lambda < b.lambda;
                                  })->lambda;
        if (trace.nose_found && current.lambda < options.stop_fraction * lambda_max) break;
        if (current.lambda < 0.0) break;
    }
    if (static_cast<int>(trace.points.size()) >= options.max_points && trace.status == TraceStatus::completed)
        trace.status = TraceStatus::point_budget;

    const auto top = std::max_element(trace.points.begin(), trace.points.end(),
                                      [](const PFState& a, const PFState& b) { return a.lambda < b.lambda; });
    trace.nose = *top;
    trace.nose_index = static_cast<std::size_t>(top - trace.points.begin());
    return trace;
}

namespace {

std::string fmt(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

}  // namespace

void write_trace_csv(std::ostream& out, const CPFTrace& trace, const BusSystem& system) {
    out << "# mec-cpf-trace v1\n";
    out << "point,lambda";
    for (const Bus& b : system.buses()) out << ",V_" << b.id;
    for (const Bus& b : system.buses()) out << ",theta_" << b.id;
    out << '\n';
    for (std::size_t p = 0; p < trace.points.size(); ++p) {
        const PFState& s = trace.points[p];
        out << p << ',' << fmt(s.lambda);
        for (Eigen::Index i = 0; i < s.v.size(); ++i) out << ',' << fmt(s.v(i));
        for (Eigen::Index i = 0; i < s.theta.size(); ++i) out << ',' << fmt(s.theta(i));
        out << '\n';
    }
}

}  // namespace mec::cpf
