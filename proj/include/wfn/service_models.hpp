#pragma once

#include "wfn/numerics.hpp"

#include <optional>
#include <string>
#include <variant>

namespace wfn {

struct Deterministic {
    double d;
    friend bool operator==(const Deterministic&, const Deterministic&) = default;
};

struct Exponential {
    double omega;
    friend bool operator==(const Exponential&, const Exponential&) = default;
};

struct Erlang {
    int q;
    double omega;
    friend bool operator==(const Erlang&, const Erlang&) = default;
};

class ServiceModel {
public:
    using Variant = std::variant<Deterministic, Exponential, Erlang>;

    ServiceModel(Deterministic m);
    ServiceModel(Exponential m);
    ServiceModel(Erlang m);

    const Variant& variant() const noexcept { return v_; }
    bool is_deterministic() const noexcept { return std::holds_alternative<Deterministic>(v_); }
    bool has_finite_poles() const noexcept { return !is_deterministic(); }
    std::string name() const;

    // Erlang view of the exponential family (q = 1 for Exponential).
    int shape() const;
    double rate() const;
    double det_value() const;

    double mean() const { return moment(1); }
    double moment(int k) const;
    // D*(s) = E[e^{-sD}]
    cplx lst(cplx s) const;
    // E[D^k e^{-aD}] / k!
    cplx shifted_moment_coeff(cplx a, int k) const;
    // Jet of (1 - D*(s))/s expanded at s0. Entire for every supported model
    // except at s = -omega.
    Jet residual_lst_jet(cplx s0, std::size_t order) const;

    friend bool operator==(const ServiceModel&, const ServiceModel&) = default;

private:
    Variant v_;
};

inline double moment(const ServiceModel& m, int k) { return m.moment(k); }
inline cplx lst(const ServiceModel& m, cplx s) { return m.lst(s); }
inline cplx shifted_moment_coeff(const ServiceModel& m, cplx a, int k) {
    return m.shifted_moment_coeff(a, k);
}

// Arrival rate plus service model; model0 serves jobs that find the system empty.
class QueueSpec {
public:
    QueueSpec(double lambda, ServiceModel model, std::optional<ServiceModel> model0 = std::nullopt);

    double lambda() const noexcept { return lambda_; }
    const ServiceModel& model() const noexcept { return model_; }
    const ServiceModel& model0() const noexcept { return model0_ ? *model0_ : model_; }
    bool has_setup() const noexcept { return model0_.has_value(); }
    const std::optional<ServiceModel>& setup_model() const noexcept { return model0_; }

    double rho() const noexcept { return lambda_ * model_.mean(); }
    double rho0() const noexcept { return lambda_ * model0().mean(); }
    // lambda / (1 - rho), the prefactor of every w-function.
    double gain() const noexcept { return lambda_ / (1.0 - rho()); }

    friend bool operator==(const QueueSpec&, const QueueSpec&) = default;

private:
    double lambda_;
    ServiceModel model_;
    std::optional<ServiceModel> model0_;
};

struct Utilization {
    double rho;
    double rho0;
};

Utilization utilization(const QueueSpec& spec);
// Throws StabilityViolation when rho >= 1.
void stability_check(const QueueSpec& spec);

} // namespace wfn
